#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include "shortseg/inference.hpp"
#include "shortseg/segment.hpp"

namespace shortseg {

namespace detail {

// Significance of the target pattern as a function of the exceedance budget
// m.  For the all-black pattern (t == s) the tail collapses to one
// hypergeometric term, so a plain product beats the log-gamma sum.
inline double pattern_significance(Count n, Count m, Count s, Count t) {
    if (m < t) return 0.0;
    if (t == s) {
        double product = 1.0;
        for (Count i = 1; i < s; ++i)
            product *= static_cast<double>(m - i) / static_cast<double>(n - i);
        return std::min(1.0, static_cast<double>(m) * product);
    }
    return p_value_upper_bound(BallConfiguration{n, m, s, t});
}

}  // namespace detail

/// Largest exceedance budget m in [t, n] whose pattern significance (the
/// chance that some window of length s catches >= t of the m exceedances)
/// still clears p.  The significance is non-decreasing in m, so a bisection
/// lands exactly on the boundary; nullopt when even m = t overshoots.
inline std::optional<Count> select_m(Count n, Count s, Count t, double p) {
    if (t < 1 || s < t || n < s)
        throw std::invalid_argument("pattern needs 1 <= t <= s <= n");
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("significance level must lie in (0,1)");
    if (detail::pattern_significance(n, t, s, t) > p) return std::nullopt;
    // significance(lo) <= p and significance(hi) > p throughout; at m = n
    // every window is all-black, so the significance caps at 1 > p.
    Count lo = t;
    Count hi = n;
    while (hi - lo > 1) {
        Count mid = lo + (hi - lo) / 2;
        (detail::pattern_significance(n, mid, s, t) <= p ? lo : hi) = mid;
    }
    return lo;
}

/// Threshold percentile implied by the selected budget: alpha = 1 - m/n.
inline std::optional<double> select_percentile(Count n, Count s, Count t, double p) {
    auto m = select_m(n, s, t, p);
    if (!m) return std::nullopt;
    return 1.0 - static_cast<double>(*m) / static_cast<double>(n);
}

struct TuningRow {
    Count n = 0;
    Count s = 0;
    Count t = 0;
    double p = 0.0;
    std::optional<Count> m;      // empty when no budget clears p
    std::optional<double> alpha;
};

/// Full selection table over a grid of sequence lengths, target patterns and
/// significance levels, sorted by (s, t, p, n).
inline std::vector<TuningRow> tuning_table(const std::vector<Count>& n_grid,
                                           const std::vector<std::pair<Count, Count>>& patterns,
                                           const std::vector<double>& p_levels) {
    if (n_grid.empty() || patterns.empty() || p_levels.empty())
        throw std::invalid_argument("tuning table needs non-empty grids");
    std::vector<TuningRow> rows;
    rows.reserve(n_grid.size() * patterns.size() * p_levels.size());
    for (const auto& [s, t] : patterns)
        for (double p : p_levels)
            for (Count n : n_grid) {
                TuningRow row{n, s, t, p, select_m(n, s, t, p), std::nullopt};
                if (row.m) row.alpha = 1.0 - static_cast<double>(*row.m) / static_cast<double>(n);
                rows.push_back(row);
            }
    std::sort(rows.begin(), rows.end(), [](const TuningRow& a, const TuningRow& b) {
        return std::tie(a.s, a.t, a.p, a.n) < std::tie(b.s, b.t, b.p, b.n);
    });
    return rows;
}

}  // namespace shortseg
