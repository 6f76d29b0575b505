#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "shortseg/detect.hpp"
#include "shortseg/inference.hpp"
#include "shortseg/segment.hpp"

// Brute-force reference implementations.  Everything here trades speed for
// being obviously correct, so the fast paths can be checked against them.
namespace shortseg::oracle {

/// True if some window of length s over the sorted mark positions contains
/// at least t marks.
inline bool has_dense_window(std::span<const Position> sorted_marks, Count s, Count t) {
    if (t <= 0) return true;
    const auto m = static_cast<Count>(sorted_marks.size());
    if (t > m) return false;
    for (Count i = 0; i + t - 1 < m; ++i)
        if (sorted_marks[static_cast<std::size_t>(i + t - 1)] - sorted_marks[static_cast<std::size_t>(i)] <= s - 1)
            return true;
    return false;
}

/// Number of m-subsets of n positions, saturating at `cap`.
inline std::uint64_t combination_count_capped(Count n, Count m, std::uint64_t cap) {
    if (m < 0 || m > n) return 0;
    m = std::min(m, n - m);
    std::uint64_t c = 1;
    for (Count i = 1; i <= m; ++i) {
        // c * (n - m + i) / i stays integral at every step
        if (c > cap) return cap + 1;
        c = c * static_cast<std::uint64_t>(n - m + i) / static_cast<std::uint64_t>(i);
    }
    return std::min(c, cap + 1);
}

/// Visits every m-subset of {1,...,n} in lexicographic order.
inline void for_each_combination(Count n, Count m,
                                 const std::function<void(std::span<const Position>)>& visit) {
    if (m < 0 || m > n) throw std::invalid_argument("need 0 <= m <= n");
    std::vector<Position> c(static_cast<std::size_t>(m));
    std::iota(c.begin(), c.end(), Position{1});
    if (m == 0) {
        visit(c);
        return;
    }
    while (true) {
        visit(c);
        // advance: find rightmost index that can still move up
        Count i = m - 1;
        while (i >= 0 && c[static_cast<std::size_t>(i)] == n - (m - 1 - i)) --i;
        if (i < 0) break;
        ++c[static_cast<std::size_t>(i)];
        for (Count j = i + 1; j < m; ++j)
            c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
    }
}

inline constexpr std::uint64_t kMaxExactPlacements = 10'000'000;

/// Exact probability that, with m marks placed uniformly among n positions,
/// some window of length s holds at least t of them.  Counts placements by
/// full enumeration; refuses when C(n,m) exceeds kMaxExactPlacements.
inline double exact_pattern_probability(const BallConfiguration& cfg) {
    cfg.validate();
    if (cfg.t > cfg.m) return 0.0;
    const std::uint64_t total = combination_count_capped(cfg.n, cfg.m, kMaxExactPlacements);
    if (total > kMaxExactPlacements)
        throw std::invalid_argument("C(n,m) too large for exact enumeration; use the Monte Carlo estimator");
    std::uint64_t hits = 0;
    for_each_combination(cfg.n, cfg.m, [&](std::span<const Position> marks) {
        if (has_dense_window(marks, cfg.s, cfg.t)) ++hits;
    });
    return static_cast<double>(hits) / static_cast<double>(total);
}

struct MonteCarloEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    std::uint64_t reps = 0;
};

/// Frequency estimate of the same event with binomial standard error
/// sqrt(p(1-p)/reps).  Marks are placed by a partial Fisher-Yates shuffle,
/// O(m) per replicate.  Deterministic for a fixed seed.
inline MonteCarloEstimate monte_carlo_pattern_probability(const BallConfiguration& cfg,
                                                          std::uint64_t reps, std::uint64_t seed) {
    cfg.validate();
    if (reps < 1) throw std::invalid_argument("reps must be >= 1");
    std::mt19937_64 rng(seed);

    std::vector<Position> pool(static_cast<std::size_t>(cfg.n));
    std::iota(pool.begin(), pool.end(), Position{1});
    std::vector<Position> marks(static_cast<std::size_t>(cfg.m));

    std::uint64_t hits = 0;
    for (std::uint64_t r = 0; r < reps; ++r) {
        for (Count i = 0; i < cfg.m; ++i) {
            std::uniform_int_distribution<Count> pick(i, cfg.n - 1);
            std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
            marks[static_cast<std::size_t>(i)] = pool[static_cast<std::size_t>(i)];
        }
        std::sort(marks.begin(), marks.end());
        if (has_dense_window(marks, cfg.s, cfg.t)) ++hits;
    }
    const double p = static_cast<double>(hits) / static_cast<double>(reps);
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(reps)), reps};
}

/// Reference detector: materializes the completion set position by position
/// from its defining property (j is covered iff two exceedances at most d+1
/// apart bracket it), then decomposes and cleans up.  O(n*d) time; must
/// agree with detect() everywhere.
inline DetectionResult naive_detect(std::span<const double> x, const DetectionParams& params) {
    const double c = resolve_threshold(x, params);
    const auto n = static_cast<Count>(x.size());
    const Count d = params.gap_tolerance;

    std::vector<bool> exceed(static_cast<std::size_t>(n) + 1, false);
    Count m = 0;
    for (Count j = 1; j <= n; ++j) {
        if (std::fabs(x[static_cast<std::size_t>(j - 1)]) > c) {
            exceed[static_cast<std::size_t>(j)] = true;
            ++m;
        }
    }

    std::vector<bool> covered(static_cast<std::size_t>(n) + 1, false);
    for (Count j1 = 1; j1 <= n; ++j1) {
        if (!exceed[static_cast<std::size_t>(j1)]) continue;
        for (Count j2 = j1; j2 <= std::min(n, j1 + d + 1); ++j2) {
            if (!exceed[static_cast<std::size_t>(j2)]) continue;
            for (Count j = j1; j <= j2; ++j) covered[static_cast<std::size_t>(j)] = true;
        }
    }

    DetectionResult result;
    result.resolved_threshold = c;
    result.exceed_total = m;
    result.n = n;
    Count j = 1;
    while (j <= n) {
        if (!covered[static_cast<std::size_t>(j)]) {
            ++j;
            continue;
        }
        const Count start = j;
        while (j <= n && covered[static_cast<std::size_t>(j)]) ++j;
        const Segment seg{start, j - 1};
        if (seg.length() <= params.min_length) continue;
        Count t = 0;
        double sum = 0.0;
        for (Count k = seg.start; k <= seg.end; ++k) {
            if (exceed[static_cast<std::size_t>(k)]) ++t;
            sum += x[static_cast<std::size_t>(k - 1)];
        }
        result.segments.push_back({seg, t, sum / static_cast<double>(seg.length()), std::nullopt});
    }
    return result;
}

}  // namespace shortseg::oracle
