#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "shortseg/segment.hpp"

namespace shortseg {

/// Ball-pattern configuration: a sequence of n positions holding m marked
/// ("black") positions, examined through a window of length s that contains
/// t marks.  m < t is allowed and simply makes the pattern impossible.
struct BallConfiguration {
    Count n = 1;
    Count m = 0;
    Count s = 1;
    Count t = 1;

    void validate() const {
        if (n < 1) throw std::invalid_argument("n must be >= 1");
        if (s < 1 || s > n) throw std::invalid_argument("window length s must satisfy 1 <= s <= n");
        if (t < 1 || t > s) throw std::invalid_argument("window count t must satisfy 1 <= t <= s");
        if (m < 0 || m > n) throw std::invalid_argument("mark count m must satisfy 0 <= m <= n");
    }
};

namespace detail {

inline double log_binomial(Count n, Count k) {
    return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace detail

/// Upper tail P(Y >= t_min) of a hypergeometric variable Y with population
/// size N, K success states and `draws` draws.  Evaluated in log space with
/// lgamma; the smaller tail is summed directly so the subtraction in the
/// complementary case never cancels more than a bit.
inline double hypergeometric_tail(Count N, Count K, Count draws, Count t_min) {
    if (N < 0 || K < 0 || K > N || draws < 0 || draws > N || t_min < 0)
        throw std::invalid_argument("hypergeometric_tail: invalid parameters");

    const Count lo = std::max<Count>(0, draws - (N - K));  // support minimum
    const Count hi = std::min(K, draws);                   // support maximum
    if (t_min <= lo) return 1.0;
    if (t_min > hi) return 0.0;

    const double log_total = detail::log_binomial(N, draws);
    auto pmf = [&](Count y) {
        return std::exp(detail::log_binomial(K, y) + detail::log_binomial(N - K, draws - y) - log_total);
    };

    // Sum whichever side of the mean is the small tail.
    const double mean = static_cast<double>(draws) * static_cast<double>(K) / static_cast<double>(N);
    if (static_cast<double>(t_min) > mean) {
        double tail = 0.0;
        for (Count y = hi; y >= t_min; --y) tail += pmf(y);
        return std::min(tail, 1.0);
    }
    double lower = 0.0;
    for (Count y = lo; y < t_min; ++y) lower += pmf(y);
    return std::clamp(1.0 - lower, 0.0, 1.0);
}

/// Significance bound for observing some window of length s holding at
/// least t of the m marks: min(1, m * P(Y >= t-1)) with Y hypergeometric
/// on population n-1, successes m-1, draws s-1.  Capped at 1 so the value
/// is usable as a p-value.
inline double p_value_upper_bound(const BallConfiguration& cfg) {
    cfg.validate();
    if (cfg.m == 0 || cfg.t > cfg.m) return 0.0;  // pattern impossible
    const double tail = hypergeometric_tail(cfg.n - 1, cfg.m - 1, cfg.s - 1, cfg.t - 1);
    return std::min(1.0, static_cast<double>(cfg.m) * tail);
}

/// Attaches a p-value to every detected segment, judging each (s_k, t_k)
/// against the global (n, m) of the sequence it came from.
inline DetectionResult annotate_p_values(DetectionResult result) {
    for (AnnotatedSegment& seg : result.segments) {
        seg.p_value = p_value_upper_bound(
            {result.n, result.exceed_total, seg.segment.length(), seg.exceed_count});
    }
    return result;
}

/// Keeps segments with p_value <= p_max; order and annotations survive.
inline DetectionResult filter_by_p(DetectionResult result, double p_max) {
    if (!(p_max > 0.0 && p_max <= 1.0))
        throw std::invalid_argument("p_max must lie in (0,1]");
    for (const AnnotatedSegment& seg : result.segments)
        if (!seg.p_value)
            throw std::invalid_argument("segments carry no p-values; call annotate_p_values first");
    std::erase_if(result.segments,
                  [p_max](const AnnotatedSegment& seg) { return *seg.p_value > p_max; });
    return result;
}

}  // namespace shortseg
