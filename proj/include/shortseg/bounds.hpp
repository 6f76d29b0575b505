#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "shortseg/segment.hpp"

namespace shortseg {

/// A clamped analytic bound.  `vacuous` marks results whose raw formula fell
/// outside the informative range (negative probability, or a count bound that
/// saturated at its trivial maximum).
struct BoundValue {
    double value = 0.0;
    bool vacuous = false;
};

/// Shape of a planted signal: how many segments, their length range, the
/// smallest gap separating consecutive ones, and the weakest height expressed
/// as a noise-CDF level (threshold at the beta quantile means a signal
/// position exceeds it with probability at least beta under symmetric noise).
struct SignalGeometry {
    Count segment_count = 1;  // K
    Count shortest = 1;       // minimum segment length
    Count longest = 1;        // maximum segment length
    Count min_gap = 1;        // smallest separation between consecutive segments
    double beta_min = 0.75;   // CDF level of the weakest signal height, in (0.5, 1)

    void validate() const {
        if (segment_count < 1) throw std::invalid_argument("geometry needs at least one segment");
        if (shortest < 1 || longest < shortest)
            throw std::invalid_argument("geometry needs 1 <= shortest <= longest");
        if (min_gap < 0 || (segment_count >= 2 && min_gap < 1))
            throw std::invalid_argument("geometry with several segments needs min_gap >= 1");
        if (!(beta_min > 0.5 && beta_min < 1.0))
            throw std::invalid_argument("beta_min must lie in (0.5, 1)");
    }
};

namespace detail {

// 2^-e without pow; underflows cleanly to 0 for huge e.
inline double exp2_neg(Count e) {
    return std::ldexp(1.0, e > 4096 ? -4096 : -static_cast<int>(e));
}

inline BoundValue clamp_probability(double raw) {
    if (raw < 0.0) return {0.0, true};
    return {std::min(raw, 1.0), false};
}

}  // namespace detail

/// Lower bound on the chance that a signal segment of the given length comes
/// out of completion as one intact piece, when each of its positions exceeds
/// the threshold independently with probability >= 1/2 (threshold at or below
/// the segment height under symmetric noise).
inline BoundValue segment_intact_bound(Count length, Count gap_tolerance) {
    if (length < 1) throw std::invalid_argument("segment length must be >= 1");
    if (gap_tolerance < 1) throw std::invalid_argument("gap tolerance must be >= 1");
    if (gap_tolerance >= length) return {1.0 - detail::exp2_neg(length), false};
    double raw = 1.0 - static_cast<double>(length - gap_tolerance + 2) *
                           detail::exp2_neg(gap_tolerance + 1);
    return detail::clamp_probability(raw);
}

/// Lower bound on the chance that a gap of D noise-only positions between two
/// signal segments is not bridged by completion, when each gap position stays
/// below the threshold with probability >= 2*beta - 1.
inline BoundValue gap_separation_bound(Count gap, Count gap_tolerance, double beta) {
    if (gap < 0) throw std::invalid_argument("gap length must be >= 0");
    if (gap_tolerance < 1) throw std::invalid_argument("gap tolerance must be >= 1");
    if (!(beta > 0.5 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0.5, 1)");
    double white = 2.0 * beta - 1.0;
    double miss = 1.0 - std::pow(white, static_cast<double>(gap_tolerance));
    double raw = 1.0 - 2.0 * std::pow(miss, static_cast<double>(gap / gap_tolerance));
    return detail::clamp_probability(raw);
}

/// Lower bound on the chance that every signal segment of the geometry is
/// identified: each survives intact and neighbouring segments stay separated.
/// Union bound over the per-segment and per-gap failure terms.  Assumes the
/// threshold sits exactly at the weakest signal height (the beta_min
/// quantile); smaller thresholds are not covered.
inline BoundValue identification_bound(const SignalGeometry& g, Count gap_tolerance) {
    g.validate();
    if (gap_tolerance < 1) throw std::invalid_argument("gap tolerance must be >= 1");
    double breaks = static_cast<double>(g.segment_count) *
                    std::max(static_cast<double>(g.longest - gap_tolerance + 2) / 2.0, 1.0) *
                    detail::exp2_neg(std::min(gap_tolerance, g.shortest));
    double white = 2.0 * g.beta_min - 1.0;
    double miss = 1.0 - std::pow(white, static_cast<double>(gap_tolerance));
    double bridges = static_cast<double>(g.segment_count - 1) *
                     std::pow(miss, static_cast<double>(g.min_gap / gap_tolerance));
    return detail::clamp_probability(1.0 - breaks - bridges);
}

/// Upper bound on the expected number of segments detected from pure noise
/// with m exceedances among n positions, gap tolerance d and cleanup cutoff
/// h = 1: m times the chance that a given exceedance has another one within
/// distance d + 1.  Saturates (vacuously) at m when m is so dense that the
/// no-neighbour product vanishes.
inline BoundValue null_segment_count_bound(Count n, Count m, Count gap_tolerance) {
    if (n < 1 || m < 0 || m > n) throw std::invalid_argument("need 0 <= m <= n and n >= 1");
    if (gap_tolerance < 1) throw std::invalid_argument("gap tolerance must be >= 1");
    if (m == 0) return {0.0, false};
    double product = 1.0;
    for (Count k = 1; k <= gap_tolerance; ++k) {
        Count numer = n - m + 1 - k;
        if (numer <= 0) return {static_cast<double>(m), true};
        product *= static_cast<double>(numer) / static_cast<double>(n - k);
    }
    return {static_cast<double>(m) * (1.0 - product), false};
}

}  // namespace shortseg
