#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "shortseg/segment.hpp"

namespace shortseg {

enum class SegmentLabel { true_positive, false_positive };

struct ClassifyResult {
    std::vector<SegmentLabel> labels;  // one per detected segment, same order
    Count tp = 0;
    Count fp = 0;
    Count identified = 0;  // truth segments that gained a true-positive partner
};

namespace detail {

inline void require_sorted_disjoint(std::span<const Segment> segments, const char* which) {
    for (const Segment& s : segments) validate_segment(s);
    if (!is_sorted_disjoint(segments))
        throw std::invalid_argument(std::string(which) +
                                    " segments must be sorted and non-overlapping");
}

/// Walks two sorted disjoint segment lists and reports every intersecting
/// (left index, right index) pair, in order.  Linear in list sizes plus the
/// number of pairs.
template <typename Visit>
void for_each_overlap(std::span<const Segment> left, std::span<const Segment> right,
                      Visit&& visit) {
    std::size_t j0 = 0;
    for (std::size_t i = 0; i < left.size(); ++i) {
        while (j0 < right.size() && right[j0].end < left[i].start) ++j0;
        for (std::size_t j = j0; j < right.size() && right[j].start <= left[i].end; ++j)
            visit(i, j);
    }
}

}  // namespace detail

/// Scores detections against ground truth.  A detected segment is a true
/// positive iff it intersects exactly one truth segment and no other detected
/// segment touches that same truth segment; everything else detected is a
/// false positive.  A truth segment is identified iff it has a TP partner.
inline ClassifyResult classify(std::span<const Segment> truth,
                               std::span<const Segment> detected) {
    detail::require_sorted_disjoint(truth, "truth");
    detail::require_sorted_disjoint(detected, "detected");

    std::vector<Count> hits_per_truth(truth.size(), 0);
    std::vector<Count> hits_per_detected(detected.size(), 0);
    std::vector<std::size_t> partner(detected.size(), 0);  // valid where hits_per_detected == 1
    detail::for_each_overlap(detected, truth, [&](std::size_t di, std::size_t ti) {
        ++hits_per_detected[di];
        ++hits_per_truth[ti];
        partner[di] = ti;
    });

    ClassifyResult out;
    out.labels.resize(detected.size(), SegmentLabel::false_positive);
    for (std::size_t di = 0; di < detected.size(); ++di) {
        if (hits_per_detected[di] == 1 && hits_per_truth[partner[di]] == 1) {
            out.labels[di] = SegmentLabel::true_positive;
            ++out.tp;
            ++out.identified;
        } else {
            ++out.fp;
        }
    }
    return out;
}

/// Overlap similarity |a ∩ b| / sqrt(|a|·|b|): 1 iff equal, 0 iff disjoint.
inline double affinity(const Segment& a, const Segment& b) {
    validate_segment(a);
    validate_segment(b);
    double shared = static_cast<double>(overlap_length(a, b));
    return shared / std::sqrt(static_cast<double>(a.length()) * static_cast<double>(b.length()));
}

struct MatchedPair {
    Segment a;
    Segment b;
    double affinity = 0.0;
};

struct MatchResult {
    std::vector<MatchedPair> pairs;
    double mean_affinity = 0.0;  // 0 when there are no pairs
};

/// Pairs up segments across two detection sets when the overlap is mutually
/// unique: a's only intersection in B is b, and b's only intersection in A
/// is a.  Reports each pair's affinity plus the mean.
inline MatchResult match_common(std::span<const Segment> set_a, std::span<const Segment> set_b) {
    detail::require_sorted_disjoint(set_a, "first set's");
    detail::require_sorted_disjoint(set_b, "second set's");

    std::vector<Count> hits_a(set_a.size(), 0);
    std::vector<Count> hits_b(set_b.size(), 0);
    std::vector<std::size_t> partner_of_a(set_a.size(), 0);
    detail::for_each_overlap(set_a, set_b, [&](std::size_t i, std::size_t j) {
        ++hits_a[i];
        ++hits_b[j];
        partner_of_a[i] = j;
    });

    MatchResult out;
    double total = 0.0;
    for (std::size_t i = 0; i < set_a.size(); ++i) {
        if (hits_a[i] != 1 || hits_b[partner_of_a[i]] != 1) continue;
        const Segment& a = set_a[i];
        const Segment& b = set_b[partner_of_a[i]];
        double rho = affinity(a, b);
        out.pairs.push_back({a, b, rho});
        total += rho;
    }
    if (!out.pairs.empty()) out.mean_affinity = total / static_cast<double>(out.pairs.size());
    return out;
}

}  // namespace shortseg
