#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace shortseg {

using Position = std::int64_t;
using Count = std::int64_t;

/// Closed integer interval [start, end] of 1-based positions.
struct Segment {
    Position start = 1;
    Position end = 1;

    Count length() const { return end - start + 1; }

    friend bool operator==(const Segment&, const Segment&) = default;
    friend auto operator<=>(const Segment&, const Segment&) = default;
};

inline bool intersects(const Segment& a, const Segment& b) {
    return a.start <= b.end && b.start <= a.end;
}

/// Number of positions shared by two segments (0 if disjoint).
inline Count overlap_length(const Segment& a, const Segment& b) {
    Position lo = a.start > b.start ? a.start : b.start;
    Position hi = a.end < b.end ? a.end : b.end;
    return hi >= lo ? hi - lo + 1 : 0;
}

inline void validate_segment(const Segment& s) {
    if (s.start < 1 || s.end < s.start)
        throw std::invalid_argument("segment [" + std::to_string(s.start) + "," +
                                    std::to_string(s.end) + "] is not a valid 1-based interval");
}

/// Checks the canonical decomposition: sorted, disjoint, and every gap
/// between consecutive segments is at least 2 (r_k < l_{k+1} - 1).
inline bool is_canonical(std::span<const Segment> segments) {
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (segments[i].start < 1 || segments[i].end < segments[i].start) return false;
        if (i > 0 && segments[i].start <= segments[i - 1].end + 1) return false;
    }
    return true;
}

/// Sorted and pairwise disjoint, but adjacency is allowed.  Ground-truth
/// and evaluation inputs only need this weaker form.
inline bool is_sorted_disjoint(std::span<const Segment> segments) {
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (segments[i].start < 1 || segments[i].end < segments[i].start) return false;
        if (i > 0 && segments[i].start <= segments[i - 1].end) return false;
    }
    return true;
}

/// How the detection threshold c is chosen.
struct AbsoluteThreshold {
    double c = 0.0;
};
struct PercentileThreshold {
    double alpha = 0.95;  // order-statistic level in (0,1)
};
using ThresholdMode = std::variant<AbsoluteThreshold, PercentileThreshold>;

/// The (c, d, h) triplet driving detection: threshold choice, gap
/// tolerance and minimum-length cutoff.
struct DetectionParams {
    ThresholdMode threshold = PercentileThreshold{};
    Count gap_tolerance = 0;   // d: longest run of sub-threshold positions that gets filled
    Count min_length = 0;      // h: segments of length <= h are discarded

    void validate() const {
        if (gap_tolerance < 0) throw std::invalid_argument("gap tolerance d must be >= 0");
        if (min_length < 0) throw std::invalid_argument("minimum length h must be >= 0");
        if (const auto* p = std::get_if<PercentileThreshold>(&threshold)) {
            if (!(p->alpha > 0.0 && p->alpha < 1.0))
                throw std::invalid_argument("percentile alpha must lie in (0,1)");
        }
    }
};

/// A detected segment with its summary statistics.
struct AnnotatedSegment {
    Segment segment;
    Count exceed_count = 0;              // t_k: exceedance positions inside the segment
    double mean = 0.0;                   // sample mean of the raw values over the segment
    std::optional<double> p_value;       // filled in by annotate_p_values

    friend bool operator==(const AnnotatedSegment&, const AnnotatedSegment&) = default;
};

struct DetectionResult {
    std::vector<AnnotatedSegment> segments;
    double resolved_threshold = 0.0;  // the c actually used
    Count exceed_total = 0;           // m = |{j : |x_j| > c}| over the whole sequence
    Count n = 0;                      // sequence length
};

}  // namespace shortseg
