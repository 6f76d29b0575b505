#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "shortseg/segment.hpp"

namespace shortseg {

/// Resolves the threshold for a sequence.  Absolute mode passes c through;
/// percentile mode returns the k-th smallest of {|x_j|} with k = ceil(alpha*n),
/// so that positions strictly above the returned value are the exceedances.
inline double resolve_threshold(std::span<const double> x, const DetectionParams& params) {
    params.validate();
    if (x.empty()) throw std::invalid_argument("empty input");
    if (const auto* abs_mode = std::get_if<AbsoluteThreshold>(&params.threshold))
        return abs_mode->c;

    const double alpha = std::get<PercentileThreshold>(params.threshold).alpha;
    const auto n = static_cast<Count>(x.size());
    // k = ceil(alpha*n); nudge down one ulp first so an exact integer product
    // that rounded up in floating point does not overshoot.
    auto k = static_cast<Count>(std::ceil(std::nextafter(alpha * static_cast<double>(n), 0.0)));
    k = std::clamp<Count>(k, 1, n);

    std::vector<double> mag(x.size());
    std::transform(x.begin(), x.end(), mag.begin(), [](double v) { return std::fabs(v); });
    std::nth_element(mag.begin(), mag.begin() + (k - 1), mag.end());
    return mag[k - 1];
}

/// Step 1: the exceedance set S_c = {j : |x_j| > c}, ascending, 1-based.
/// Negative c is allowed (every position exceeds) but rarely useful.
inline std::vector<Position> threshold_positions(std::span<const double> x, double c) {
    std::vector<Position> out;
    for (std::size_t j = 0; j < x.size(); ++j)
        if (std::fabs(x[j]) > c) out.push_back(static_cast<Position>(j) + 1);
    return out;
}

/// Step 2: gap completion.  Consecutive exceedances stay in one segment
/// when the run of non-exceedance positions between them has length <= d,
/// i.e. when their difference is <= d+1.  Each output segment spans from
/// the first to the last exceedance of its cluster, so consecutive output
/// segments are separated by at least d+2 positions.
inline std::vector<Segment> complete(std::span<const Position> positions, Count gap_tolerance) {
    if (gap_tolerance < 0) throw std::invalid_argument("gap tolerance d must be >= 0");
    std::vector<Segment> segments;
    if (positions.empty()) return segments;

    Position first = positions[0];
    Position last = positions[0];
    for (std::size_t i = 1; i < positions.size(); ++i) {
        const Position p = positions[i];
        if (p <= last) throw std::invalid_argument("exceedance positions must be strictly ascending");
        if (p - last <= gap_tolerance + 1) {
            last = p;
        } else {
            segments.push_back({first, last});
            first = last = p;
        }
    }
    segments.push_back({first, last});
    return segments;
}

/// Step 3: drop segments of length <= h.
inline std::vector<Segment> cleanup(std::vector<Segment> segments, Count min_length) {
    if (min_length < 0) throw std::invalid_argument("minimum length h must be >= 0");
    std::erase_if(segments, [min_length](const Segment& s) { return s.length() <= min_length; });
    return segments;
}

/// Full pipeline: resolve threshold, collect exceedances, fill small gaps,
/// drop short segments, then annotate each survivor with its exceedance
/// count and sample mean.  One threshold pass plus work linear in the
/// number of exceedances; total element visits stay linear in n.
inline DetectionResult detect(std::span<const double> x, const DetectionParams& params) {
    const double c = resolve_threshold(x, params);
    const std::vector<Position> positions = threshold_positions(x, c);
    std::vector<Segment> segments = cleanup(complete(positions, params.gap_tolerance), params.min_length);

    DetectionResult result;
    result.resolved_threshold = c;
    result.exceed_total = static_cast<Count>(positions.size());
    result.n = static_cast<Count>(x.size());
    result.segments.reserve(segments.size());
    for (const Segment& seg : segments) {
        auto lo = std::lower_bound(positions.begin(), positions.end(), seg.start);
        auto hi = std::upper_bound(lo, positions.end(), seg.end);
        double sum = 0.0;
        for (Position j = seg.start; j <= seg.end; ++j) sum += x[static_cast<std::size_t>(j - 1)];
        result.segments.push_back({seg, static_cast<Count>(hi - lo),
                                   sum / static_cast<double>(seg.length()), std::nullopt});
    }
    return result;
}

}  // namespace shortseg
