#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "shortseg/detect.hpp"
#include "shortseg/evaluate.hpp"
#include "shortseg/inference.hpp"
#include "shortseg/segment.hpp"

namespace shortseg {

enum class NoiseFamily { gaussian, student_t3, ar1 };

/// Marginally standardized noise: N(0,1), Student t with 3 degrees of
/// freedom, or a stationary AR(1) chain with N(0,1) marginals.
struct NoiseSpec {
    NoiseFamily family = NoiseFamily::gaussian;
    double rho = 0.0;           // ar1 lag-1 autocorrelation, |rho| < 1
    double scale = 1.0;         // overall noise amplitude; 0 is the exact-signal test hook
    std::uint64_t seed = 0;

    void validate() const {
        if (family == NoiseFamily::ar1 && !(std::fabs(rho) < 1.0))
            throw std::invalid_argument("ar1 noise needs |rho| < 1");
        if (!(scale >= 0.0)) throw std::invalid_argument("noise scale must be >= 0");
    }
};

struct SignalSegment {
    Segment segment;
    double height = 0.0;  // constant mean shift on the segment, nonzero
};

/// Piecewise-constant mean: zero everywhere except on the listed segments.
struct SignalModel {
    Count n = 0;
    std::vector<SignalSegment> segments;

    void validate() const {
        if (n < 1) throw std::invalid_argument("signal model needs n >= 1");
        for (std::size_t k = 0; k < segments.size(); ++k) {
            const Segment& seg = segments[k].segment;
            validate_segment(seg);
            if (seg.end > n) throw std::invalid_argument("signal segment extends past n");
            if (segments[k].height == 0.0)
                throw std::invalid_argument("signal heights must be nonzero");
            if (k > 0 && seg.start <= segments[k - 1].segment.end + 1)
                throw std::invalid_argument(
                    "signal segments must be sorted with at least one position between them");
        }
    }
};

/// Deterministic per-replicate seed derived from a master seed (splitmix64).
inline std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// x_j = mu_j + eps_j.  Bit-reproducible for a fixed (model, noise, seed)
/// triple; the AR(1) chain starts from its stationary marginal so no burn-in
/// is needed.
inline std::vector<double> generate(const SignalModel& model, const NoiseSpec& noise) {
    model.validate();
    noise.validate();
    std::vector<double> x(static_cast<std::size_t>(model.n));
    std::mt19937_64 rng(noise.seed);
    switch (noise.family) {
        case NoiseFamily::gaussian: {
            std::normal_distribution<double> z;
            for (double& v : x) v = noise.scale * z(rng);
            break;
        }
        case NoiseFamily::student_t3: {
            std::student_t_distribution<double> t3(3.0);
            for (double& v : x) v = noise.scale * t3(rng);
            break;
        }
        case NoiseFamily::ar1: {
            std::normal_distribution<double> z;
            double innovation = std::sqrt(1.0 - noise.rho * noise.rho);
            double state = z(rng);
            x[0] = noise.scale * state;
            for (std::size_t j = 1; j < x.size(); ++j) {
                state = noise.rho * state + innovation * z(rng);
                x[j] = noise.scale * state;
            }
            break;
        }
    }
    for (const SignalSegment& seg : model.segments)
        for (Position j = seg.segment.start; j <= seg.segment.end; ++j)
            x[static_cast<std::size_t>(j - 1)] += seg.height;
    return x;
}

/// Pure-noise model: no signal segments at all.
inline SignalModel null_model(Count n) {
    if (n < 1) throw std::invalid_argument("signal model needs n >= 1");
    return SignalModel{n, {}};
}

/// Standard normal quantile.  Rational initial guess refined by Newton steps
/// against the erfc-based CDF; accurate to full double precision.
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile level must lie in (0,1)");
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    double x;
    if (p < p_low || p > 1.0 - p_low) {
        double q = std::sqrt(-2.0 * std::log(p < 0.5 ? p : 1.0 - p));
        // the rational fit produces the (negative) lower-tail quantile
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
        if (p > 0.5) x = -x;
    } else {
        double q = p - 0.5;
        double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    for (int step = 0; step < 3; ++step) {
        double err = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
        double density = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
        if (density <= 0.0) break;
        x -= err / density;
    }
    return x;
}

/// CDF of Student t with 3 degrees of freedom (closed form).
inline double student_t3_cdf(double x) {
    double u = x / std::numbers::sqrt3;
    return 0.5 + (std::atan(u) + u / (1.0 + u * u)) / std::numbers::pi;
}

/// Quantile of Student t with 3 degrees of freedom, by bisecting the closed
/// form CDF down to machine precision.
inline double student_t3_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile level must lie in (0,1)");
    if (p == 0.5) return 0.0;
    bool flip = p < 0.5;
    double q = flip ? 1.0 - p : p;
    double lo = 0.0;
    double hi = 1.0;
    while (student_t3_cdf(hi) < q) hi *= 2.0;
    for (int step = 0; step < 200 && hi - lo > 1e-16 * hi; ++step) {
        double mid = 0.5 * (lo + hi);
        (student_t3_cdf(mid) < q ? lo : hi) = mid;
    }
    double x = 0.5 * (lo + hi);
    return flip ? -x : x;
}

/// Quantile of the marginal noise distribution (AR(1) is marginally N(0,1)).
inline double marginal_quantile(NoiseFamily family, double p) {
    return family == NoiseFamily::student_t3 ? student_t3_quantile(p) : normal_quantile(p);
}

/// Signal strength: heights sit at the 99th (strong) or 97th (weak)
/// percentile of the marginal noise distribution.
enum class SignalLevel { strong, weak };

inline constexpr Count kLadderLengths[] = {8, 16, 24, 32, 40};

/// Five signal segments with lengths stepping 8..40, evenly spaced with equal
/// gaps, the first starting at position 1000 and roughly 1000 free positions
/// left at the tail.  All heights equal the chosen noise percentile.
inline SignalModel ladder_model(Count n, NoiseFamily family, SignalLevel level) {
    Count gap = (n - 2000 - 120) / 4;
    if (gap < 1) throw std::invalid_argument("sequence too short to place the ladder layout");
    double height = marginal_quantile(family, level == SignalLevel::strong ? 0.99 : 0.97);
    SignalModel model{n, {}};
    Position start = 1000;
    for (Count length : kLadderLengths) {
        model.segments.push_back({Segment{start, start + length - 1}, height});
        start += length + gap;
    }
    model.validate();
    return model;
}

struct ReplicationRow {
    std::optional<double> p_max;  // empty = no p-value filter
    double mean_tp = 0.0;
    double se_tp = 0.0;
    double mean_fp = 0.0;
    double se_fp = 0.0;
};

struct ReplicationReport {
    int reps = 0;
    std::vector<ReplicationRow> rows;  // unfiltered first, then one row per p level
};

/// Repeats generate -> detect -> annotate -> classify `reps` times with
/// split seeds and reports mean true/false positives (with standard errors)
/// for the unfiltered detector and for each p-value cutoff.
inline ReplicationReport run_replicated(const SignalModel& model, const NoiseSpec& noise,
                                        const DetectionParams& params,
                                        const std::vector<double>& p_levels, int reps) {
    if (reps < 1) throw std::invalid_argument("replication needs reps >= 1");
    model.validate();
    noise.validate();
    params.validate();

    std::vector<Segment> truth;
    truth.reserve(model.segments.size());
    for (const SignalSegment& seg : model.segments) truth.push_back(seg.segment);

    std::size_t levels = 1 + p_levels.size();
    std::vector<double> tp_sum(levels, 0.0), tp_sq(levels, 0.0);
    std::vector<double> fp_sum(levels, 0.0), fp_sq(levels, 0.0);

    std::vector<Segment> detected;
    for (int rep = 0; rep < reps; ++rep) {
        NoiseSpec rep_noise = noise;
        rep_noise.seed = split_seed(noise.seed, static_cast<std::uint64_t>(rep));
        DetectionResult result = annotate_p_values(detect(generate(model, rep_noise), params));
        for (std::size_t level = 0; level < levels; ++level) {
            detected.clear();
            for (const AnnotatedSegment& seg : result.segments)
                if (level == 0 || *seg.p_value <= p_levels[level - 1])
                    detected.push_back(seg.segment);
            ClassifyResult scores = classify(truth, detected);
            tp_sum[level] += static_cast<double>(scores.tp);
            tp_sq[level] += static_cast<double>(scores.tp * scores.tp);
            fp_sum[level] += static_cast<double>(scores.fp);
            fp_sq[level] += static_cast<double>(scores.fp * scores.fp);
        }
    }

    ReplicationReport report;
    report.reps = reps;
    double r = static_cast<double>(reps);
    for (std::size_t level = 0; level < levels; ++level) {
        ReplicationRow row;
        if (level > 0) row.p_max = p_levels[level - 1];
        row.mean_tp = tp_sum[level] / r;
        row.mean_fp = fp_sum[level] / r;
        if (reps > 1) {
            double var_tp = std::max(0.0, (tp_sq[level] - r * row.mean_tp * row.mean_tp) / (r - 1.0));
            double var_fp = std::max(0.0, (fp_sq[level] - r * row.mean_fp * row.mean_fp) / (r - 1.0));
            row.se_tp = std::sqrt(var_tp / r);
            row.se_fp = std::sqrt(var_fp / r);
        }
        report.rows.push_back(row);
    }
    return report;
}

}  // namespace shortseg
