// Command-line front end: detection on sequence files plus the simulation,
// tuning, bound-evaluation, scoring and benchmarking drivers.
//
// Exit codes: 0 success, 1 I/O failure, 2 usage or parse failure.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "shortseg/bounds.hpp"
#include "shortseg/detect.hpp"
#include "shortseg/evaluate.hpp"
#include "shortseg/inference.hpp"
#include "shortseg/io.hpp"
#include "shortseg/oracle.hpp"
#include "shortseg/simulate.hpp"
#include "shortseg/tune.hpp"

namespace {

using namespace shortseg;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// detect

struct DetectOptions {
    std::string input;
    std::string out = "-";
    SequenceFormat format = SequenceFormat::auto_detect;
    double threshold = 0.0;
    bool threshold_set = false;
    double percentile = 0.95;
    Count gap = 9;
    Count min_len = 3;
    double p_max = 0.0;
    bool p_max_set = false;
    bool center_median = false;
    bool bed = false;
};

void center_by_median(std::vector<double>& x) {
    std::vector<double> copy(x);
    auto mid = copy.begin() + static_cast<std::ptrdiff_t>(copy.size() / 2);
    std::nth_element(copy.begin(), mid, copy.end());
    double median = *mid;
    if (copy.size() % 2 == 0)
        median = 0.5 * (median + *std::max_element(copy.begin(), mid));
    for (double& v : x) v -= median;
}

unsigned worker_count(std::size_t jobs) {
    unsigned threads = std::thread::hardware_concurrency();
    if (const char* env = std::getenv("SHORTSEG_THREADS")) {
        char* end = nullptr;
        long parsed = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || parsed < 1)
            throw std::invalid_argument("SHORTSEG_THREADS must be a positive integer");
        threads = static_cast<unsigned>(parsed);
    }
    if (threads == 0) threads = 1;
    return static_cast<unsigned>(std::min<std::size_t>(threads, jobs));
}

int run_detect(const DetectOptions& opt) {
    auto t0 = std::chrono::steady_clock::now();

    DetectionParams params;
    params.gap_tolerance = opt.gap;
    params.min_length = opt.min_len;
    if (opt.threshold_set)
        params.threshold = AbsoluteThreshold{opt.threshold};
    else
        params.threshold = PercentileThreshold{opt.percentile};
    params.validate();
    if (opt.p_max_set && !(opt.p_max > 0.0 && opt.p_max <= 1.0))
        throw std::invalid_argument("--p-max must lie in (0,1]");

    SequenceSet set = read_sequences(opt.input, opt.format);
    std::size_t nseq = set.ids.size();

    std::vector<std::vector<SegmentRecord>> per_seq(nseq);
    auto process = [&](std::size_t k) {
        std::vector<double>& x = set.values[k];
        if (opt.center_median) center_by_median(x);
        DetectionResult result = annotate_p_values(detect(x, params));
        if (opt.p_max_set) result = filter_by_p(result, opt.p_max);
        per_seq[k].reserve(result.segments.size());
        for (const AnnotatedSegment& seg : result.segments)
            per_seq[k].push_back({set.ids[k], seg.segment.start, seg.segment.end,
                                  seg.segment.length(), seg.exceed_count, seg.mean, seg.p_value});
    };

    unsigned threads = worker_count(nseq);
    if (threads <= 1) {
        for (std::size_t k = 0; k < nseq; ++k) process(k);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_lock;
        auto worker = [&] {
            try {
                for (std::size_t k = next.fetch_add(1); k < nseq; k = next.fetch_add(1))
                    process(k);
            } catch (...) {
                std::lock_guard<std::mutex> hold(failure_lock);
                if (!failure) failure = std::current_exception();
            }
        };
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
        if (failure) std::rethrow_exception(failure);
    }

    std::vector<SegmentRecord> rows;
    std::size_t total = 0;
    for (const auto& chunk : per_seq) total += chunk.size();
    rows.reserve(total);
    for (auto& chunk : per_seq)
        for (SegmentRecord& r : chunk) rows.push_back(std::move(r));

    write_text(opt.out, opt.bed ? serialize_segment_records_bed(rows)
                                : serialize_segment_records(rows));
    std::fprintf(stderr, "sequences=%zu segments=%zu elapsed=%.3fs\n", nseq, rows.size(),
                 seconds_since(t0));
    return 0;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOptions {
    std::string model = "null";
    NoiseFamily family = NoiseFamily::gaussian;
    double rho = 0.2;
    SignalLevel level = SignalLevel::strong;
    Count n = 10000;
    int reps = 1;
    std::uint64_t seed = 0;
    SequenceFormat format = SequenceFormat::long_tsv;
    int digits = -1;
    std::string out = "-";
    std::string truth_out;
};

int run_simulate(const SimulateOptions& opt) {
    SignalModel model = opt.model == "ladder" ? ladder_model(opt.n, opt.family, opt.level)
                                              : null_model(opt.n);
    if (opt.reps < 1) throw std::invalid_argument("--reps must be >= 1");
    if (opt.format == SequenceFormat::plain && opt.reps != 1)
        throw std::invalid_argument("plain format holds exactly one sequence; use --reps 1");

    SequenceSet set;
    std::vector<TruthRecord> truth;
    for (int rep = 0; rep < opt.reps; ++rep) {
        NoiseSpec noise{opt.family, opt.family == NoiseFamily::ar1 ? opt.rho : 0.0, 1.0,
                        split_seed(opt.seed, static_cast<std::uint64_t>(rep))};
        std::string id = "seq" + std::to_string(rep + 1);
        set.ids.push_back(id);
        set.values.push_back(generate(model, noise));
        for (const SignalSegment& seg : model.segments)
            truth.push_back({id, seg.segment.start, seg.segment.end, seg.height});
    }
    write_sequences(opt.out, set, opt.format, opt.digits);
    if (!opt.truth_out.empty()) write_text(opt.truth_out, serialize_truth_records(truth));
    std::fprintf(stderr, "sequences=%d n=%lld segments_per_sequence=%zu\n", opt.reps,
                 static_cast<long long>(opt.n), model.segments.size());
    return 0;
}

// ---------------------------------------------------------------------------
// tune

struct TuneOptions {
    std::vector<Count> n_grid;
    std::vector<std::string> patterns = {"5:5"};
    std::vector<double> p_levels = {0.05};
    std::string out = "-";
};

int run_tune(const TuneOptions& opt) {
    std::vector<std::pair<Count, Count>> patterns;
    for (const std::string& text : opt.patterns) {
        std::size_t colon = text.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("--pattern expects s:t, e.g. 5:5");
        patterns.emplace_back(std::stoll(text.substr(0, colon)),
                              std::stoll(text.substr(colon + 1)));
    }
    std::vector<TuningRow> rows = tuning_table(opt.n_grid, patterns, opt.p_levels);
    std::string out = "n,s,t,p,m,alpha\n";
    for (const TuningRow& row : rows) {
        append_integer(out, row.n);
        out.push_back(',');
        append_integer(out, row.s);
        out.push_back(',');
        append_integer(out, row.t);
        out.push_back(',');
        append_double(out, row.p);
        out.push_back(',');
        if (row.m) append_integer(out, *row.m);
        out.push_back(',');
        if (row.alpha) append_double(out, *row.alpha);
        out.push_back('\n');
    }
    write_text(opt.out, out);
    return 0;
}

// ---------------------------------------------------------------------------
// bounds

struct BoundsOptions {
    Count d = 9;
    Count length = 8;
    Count separation = 100;
    double beta = 0.975;
    Count segments = 5;
    Count shortest = 8;
    Count longest = 40;
    Count min_gap = 1970;
    Count n = 10000;
    Count m = 500;
    std::string out = "-";
};

int run_bounds(const BoundsOptions& opt) {
    SignalGeometry geometry{opt.segments, opt.shortest, opt.longest, opt.min_gap, opt.beta};
    std::string out = "bound\tvalue\tvacuous\n";
    auto emit = [&out](const char* name, BoundValue b) {
        out.append(name);
        out.push_back('\t');
        append_double(out, b.value);
        out.push_back('\t');
        out.push_back(b.vacuous ? '1' : '0');
        out.push_back('\n');
    };
    emit("segment_intact", segment_intact_bound(opt.length, opt.d));
    emit("gap_separation", gap_separation_bound(opt.separation, opt.d, opt.beta));
    emit("identification", identification_bound(geometry, opt.d));
    emit("null_segment_count", null_segment_count_bound(opt.n, opt.m, opt.d));
    write_text(opt.out, out);
    return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalOptions {
    std::string truth;
    std::string detected;
    std::string out = "-";
};

// groups rows by sequence id, keeping first-appearance order
template <typename Row>
std::vector<std::pair<std::string, std::vector<Segment>>> group_by_id(const std::vector<Row>& rows) {
    std::vector<std::pair<std::string, std::vector<Segment>>> groups;
    for (const Row& r : rows) {
        auto found = std::find_if(groups.begin(), groups.end(),
                                  [&](const auto& g) { return g.first == r.sequence_id; });
        if (found == groups.end()) {
            groups.emplace_back(r.sequence_id, std::vector<Segment>{});
            found = groups.end() - 1;
        }
        found->second.push_back({r.start, r.end});
    }
    for (auto& [id, segs] : groups) std::sort(segs.begin(), segs.end());
    return groups;
}

int run_eval(const EvalOptions& opt) {
    auto truth_groups = group_by_id(read_truth_records(opt.truth));
    auto detected_groups = group_by_id(read_segment_records(opt.detected));

    auto truth_for = [&](const std::string& id) -> std::span<const Segment> {
        for (const auto& [gid, segs] : truth_groups)
            if (gid == id) return segs;
        return {};
    };

    std::string out = "sequence_id\tstart\tend\tlabel\n";
    Count tp = 0, fp = 0, identified = 0, truth_total = 0, detected_total = 0;
    for (const auto& [id, segs] : detected_groups) {
        ClassifyResult scores = classify(truth_for(id), segs);
        tp += scores.tp;
        fp += scores.fp;
        identified += scores.identified;
        detected_total += static_cast<Count>(segs.size());
        for (std::size_t k = 0; k < segs.size(); ++k) {
            out.append(id);
            out.push_back('\t');
            append_integer(out, segs[k].start);
            out.push_back('\t');
            append_integer(out, segs[k].end);
            out.push_back('\t');
            out.append(scores.labels[k] == SegmentLabel::true_positive ? "tp" : "fp");
            out.push_back('\n');
        }
    }
    for (const auto& [id, segs] : truth_groups) truth_total += static_cast<Count>(segs.size());

    write_text(opt.out, out);
    std::fprintf(stderr, "truth=%lld detected=%lld tp=%lld fp=%lld identified=%lld\n",
                 static_cast<long long>(truth_total), static_cast<long long>(detected_total),
                 static_cast<long long>(tp), static_cast<long long>(fp),
                 static_cast<long long>(identified));
    return 0;
}

// ---------------------------------------------------------------------------
// bench

struct BenchOptions {
    std::vector<Count> sizes = {1000000, 10000000};
    int reps = 3;
    std::uint64_t seed = 1;
    double percentile = 0.95;
    Count gap = 9;
    Count min_len = 3;
    std::string out = "-";
};

int run_bench(const BenchOptions& opt) {
    if (opt.reps < 1) throw std::invalid_argument("--reps must be >= 1");
    DetectionParams params{PercentileThreshold{opt.percentile}, opt.gap, opt.min_len};
    params.validate();

    nlohmann::json report;
    report["reps"] = opt.reps;
    report["results"] = nlohmann::json::array();
    for (Count n : opt.sizes) {
        NoiseSpec noise{NoiseFamily::gaussian, 0.0, 1.0, opt.seed};
        std::vector<double> x = generate(null_model(n), noise);
        std::vector<double> times;
        Count m = 0;
        std::size_t segments = 0;
        for (int rep = 0; rep < opt.reps; ++rep) {
            auto t0 = std::chrono::steady_clock::now();
            DetectionResult result = annotate_p_values(detect(x, params));
            times.push_back(seconds_since(t0));
            m = result.exceed_total;
            segments = result.segments.size();
        }
        std::sort(times.begin(), times.end());
        double median = times[times.size() / 2];
        report["results"].push_back({{"n", n},
                                     {"m", m},
                                     {"segments", segments},
                                     {"seconds", median},
                                     {"points_per_sec", static_cast<double>(n) / median}});
    }
    write_text(opt.out, report.dump(2) + "\n");
    return 0;
}

// ---------------------------------------------------------------------------
// oracle (hidden): brute-force pattern probability, for cross-checks

struct OracleOptions {
    Count n = 10;
    Count m = 3;
    Count s = 3;
    Count t = 3;
    std::uint64_t mc = 0;
    std::uint64_t seed = 1;
};

int run_oracle(const OracleOptions& opt) {
    BallConfiguration cfg{opt.n, opt.m, opt.s, opt.t};
    std::string out;
    if (opt.mc > 0) {
        auto est = oracle::monte_carlo_pattern_probability(cfg, opt.mc, opt.seed);
        out += "estimate\t";
        append_double(out, est.estimate);
        out += "\nstd_error\t";
        append_double(out, est.std_error);
        out.push_back('\n');
    } else {
        out += "probability\t";
        append_double(out, oracle::exact_pattern_probability(cfg));
        out.push_back('\n');
    }
    out += "upper_bound\t";
    append_double(out, p_value_upper_bound(cfg));
    out.push_back('\n');
    write_text("-", out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"short-segment detection toolkit"};
    app.require_subcommand(1);

    const std::map<std::string, SequenceFormat> format_names{{"auto", SequenceFormat::auto_detect},
                                                             {"plain", SequenceFormat::plain},
                                                             {"long", SequenceFormat::long_tsv},
                                                             {"wide", SequenceFormat::wide_tsv}};
    const std::map<std::string, NoiseFamily> family_names{{"gaussian", NoiseFamily::gaussian},
                                                          {"t3", NoiseFamily::student_t3},
                                                          {"ar1", NoiseFamily::ar1}};
    const std::map<std::string, SignalLevel> level_names{{"strong", SignalLevel::strong},
                                                         {"weak", SignalLevel::weak}};

    DetectOptions det;
    auto* cmd_detect = app.add_subcommand("detect", "detect segments in a sequence file");
    cmd_detect->add_option("input", det.input, "sequence file (plain, long or wide TSV)")
        ->required();
    cmd_detect->add_option("--format", det.format, "input layout")
        ->transform(CLI::CheckedTransformer(format_names, CLI::ignore_case));
    auto* opt_threshold =
        cmd_detect->add_option("--threshold", det.threshold, "absolute threshold c");
    auto* opt_percentile = cmd_detect->add_option(
        "--percentile", det.percentile, "threshold at this percentile of |x| (default 0.95)");
    opt_threshold->excludes(opt_percentile);
    opt_percentile->excludes(opt_threshold);
    cmd_detect->add_option("--gap", det.gap, "gap tolerance d (default 9)");
    cmd_detect->add_option("--min-len", det.min_len, "discard segments of length <= this (default 3)");
    auto* opt_pmax = cmd_detect->add_option("--p-max", det.p_max, "keep segments with p-value <= this");
    cmd_detect->add_flag("--center", det.center_median, "subtract the per-sequence median first");
    cmd_detect->add_flag("--bed", det.bed, "emit 3-column BED (0-based half-open) instead of TSV");
    cmd_detect->add_option("--out", det.out, "output path ('-' = stdout)");

    SimulateOptions sim;
    auto* cmd_simulate = app.add_subcommand("simulate", "write synthetic sequences");
    cmd_simulate->add_option("--model", sim.model, "null | ladder")
        ->check(CLI::IsMember({"null", "ladder"}));
    cmd_simulate->add_option("--family", sim.family, "noise family: gaussian | t3 | ar1")
        ->transform(CLI::CheckedTransformer(family_names, CLI::ignore_case));
    cmd_simulate->add_option("--rho", sim.rho, "ar1 lag-1 autocorrelation (default 0.2)");
    cmd_simulate->add_option("--level", sim.level, "ladder heights: strong (99th pct) | weak (97th)")
        ->transform(CLI::CheckedTransformer(level_names, CLI::ignore_case));
    cmd_simulate->add_option("--n", sim.n, "sequence length")->required();
    cmd_simulate->add_option("--reps", sim.reps, "number of sequences (default 1)");
    cmd_simulate->add_option("--seed", sim.seed, "master seed");
    cmd_simulate->add_option("--out-format", sim.format, "plain | long | wide (default long)")
        ->transform(CLI::CheckedTransformer(format_names, CLI::ignore_case));
    cmd_simulate->add_option("--digits", sim.digits,
                             "fixed decimal places (default: shortest round-trip)");
    cmd_simulate->add_option("--out", sim.out, "sequence output path ('-' = stdout)");
    cmd_simulate->add_option("--truth", sim.truth_out, "also write ground-truth segments here");

    TuneOptions tune;
    auto* cmd_tune = app.add_subcommand("tune", "select threshold percentiles for target patterns");
    cmd_tune->add_option("--n", tune.n_grid, "sequence lengths")->required()->delimiter(',');
    cmd_tune->add_option("--pattern", tune.patterns, "target pattern s:t (repeatable)")
        ->delimiter(',');
    cmd_tune->add_option("--p", tune.p_levels, "significance levels")->delimiter(',');
    cmd_tune->add_option("--out", tune.out, "CSV output path ('-' = stdout)");

    BoundsOptions bnd;
    auto* cmd_bounds = app.add_subcommand("bounds", "evaluate the analytic guarantees");
    cmd_bounds->add_option("--d", bnd.d, "gap tolerance (default 9)");
    cmd_bounds->add_option("--length", bnd.length, "segment length for the intact bound");
    cmd_bounds->add_option("--separation", bnd.separation, "gap length for the separation bound");
    cmd_bounds->add_option("--beta", bnd.beta, "noise-CDF level of the weakest height");
    cmd_bounds->add_option("--segments", bnd.segments, "segment count of the geometry");
    cmd_bounds->add_option("--shortest", bnd.shortest, "shortest segment of the geometry");
    cmd_bounds->add_option("--longest", bnd.longest, "longest segment of the geometry");
    cmd_bounds->add_option("--min-gap", bnd.min_gap, "smallest separation of the geometry");
    cmd_bounds->add_option("--n", bnd.n, "sequence length for the null count bound");
    cmd_bounds->add_option("--m", bnd.m, "exceedance count for the null count bound");
    cmd_bounds->add_option("--out", bnd.out, "output path ('-' = stdout)");

    EvalOptions ev;
    auto* cmd_eval = app.add_subcommand("eval", "score detections against ground truth");
    cmd_eval->add_option("--truth", ev.truth, "ground-truth table")->required();
    cmd_eval->add_option("--detected", ev.detected, "detection table (detect output)")->required();
    cmd_eval->add_option("--out", ev.out, "label output path ('-' = stdout)");

    BenchOptions bench;
    auto* cmd_bench = app.add_subcommand("bench", "time detection on synthetic sequences");
    cmd_bench->add_option("--n", bench.sizes, "sequence lengths to time")->delimiter(',');
    cmd_bench->add_option("--reps", bench.reps, "repetitions per length, median reported");
    cmd_bench->add_option("--seed", bench.seed, "generation seed");
    cmd_bench->add_option("--percentile", bench.percentile, "threshold percentile");
    cmd_bench->add_option("--gap", bench.gap, "gap tolerance");
    cmd_bench->add_option("--min-len", bench.min_len, "minimum segment length");
    cmd_bench->add_option("--out", bench.out, "JSON output path ('-' = stdout)");

    OracleOptions orc;
    auto* cmd_oracle = app.add_subcommand("oracle", "brute-force pattern probability");
    cmd_oracle->group("");  // hidden: cross-check tool, not part of the supported surface
    cmd_oracle->add_option("--n", orc.n)->required();
    cmd_oracle->add_option("--m", orc.m)->required();
    cmd_oracle->add_option("--s", orc.s)->required();
    cmd_oracle->add_option("--t", orc.t)->required();
    cmd_oracle->add_option("--mc", orc.mc, "Monte Carlo replicates (0 = exact enumeration)");
    cmd_oracle->add_option("--seed", orc.seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    det.threshold_set = opt_threshold->count() > 0;
    det.p_max_set = opt_pmax->count() > 0;

    try {
        if (cmd_detect->parsed()) return run_detect(det);
        if (cmd_simulate->parsed()) return run_simulate(sim);
        if (cmd_tune->parsed()) return run_tune(tune);
        if (cmd_bounds->parsed()) return run_bounds(bnd);
        if (cmd_eval->parsed()) return run_eval(ev);
        if (cmd_bench->parsed()) return run_bench(bench);
        if (cmd_oracle->parsed()) return run_oracle(orc);
    } catch (const ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
