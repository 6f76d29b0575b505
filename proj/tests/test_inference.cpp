#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "shortseg/detect.hpp"
#include "shortseg/inference.hpp"
#include "shortseg/oracle.hpp"

using namespace shortseg;

namespace {

struct TailCase {
    Count N, K, draws, t_min;
    double expected;  // nearest double to the exact rational tail
};

// Exact rational reference values (computed with arbitrary-precision integer
// arithmetic offline, rounded once to double). Spans tiny, skewed, and
// near-degenerate corners of the parameter space.
constexpr TailCase kTailCases[] = {
    {37, 2, 1, 1, 0.05405405405405406},
    {37, 2, 5, 3, 0.0},
    {37, 3, 1, 1, 0.08108108108108109},
    {37, 3, 5, 4, 0.0},
    {37, 12, 1, 1, 0.32432432432432434},
    {37, 12, 5, 5, 0.0018169429934135816},
    {37, 12, 18, 12, 1.002114461513794e-05},
    {37, 36, 5, 1, 1.0},
    {37, 36, 18, 1, 1.0},
    {100, 2, 1, 1, 0.02},
    {100, 2, 5, 3, 0.0},
    {100, 2, 50, 1, 0.7525252525252525},
    {100, 10, 1, 2, 0.0},
    {100, 10, 5, 6, 0.0},
    {100, 10, 14, 11, 0.0},
    {100, 10, 50, 11, 0.0},
    {100, 33, 5, 2, 0.5357598709586927},
    {100, 33, 14, 7, 0.12569927501863049},
    {100, 33, 50, 16, 0.6645289664430849},
    {100, 99, 1, 2, 0.0},
    {100, 99, 5, 6, 0.0},
    {100, 99, 14, 15, 0.0},
    {100, 99, 50, 51, 0.0},
    {341, 2, 5, 2, 0.00017250301880282904},
    {341, 2, 48, 3, 0.0},
    {341, 34, 1, 1, 0.09970674486803519},
    {341, 34, 5, 5, 7.458408882094831e-06},
    {341, 34, 48, 34, 6.0111090690593535e-36},
    {341, 34, 170, 34, 8.372760484099483e-12},
    {341, 113, 5, 1, 0.8683199191864565},
    {341, 113, 48, 1, 0.9999999993669667},
    {341, 113, 170, 1, 1.0},
    {341, 340, 1, 1, 0.9970674486803519},
    {341, 340, 5, 5, 0.9853372434017595},
    {341, 340, 48, 48, 0.8592375366568915},
    {341, 340, 170, 170, 0.501466275659824},
    {999, 2, 5, 1, 0.00998994986970939},
    {999, 2, 142, 2, 0.020082206454951946},
    {999, 2, 499, 3, 0.0},
    {999, 99, 5, 2, 0.07971042182988658},
    {999, 99, 142, 49, 2.310545105613198e-19},
    {999, 99, 499, 49, 0.5796974874881724},
    {999, 333, 1, 2, 0.0},
    {999, 333, 5, 6, 0.0},
    {999, 333, 142, 143, 0.0},
    {999, 333, 499, 334, 0.0},
    {999, 998, 5, 2, 1.0},
    {999, 998, 142, 71, 1.0},
    {999, 998, 499, 249, 1.0},
};

}  // namespace

TEST_CASE("hypergeometric tail against exact rational references") {
    for (const TailCase& tc : kTailCases) {
        CAPTURE(tc.N, tc.K, tc.draws, tc.t_min);
        double got = hypergeometric_tail(tc.N, tc.K, tc.draws, tc.t_min);
        if (tc.expected == 0.0) {
            REQUIRE(got == 0.0);  // outside the support: must be exact
        } else {
            REQUIRE_THAT(got, Catch::Matchers::WithinRel(tc.expected, 1e-10));
        }
    }
}

TEST_CASE("hypergeometric tail support shortcuts are exact") {
    // t_min at or below the support minimum: certainty
    REQUIRE(hypergeometric_tail(999, 998, 142, 71) == 1.0);
    REQUIRE(hypergeometric_tail(999, 998, 499, 249) == 1.0);
    REQUIRE(hypergeometric_tail(37, 36, 5, 1) == 1.0);
    REQUIRE(hypergeometric_tail(10, 4, 3, 0) == 1.0);
    // t_min above the support maximum: impossible
    REQUIRE(hypergeometric_tail(10, 4, 3, 4) == 0.0);
    REQUIRE(hypergeometric_tail(10, 4, 3, 5) == 0.0);
    REQUIRE(hypergeometric_tail(100, 10, 50, 11) == 0.0);
}

TEST_CASE("hypergeometric tail small hand-checked values") {
    // N=5, K=2, draws=2: P(Y>=1) = 1 - C(3,2)/C(5,2) = 7/10, P(Y>=2) = 1/10
    REQUIRE_THAT(hypergeometric_tail(5, 2, 2, 1), Catch::Matchers::WithinRel(0.7, 1e-14));
    REQUIRE_THAT(hypergeometric_tail(5, 2, 2, 2), Catch::Matchers::WithinRel(0.1, 1e-14));
    // N=6, K=3, draws=3: P(Y>=2) = (C(3,2)C(3,1)+C(3,3))/C(6,3) = 10/20
    REQUIRE_THAT(hypergeometric_tail(6, 3, 3, 2), Catch::Matchers::WithinRel(0.5, 1e-14));
}

TEST_CASE("hypergeometric tail monotonicity") {
    for (Count t = 0; t <= 30; ++t) {
        REQUIRE(hypergeometric_tail(200, 30, 80, t) >=
                hypergeometric_tail(200, 30, 80, t + 1));
    }
    for (Count draws = 1; draws < 150; ++draws) {
        REQUIRE(hypergeometric_tail(200, 30, draws + 1, 5) >=
                hypergeometric_tail(200, 30, draws, 5) - 1e-15);
    }
    for (Count K = 5; K < 150; ++K) {
        REQUIRE(hypergeometric_tail(200, K + 1, 80, 5) >=
                hypergeometric_tail(200, K, 80, 5) - 1e-15);
    }
}

TEST_CASE("significance bound frozen reference values") {
    // tail building block of the headline configuration
    REQUIRE_THAT(hypergeometric_tail(9999, 499, 4, 4),
                 Catch::Matchers::WithinRel(6.132002358864624e-06, 1e-10));
    // a run of five exceedances in a window of five, n = 10^4, m = 500
    REQUIRE_THAT(p_value_upper_bound({10000, 500, 5, 5}),
                 Catch::Matchers::WithinRel(0.0030660011794323124, 1e-10));
}

TEST_CASE("significance bound structure") {
    SECTION("impossible patterns get probability zero") {
        REQUIRE(p_value_upper_bound({100, 0, 5, 1}) == 0.0);
        REQUIRE(p_value_upper_bound({100, 3, 5, 4}) == 0.0);
    }
    SECTION("a single exceedance is never significant") {
        // t=1 conditions on nothing: the bound saturates at 1
        for (Count m : {1, 5, 100}) REQUIRE(p_value_upper_bound({1000, m, 7, 1}) == 1.0);
    }
    SECTION("monotone in the window count") {
        double prev = 2.0;
        for (Count t = 1; t <= 12; ++t) {
            double p = p_value_upper_bound({10000, 500, 12, t});
            REQUIRE(p <= prev);
            prev = p;
        }
    }
    SECTION("longer windows with the same count are less surprising") {
        for (Count s = 5; s < 40; ++s) {
            REQUIRE(p_value_upper_bound({10000, 500, s + 1, 5}) >=
                    p_value_upper_bound({10000, 500, s, 5}) - 1e-15);
        }
    }
    SECTION("never exceeds one") {
        REQUIRE(p_value_upper_bound({50, 40, 3, 1}) == 1.0);
        REQUIRE(p_value_upper_bound({50, 40, 3, 2}) <= 1.0);
    }
    SECTION("parameter validation") {
        REQUIRE_THROWS_AS(p_value_upper_bound({0, 0, 1, 1}), std::invalid_argument);
        REQUIRE_THROWS_AS(p_value_upper_bound({10, 3, 11, 1}), std::invalid_argument);
        REQUIRE_THROWS_AS(p_value_upper_bound({10, 3, 5, 0}), std::invalid_argument);
        REQUIRE_THROWS_AS(p_value_upper_bound({10, 3, 5, 6}), std::invalid_argument);
        REQUIRE_THROWS_AS(p_value_upper_bound({10, -1, 5, 2}), std::invalid_argument);
        REQUIRE_THROWS_AS(p_value_upper_bound({10, 11, 5, 2}), std::invalid_argument);
    }
}

TEST_CASE("significance bound dominates the exact pattern probability") {
    // The bound must sit above the true probability that any s-window holds
    // >= t marks, for every configuration small enough to enumerate.
    for (Count n = 2; n <= 12; ++n) {
        for (Count m = 1; m <= n; ++m) {
            for (Count s = 1; s <= n; ++s) {
                for (Count t = 1; t <= s; ++t) {
                    BallConfiguration cfg{n, m, s, t};
                    double exact = oracle::exact_pattern_probability(cfg);
                    double bound = p_value_upper_bound(cfg);
                    CAPTURE(n, m, s, t, exact, bound);
                    REQUIRE(bound >= exact - 1e-12);
                }
            }
        }
    }
}

TEST_CASE("segment annotation and filtering") {
    // two clear segments with a known global exceedance count
    std::vector<double> x(200, 0.0);
    for (int j = 40; j <= 47; ++j) x[static_cast<std::size_t>(j - 1)] = 5.0;
    for (int j = 120; j <= 122; ++j) x[static_cast<std::size_t>(j - 1)] = 5.0;
    x[0] = 5.0;  // isolated exceedance, dropped by cleanup

    auto result = annotate_p_values(detect(x, {AbsoluteThreshold{1.0}, 3, 2}));
    REQUIRE(result.segments.size() == 2);
    REQUIRE(result.exceed_total == 12);

    for (const AnnotatedSegment& seg : result.segments) {
        REQUIRE(seg.p_value.has_value());
        double expect = p_value_upper_bound(
            {result.n, result.exceed_total, seg.segment.length(), seg.exceed_count});
        REQUIRE(*seg.p_value == expect);
        REQUIRE(*seg.p_value > 0.0);
        REQUIRE(*seg.p_value <= 1.0);
    }

    SECTION("filter keeps exactly the sufficiently small p-values") {
        double p0 = *result.segments[0].p_value;
        double p1 = *result.segments[1].p_value;
        REQUIRE(p0 < p1);  // the 8-run is rarer than the 3-run

        auto kept = filter_by_p(result, p0);
        REQUIRE(kept.segments.size() == 1);  // boundary value survives
        REQUIRE(kept.segments[0].segment == result.segments[0].segment);

        auto all = filter_by_p(result, 1.0);
        REQUIRE(all.segments.size() == 2);

        auto none = filter_by_p(result, std::nextafter(p0, 0.0));
        REQUIRE(none.segments.empty());
    }

    SECTION("filter validates its inputs") {
        REQUIRE_THROWS_AS(filter_by_p(result, 0.0), std::invalid_argument);
        REQUIRE_THROWS_AS(filter_by_p(result, 1.5), std::invalid_argument);
        auto raw = detect(x, {AbsoluteThreshold{1.0}, 3, 2});
        REQUIRE_THROWS_AS(filter_by_p(raw, 0.5), std::invalid_argument);
    }
}
