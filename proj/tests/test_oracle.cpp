#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "shortseg/oracle.hpp"

using namespace shortseg;
using oracle::MonteCarloEstimate;

namespace {

// Independent re-derivation of the exact pattern probability: walk every
// n-bit mask with popcount m and scan each window of length s directly.
// Slower and structured differently from the enumeration under test.
double bitmask_pattern_probability(Count n, Count m, Count s, Count t) {
    std::uint64_t total = 0, hits = 0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (std::popcount(mask) != static_cast<int>(m)) continue;
        ++total;
        bool dense = (t == 0);
        for (Count start = 1; !dense && start + s - 1 <= n; ++start) {
            int in_window = 0;
            for (Count j = start; j < start + s; ++j)
                if (mask & (1u << (j - 1))) ++in_window;
            if (in_window >= t) dense = true;
        }
        if (dense) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace

TEST_CASE("dense window predicate") {
    std::vector<Position> marks{4, 5, 7, 9, 10, 17, 19};
    REQUIRE(oracle::has_dense_window(marks, 7, 5));   // positions 4..10
    REQUIRE_FALSE(oracle::has_dense_window(marks, 6, 5));
    REQUIRE(oracle::has_dense_window(marks, 3, 2));   // 4,5 fit in any window >= 2
    REQUIRE(oracle::has_dense_window(marks, 2, 2));
    REQUIRE_FALSE(oracle::has_dense_window(marks, 1, 2));
    REQUIRE(oracle::has_dense_window(marks, 1, 1));
    REQUIRE_FALSE(oracle::has_dense_window(marks, 100, 8));  // only 7 marks exist
    REQUIRE(oracle::has_dense_window(marks, 5, 0));          // vacuous
    REQUIRE(oracle::has_dense_window(std::vector<Position>{}, 5, 0));
    REQUIRE_FALSE(oracle::has_dense_window(std::vector<Position>{}, 5, 1));
}

TEST_CASE("combination counting") {
    REQUIRE(oracle::combination_count_capped(10, 3, 1000) == 120);
    REQUIRE(oracle::combination_count_capped(10, 0, 1000) == 1);
    REQUIRE(oracle::combination_count_capped(10, 10, 1000) == 1);
    REQUIRE(oracle::combination_count_capped(10, 11, 1000) == 0);
    REQUIRE(oracle::combination_count_capped(10, -1, 1000) == 0);
    REQUIRE(oracle::combination_count_capped(52, 26, 1000) == 1001);  // saturates at cap+1
    REQUIRE(oracle::combination_count_capped(16, 8, 20000) == 12870);
}

TEST_CASE("combination enumeration is lexicographic and complete") {
    std::vector<std::vector<Position>> seen;
    oracle::for_each_combination(5, 3, [&](std::span<const Position> c) {
        seen.emplace_back(c.begin(), c.end());
    });
    REQUIRE(seen.size() == 10);
    REQUIRE(seen.front() == std::vector<Position>{1, 2, 3});
    REQUIRE(seen[1] == std::vector<Position>{1, 2, 4});
    REQUIRE(seen.back() == std::vector<Position>{3, 4, 5});
    for (std::size_t i = 1; i < seen.size(); ++i) REQUIRE(seen[i - 1] < seen[i]);

    int count = 0;
    oracle::for_each_combination(6, 0, [&](std::span<const Position> c) {
        REQUIRE(c.empty());
        ++count;
    });
    REQUIRE(count == 1);

    REQUIRE_THROWS_AS(oracle::for_each_combination(3, 4, [](auto) {}), std::invalid_argument);
}

TEST_CASE("exact pattern probability") {
    SECTION("hand-counted case: three marks packed into a window of three") {
        // favourable placements are the runs {j, j+1, j+2}, eight of them
        REQUIRE(oracle::exact_pattern_probability({10, 3, 3, 3}) == 8.0 / 120.0);
    }
    SECTION("degenerate certainties and impossibilities") {
        REQUIRE(oracle::exact_pattern_probability({10, 3, 10, 3}) == 1.0);  // window is everything
        REQUIRE(oracle::exact_pattern_probability({10, 3, 1, 1}) == 1.0);
        REQUIRE(oracle::exact_pattern_probability({10, 2, 5, 3}) == 0.0);   // t > m
        REQUIRE(oracle::exact_pattern_probability({10, 0, 5, 1}) == 0.0);
    }
    SECTION("matches an independent bitmask enumeration") {
        for (Count n : {6, 9, 12}) {
            for (Count m = 1; m <= n; m += 2) {
                for (Count s = 1; s <= n; s += 3) {
                    for (Count t = 1; t <= std::min(s, m); t += 2) {
                        CAPTURE(n, m, s, t);
                        REQUIRE(oracle::exact_pattern_probability({n, m, s, t}) ==
                                bitmask_pattern_probability(n, m, s, t));
                    }
                }
            }
        }
    }
    SECTION("refuses configurations too large to enumerate") {
        REQUIRE_THROWS_AS(oracle::exact_pattern_probability({10000, 500, 5, 5}),
                          std::invalid_argument);
    }
}

TEST_CASE("Monte Carlo pattern probability") {
    SECTION("converges to the exact value within four standard errors") {
        const BallConfiguration cfg{30, 8, 5, 4};
        const double exact = oracle::exact_pattern_probability(cfg);
        MonteCarloEstimate est = oracle::monte_carlo_pattern_probability(cfg, 40000, 12345);
        REQUIRE(est.reps == 40000);
        REQUIRE(std::fabs(est.estimate - exact) <= 4.0 * est.std_error + 1e-12);
        REQUIRE(est.std_error ==
                std::sqrt(est.estimate * (1.0 - est.estimate) / 40000.0));
    }
    SECTION("deterministic for a fixed seed, sensitive to it") {
        const BallConfiguration cfg{100, 20, 10, 5};
        auto a = oracle::monte_carlo_pattern_probability(cfg, 2000, 7);
        auto b = oracle::monte_carlo_pattern_probability(cfg, 2000, 7);
        auto c = oracle::monte_carlo_pattern_probability(cfg, 2000, 8);
        REQUIRE(a.estimate == b.estimate);
        REQUIRE(a.estimate != c.estimate);
    }
    SECTION("degenerate events have zero standard error") {
        auto sure = oracle::monte_carlo_pattern_probability({10, 3, 10, 1}, 500, 1);
        REQUIRE(sure.estimate == 1.0);
        REQUIRE(sure.std_error == 0.0);
        auto never = oracle::monte_carlo_pattern_probability({10, 2, 5, 2 + 1}, 500, 1);
        REQUIRE(never.estimate == 0.0);
    }
    SECTION("rejects zero replicates") {
        REQUIRE_THROWS_AS(oracle::monte_carlo_pattern_probability({10, 3, 3, 2}, 0, 1),
                          std::invalid_argument);
    }
}
