#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include <rankrec/oracles.hpp>

using namespace rankrec;
using oracles::PartitionInstance;

namespace {

// Plain m^n enumeration, no pruning, to cross-check the pruned search.
std::int64_t enumerate_makespan(std::vector<std::int64_t> const & jobs, int m) {
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    std::size_t combos = 1;
    for (std::size_t i = 0; i < jobs.size(); ++i) combos *= static_cast<std::size_t>(m);
    for (std::size_t code = 0; code < combos; ++code) {
        std::vector<std::int64_t> bins(static_cast<std::size_t>(m), 0);
        std::size_t c = code;
        for (auto j : jobs) {
            bins[c % static_cast<std::size_t>(m)] += j;
            c /= static_cast<std::size_t>(m);
        }
        best = std::min(best, *std::ranges::max_element(bins));
    }
    return jobs.empty() ? 0 : best;
}

} // namespace

TEST(Oracles, OptimalMakespanExamples) {
    EXPECT_EQ(oracles::brute_force_optimal_makespan({{4, 3, 3, 2}, 2}), 6);
    EXPECT_EQ(oracles::brute_force_optimal_makespan({{5, 5, 4}, 3}), 5);
    EXPECT_EQ(oracles::brute_force_optimal_makespan({{7, 1, 9, 2}, 1}), 19);
    EXPECT_EQ(oracles::brute_force_optimal_makespan({{}, 3}), 0);
}

TEST(Oracles, OptimalMakespanAgreesWithPlainEnumeration) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 300; ++trial) {
        int const m = 1 + static_cast<int>(rng() % 4);
        std::vector<std::int64_t> jobs(rng() % 8);
        for (auto & j : jobs) j = 1 + static_cast<std::int64_t>(rng() % 25);
        ASSERT_EQ(oracles::brute_force_optimal_makespan({jobs, m}), enumerate_makespan(jobs, m));
    }
}

TEST(Oracles, OptimalMakespanLimits) {
    try {
        oracles::brute_force_optimal_makespan({std::vector<std::int64_t>(13, 1), 2});
        FAIL();
    } catch (error const & e) {
        EXPECT_EQ(e.code(), errc::instance_too_large);
    }
    EXPECT_THROW(oracles::brute_force_optimal_makespan({{1}, 5}), error);
}

TEST(Oracles, ReferenceRedistribute) {
    EXPECT_EQ(oracles::reference_redistribute({137, 900}), (std::vector<std::int64_t>{519, 518}));
    EXPECT_TRUE(oracles::reference_redistribute({}).empty());
    EXPECT_EQ(oracles::reference_redistribute({6, 6, 6}), (std::vector<std::int64_t>{6, 6, 6}));
}

TEST(Oracles, UniformTarget) {
    EXPECT_EQ(oracles::uniform_target({0, 0, 69, 70}), std::make_pair(std::int64_t{34}, std::int64_t{3}));
    EXPECT_EQ(oracles::uniform_target({448, 426, 436, 448, 426, 426, 426}),
              std::make_pair(std::int64_t{433}, std::int64_t{5}));
    EXPECT_EQ(oracles::uniform_target({9, 9}), std::make_pair(std::int64_t{9}, std::int64_t{0}));
}

TEST(Oracles, ReferenceGreedy) {
    EXPECT_EQ(oracles::reference_greedy({3, 5}, {4, 2, 2}), (std::vector<std::int64_t>{9, 7}));
}
