#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "rngrate/detmap.hpp"
#include "rngrate/experiments.hpp"
#include "rngrate/majorization.hpp"
#include "rngrate/oracle.hpp"

using namespace rngrate;

namespace {

FiniteDist random_image(std::mt19937_64& rng, const FiniteDist& p, std::size_t ny) {
    std::uniform_int_distribution<std::size_t> pick(0, ny - 1);
    DetMap w{std::vector<std::size_t>(p.size()), ny};
    for (auto& y : w.assignment) y = pick(rng);
    return pushforward(w, p);
}

FiniteDist shuffled(std::mt19937_64& rng, const FiniteDist& p) {
    std::vector<double> v(p.probs().begin(), p.probs().end());
    std::shuffle(v.begin(), v.end(), rng);
    return FiniteDist(std::move(v));
}

}  // namespace

TEST(MajorizedBy, Examples) {
    EXPECT_TRUE(majorized_by(FiniteDist({0.5, 0.3, 0.2}), FiniteDist({0.5, 0.5})));
    EXPECT_FALSE(majorized_by(FiniteDist({0.5, 0.5}), FiniteDist({0.5, 0.3, 0.2})));
    EXPECT_TRUE(majorized_by(FiniteDist::uniform(3), FiniteDist({0.2, 0.7, 0.1})));
    EXPECT_TRUE(majorized_by(FiniteDist({0.2, 0.7, 0.1}), FiniteDist({1.0})));
    // incomparable pair
    EXPECT_FALSE(majorized_by(FiniteDist({0.6, 0.2, 0.2}), FiniteDist({0.5, 0.5})));
    EXPECT_FALSE(majorized_by(FiniteDist({0.5, 0.5}), FiniteDist({0.6, 0.2, 0.2})));
}

TEST(MajorizedBy, IsAPreorder) {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 300; ++t) {
        const auto p = random_dist(rng, 4);
        EXPECT_TRUE(majorized_by(p, p));
        EXPECT_TRUE(majorized_by(p, shuffled(rng, p)));
        const auto q = random_image(rng, p, 3);
        const auto r = random_image(rng, q, 2);
        ASSERT_TRUE(majorized_by(p, q));
        ASSERT_TRUE(majorized_by(q, r));
        EXPECT_TRUE(majorized_by(p, r));
    }
}

TEST(MajorizedBy, PushforwardDominates) {
    std::mt19937_64 rng(22);
    for (int t = 0; t < 300; ++t) {
        const auto p = random_dist(rng, 1 + t % 5);
        EXPECT_TRUE(majorized_by(p, random_image(rng, p, 1 + t % 3)));
    }
}

TEST(MaxFidelityMajor, Examples) {
    EXPECT_NEAR(max_fidelity_major(FiniteDist({0.5, 0.5}), FiniteDist({0.5, 0.5})).fidelity, 1.0, 1e-15);
    EXPECT_NEAR(max_fidelity_major(FiniteDist({0.7, 0.3}), FiniteDist({0.6, 0.4})).fidelity,
                std::sqrt(0.42) + std::sqrt(0.12), 1e-15);
    EXPECT_NEAR(max_fidelity_major(FiniteDist({0.7, 0.3}), FiniteDist({0.6, 0.4})).fidelity, 0.9944842313548, 1e-12);
    // point-mass source: only a point mass majorizes it
    EXPECT_NEAR(max_fidelity_major(FiniteDist({1.0, 0.0}), FiniteDist({0.8, 0.2})).fidelity, std::sqrt(0.8), 1e-15);
    // point-mass target: everything converts exactly
    EXPECT_NEAR(max_fidelity_major(FiniteDist({0.3, 0.3, 0.4}), FiniteDist({1.0})).fidelity, 1.0, 1e-15);
    // a finer target than the source cannot be reached
    EXPECT_NEAR(max_fidelity_major(FiniteDist({0.5, 0.5}), FiniteDist::uniform(4)).fidelity, std::sqrt(0.5), 1e-15);
}

TEST(MaxFidelityMajor, OptimizerPoolsOnTheMajorant) {
    // (0.9, 0.1) is already concave against uniform(3): P' = P padded
    auto sol = max_fidelity_major(FiniteDist({0.9, 0.1}), FiniteDist::uniform(3));
    EXPECT_NEAR(sol.fidelity, std::sqrt(0.3) + std::sqrt(0.1 / 3.0), 1e-14);
    auto v = sol.optimizer.sorted_values(3);
    EXPECT_NEAR(v[0], 0.9, 1e-14);
    EXPECT_NEAR(v[1], 0.1, 1e-14);
    EXPECT_EQ(v[2], 0.0);
    EXPECT_EQ(sol.active_breakpoints, (std::vector<Rank>{1.0L, 2.0L}));

    // (0.55, 0.45) against (0.7, 0.2, 0.1): the first two target cells pool,
    // P' = (7/9, 2/9, 0)
    sol = max_fidelity_major(FiniteDist({0.55, 0.45}), FiniteDist({0.7, 0.2, 0.1}));
    EXPECT_NEAR(sol.fidelity, std::sqrt(0.9), 1e-14);
    v = sol.optimizer.sorted_values(3);
    EXPECT_NEAR(v[0], 7.0 / 9.0, 1e-14);
    EXPECT_NEAR(v[1], 2.0 / 9.0, 1e-14);
    EXPECT_EQ(v[2], 0.0);
    EXPECT_EQ(sol.active_breakpoints, (std::vector<Rank>{2.0L}));

    // source spread flatter than the target: P' proportional to Q
    sol = max_fidelity_major(FiniteDist::uniform(4), FiniteDist({0.7, 0.2, 0.1}));
    EXPECT_NEAR(sol.fidelity, 1.0, 1e-14);
    EXPECT_TRUE(sol.active_breakpoints.empty());
}

TEST(MaxFidelityMajor, MatchesOracle) {
    std::mt19937_64 rng(23);
    for (int t = 0; t < 300; ++t) {
        const auto p = random_dist(rng, 1 + t % 4);
        const auto q = random_dist(rng, 1 + (t / 4) % 4);
        const double fm = max_fidelity_major(p, q).fidelity;
        EXPECT_NEAR(fm, oracle_max_fidelity(p, q), 1e-6) << describe(p) << " -> " << describe(q);
    }
}

TEST(MaxFidelityMajor, OptimizerIsFeasibleAndAttains) {
    std::mt19937_64 rng(24);
    for (int t = 0; t < 300; ++t) {
        const auto p = random_dist(rng, 1 + t % 6);
        const auto q = random_dist(rng, 1 + (t / 6) % 6);
        const auto sp = BlockDist::from_finite(p), sq = BlockDist::from_finite(q);
        const auto sol = max_fidelity_major(sp, sq);
        EXPECT_TRUE(majorized_by(sp, sol.optimizer, 1e-12));
        EXPECT_NEAR(sorted_fidelity(sol.optimizer, sq), sol.fidelity, 1e-12);
        // the coarse-graining at the binding ranks is tight for the optimizer
        EXPECT_NEAR(partition_bound(sol.optimizer, sq, sol.active_breakpoints), sol.fidelity, 1e-12);
    }
}

TEST(MaxFidelityMajor, DominatesEveryFeasibleCandidate) {
    std::mt19937_64 rng(25);
    for (int t = 0; t < 300; ++t) {
        const auto p = random_dist(rng, 5);
        const auto q = random_dist(rng, 3);
        const double fm = max_fidelity_major(p, q).fidelity;
        const auto candidate = random_image(rng, p, 3);
        EXPECT_LE(sorted_fidelity(BlockDist::from_finite(candidate), BlockDist::from_finite(q)), fm + 1e-12);
    }
}

TEST(MaxFidelityMajor, UnitValueIffMajorized) {
    std::mt19937_64 rng(26);
    int hits = 0;
    for (int t = 0; t < 500; ++t) {
        const auto p = random_dist(rng, 4);
        const auto q = t % 2 ? random_image(rng, p, 3) : random_dist(rng, 3);
        const double fm = max_fidelity_major(p, q).fidelity;
        if (majorized_by(p, q)) {
            ++hits;
            EXPECT_NEAR(fm, 1.0, 1e-12);
        } else {
            EXPECT_LT(fm, 1.0 - 1e-12) << describe(p) << " -> " << describe(q);
        }
    }
    EXPECT_GT(hits, 200);
}

TEST(MaxFidelityMajor, AntitoneInTheSource) {
    // a more concentrated source has fewer majorizing candidates
    std::mt19937_64 rng(27);
    for (int t = 0; t < 300; ++t) {
        const auto p = random_dist(rng, 5);
        const auto p2 = random_image(rng, p, 3);
        const auto q = random_dist(rng, 4);
        EXPECT_LE(max_fidelity_major(p2, q).fidelity, max_fidelity_major(p, q).fidelity + 1e-12);
    }
}

TEST(MaxFidelityMajor, InvariantUnderRelabelingAndTies) {
    std::mt19937_64 rng(28);
    for (int t = 0; t < 200; ++t) {
        const auto p = random_dist(rng, 4), q = random_dist(rng, 4);
        const double f = max_fidelity_major(p, q).fidelity;
        EXPECT_NEAR(max_fidelity_major(shuffled(rng, p), shuffled(rng, q)).fidelity, f, 1e-13);
    }
    // equal-valued target cells split into a block or enumerated one by one
    const FiniteDist q({0.25, 0.25, 0.25, 0.25});
    const FiniteDist p({0.6, 0.3, 0.1});
    EXPECT_NEAR(max_fidelity_major(BlockDist::from_finite(p), iid_power(FiniteDist({0.5, 0.5}), 2)).fidelity,
                max_fidelity_major(p, q).fidelity, 1e-14);
}

TEST(MaxFidelityMajor, BlockPowersMatchFlattenedPowers) {
    std::mt19937_64 rng(29);
    for (int t = 0; t < 30; ++t) {
        const auto p = random_dist(rng, 2 + t % 2), q = random_dist(rng, 2);
        const std::size_t n = 2 + t % 4, L = 1 + t % 5;
        const double blocks = max_fidelity_major(iid_power(p, n), iid_power(q, L)).fidelity;
        const double flat = max_fidelity_major(product_power(p, n), product_power(q, L)).fidelity;
        EXPECT_NEAR(blocks, flat, 1e-12);
    }
}

TEST(MaxFidelityMajor, NonIncreasingInTargetCopies) {
    const FiniteDist p({0.8, 0.2}), q({0.6, 0.4});
    const auto src = iid_power(p, 40);
    double prev = 1.0;
    for (std::size_t L = 1; L <= 60; ++L) {
        const double f = max_fidelity_major(src, iid_power(q, L)).fidelity;
        EXPECT_LE(f, prev + 1e-12) << "L = " << L;
        prev = f;
    }
}

TEST(PartitionBound, Examples) {
    const auto p = BlockDist::from_finite(FiniteDist({0.5, 0.3, 0.2}));
    const auto q = BlockDist::from_finite(FiniteDist({0.4, 0.4, 0.2}));
    const std::vector<Rank> none;
    EXPECT_NEAR(partition_bound(p, q, none), 1.0, 1e-15);
    const std::vector<Rank> all = {1.0L, 2.0L};
    EXPECT_NEAR(partition_bound(p, q, all), sorted_fidelity(p, q), 1e-15);
    const std::vector<Rank> one = {1.0L};
    EXPECT_NEAR(partition_bound(p, q, one), std::sqrt(0.2) + std::sqrt(0.5 * 0.6), 1e-15);
    const std::vector<Rank> unsorted = {2.0L, 1.0L};
    EXPECT_THROW(partition_bound(p, q, unsorted), InvalidInput);
}

TEST(PartitionBound, BoundsEveryCandidate) {
    std::mt19937_64 rng(30);
    std::uniform_real_distribution<double> u(0.0, 6.0);
    for (int t = 0; t < 300; ++t) {
        const auto a = BlockDist::from_finite(random_dist(rng, 6)), b = BlockDist::from_finite(random_dist(rng, 6));
        std::vector<Rank> cuts = {u(rng), u(rng), u(rng)};
        std::sort(cuts.begin(), cuts.end());
        EXPECT_LE(sorted_fidelity(a, b), partition_bound(a, b, cuts) + 1e-12);
    }
}
