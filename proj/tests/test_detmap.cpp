#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rngrate/asymptotics.hpp"
#include "rngrate/detmap.hpp"
#include "rngrate/experiments.hpp"

using namespace rngrate;

namespace {

double map_fidelity(const std::vector<std::size_t>& a, const FiniteDist& p, const FiniteDist& q) {
    return fidelity(pushforward(DetMap{a, q.size()}, p), q);
}

// Largest L <= max_l with F^D(P -> Q^L) >= nu, no stopping rule.
std::size_t brute_L(const FiniteDist& p, const FiniteDist& q, double nu, std::size_t max_l) {
    std::size_t best = 0;
    for (std::size_t L = 1; L <= max_l; ++L)
        if (max_fidelity_det(p, product_power(q, L)).fidelity >= nu - 1e-12) best = L;
    return best;
}

}  // namespace

TEST(Pushforward, Examples) {
    const FiniteDist p({0.2, 0.3, 0.5});
    const auto img = pushforward(DetMap{{0, 0, 1}, 2}, p);
    EXPECT_NEAR(img[0], 0.5, 1e-15);
    EXPECT_NEAR(img[1], 0.5, 1e-15);
    const auto id = pushforward(DetMap{{0, 1, 2}, 3}, p);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(id[i], p[i]);
    const auto unused = pushforward(DetMap{{2, 2, 2}, 4}, p);
    EXPECT_EQ(unused[2], 1.0);
    EXPECT_EQ(unused[0] + unused[1] + unused[3], 0.0);
    EXPECT_THROW(pushforward(DetMap{{0, 5, 1}, 2}, p), InvalidInput);
    EXPECT_THROW(pushforward(DetMap{{0, 1}, 2}, p), InvalidInput);
}

TEST(MaxFidelityDet, Examples) {
    auto r = max_fidelity_det(FiniteDist({0.5, 0.5}), FiniteDist({0.5, 0.5}));
    EXPECT_NEAR(r.fidelity, 1.0, 1e-15);
    EXPECT_EQ(r.map.assignment, (std::vector<std::size_t>{0, 1}));  // smallest of two maximizers

    r = max_fidelity_det(FiniteDist({0.7, 0.3}), FiniteDist({0.6, 0.4}));
    EXPECT_NEAR(r.fidelity, std::sqrt(0.42) + std::sqrt(0.12), 1e-15);
    EXPECT_EQ(r.map.assignment, (std::vector<std::size_t>{0, 1}));

    r = max_fidelity_det(FiniteDist({0.5, 0.5}), FiniteDist::uniform(3));
    EXPECT_NEAR(r.fidelity, std::sqrt(2.0 / 3.0), 1e-15);

    r = max_fidelity_det(FiniteDist({0.3, 0.3, 0.4}), FiniteDist({1.0}));
    EXPECT_NEAR(r.fidelity, 1.0, 1e-15);
    EXPECT_EQ(r.map.assignment, (std::vector<std::size_t>{0, 0, 0}));
}

TEST(MaxFidelityDet, MatchesIndependentEnumeration) {
    std::mt19937_64 rng(41);
    for (int t = 0; t < 100; ++t) {
        const auto p = random_dist(rng, 1 + t % 4), q = random_dist(rng, 1 + (t / 4) % 3);
        double best = 0.0;
        std::vector<std::size_t> a(p.size(), 0);
        const std::size_t total = static_cast<std::size_t>(std::pow(q.size(), p.size()));
        for (std::size_t code = 0; code < total; ++code) {
            std::size_t c = code;
            for (std::size_t x = p.size(); x-- > 0;) {
                a[x] = c % q.size();
                c /= q.size();
            }
            best = std::max(best, map_fidelity(a, p, q));
        }
        const auto r = max_fidelity_det(p, q);
        EXPECT_NEAR(r.fidelity, best, 1e-14);
        EXPECT_NEAR(map_fidelity(r.map.assignment, p, q), r.fidelity, 1e-14);
    }
}

TEST(MaxFidelityDet, DominatedByMajorization) {
    std::mt19937_64 rng(42);
    for (int t = 0; t < 300; ++t) {
        const auto p = random_dist(rng, 1 + t % 5), q = random_dist(rng, 1 + (t / 5) % 4);
        EXPECT_LE(max_fidelity_det(p, q).fidelity, max_fidelity_major(p, q).fidelity + 1e-12);
    }
}

TEST(MaxFidelityDet, HillClimberNeverBeatsIt) {
    std::mt19937_64 rng(43);
    for (int t = 0; t < 50; ++t) {
        const auto p = random_dist(rng, 5), q = random_dist(rng, 3);
        const double exact = max_fidelity_det(p, q).fidelity;
        std::uniform_int_distribution<std::size_t> pick_y(0, q.size() - 1), pick_x(0, p.size() - 1);
        std::vector<std::size_t> a(p.size());
        for (auto& y : a) y = pick_y(rng);
        double f = map_fidelity(a, p, q);
        for (int step = 0; step < 400; ++step) {
            auto b = a;
            b[pick_x(rng)] = pick_y(rng);
            const double g = map_fidelity(b, p, q);
            if (g >= f) {
                a = b;
                f = g;
            }
        }
        EXPECT_LE(f, exact + 1e-14);
    }
}

TEST(MaxFidelityDet, IndependentOfThreadCount) {
    std::mt19937_64 rng(44);
    for (int t = 0; t < 30; ++t) {
        const auto p = random_dist(rng, 6), q = random_dist(rng, 3);
        const auto one = max_fidelity_det(p, q, 1), many = max_fidelity_det(p, q, 3);
        EXPECT_EQ(one.fidelity, many.fidelity);
        EXPECT_EQ(one.map.assignment, many.map.assignment);
    }
}

TEST(MaxFidelityDet, RefusesOversizedSearch) {
    EXPECT_THROW(max_fidelity_det(FiniteDist::uniform(8), FiniteDist::uniform(8)), LimitExceeded);
    EXPECT_NO_THROW(max_fidelity_det(FiniteDist::uniform(7), FiniteDist::uniform(8)));
}

TEST(OneshotL, Examples) {
    const FiniteDist p({0.7, 0.3}), q({0.6, 0.4});
    EXPECT_EQ(oneshot_L(p, q, 0.9), 1u);
    EXPECT_EQ(oneshot_L(p, q, 0.7), 2u);
    EXPECT_EQ(oneshot_L(p, q, 0.5), 3u);
    EXPECT_EQ(oneshot_L(p, q, 1.0), 0u);
    EXPECT_EQ(oneshot_L(FiniteDist({0.8, 0.2}), FiniteDist({0.8, 0.2}), 1.0), 1u);
    EXPECT_EQ(oneshot_L(FiniteDist({0.5, 0.3, 0.2}), FiniteDist({0.5, 0.5}), 0.8), 2u);
}

TEST(OneshotL, StoppingRuleLosesNothing) {
    std::mt19937_64 rng(45);
    for (int t = 0; t < 20; ++t) {
        const auto p = random_dist(rng, 3), q = random_nonuniform(rng, 2);
        for (double nu : {0.8, 0.95}) {
            std::size_t L = 0;
            try {
                L = oneshot_L(p, q, nu);
            } catch (const LimitExceeded&) {
                continue;  // the scan reached |Q^L|^|X| > 1e7 before stopping
            }
            EXPECT_EQ(L, brute_L(p, q, nu, 6)) << describe(p) << " -> " << describe(q);
        }
    }
}

TEST(OneshotL, NonIncreasingInNu) {
    const FiniteDist p({0.5, 0.3, 0.2}), q({0.7, 0.3});
    std::size_t prev = oneshot_L(p, q, 0.5);
    for (double nu = 0.55; nu <= 1.0; nu += 0.05) {
        const std::size_t L = oneshot_L(p, q, nu);
        EXPECT_LE(L, prev) << "nu = " << nu;
        prev = L;
    }
}

TEST(OneshotL, RejectsDegenerateInputs) {
    EXPECT_THROW(oneshot_L(FiniteDist({0.5, 0.5}), FiniteDist({1.0}), 0.9), InvalidInput);
    EXPECT_THROW(oneshot_L(FiniteDist({0.5, 0.5}), FiniteDist({0.5, 0.5}), 0.0), InvalidInput);
    EXPECT_THROW(oneshot_L(FiniteDist({0.5, 0.5}), FiniteDist({0.5, 0.5}), 1.5), InvalidInput);
}

TEST(FmLn, ExactCopiesAtUnitConfidence) {
    const FiniteDist p({0.8, 0.2});
    for (std::size_t n : {4u, 16u, 64u}) {
        const auto r = fm_L_n(p, p, n, 1.0);
        EXPECT_EQ(r.L, n);
        EXPECT_TRUE(r.monotone);
        EXPECT_FALSE(r.linear_scan);
    }
}

TEST(FmLn, Examples) {
    const FiniteDist p({0.8, 0.2});
    EXPECT_EQ(fm_L_n(p, p, 4, 0.9).L, 5u);
    EXPECT_EQ(fm_L_n(p, p, 16, 0.5).L, 28u);
    EXPECT_EQ(fm_L_n(p, p, 64, 0.9).L, 71u);
}

TEST(FmLn, TracksTheSecondOrderExpansion) {
    const FiniteDist p({0.8, 0.2});
    for (double nu : {0.9, 0.5}) {
        const double r2 = second_order_rate(p, p, nu).r2;
        for (std::size_t n : {64u, 128u}) {
            const double pred = n + r2 * std::sqrt(static_cast<double>(n));
            EXPECT_NEAR(static_cast<double>(fm_L_n(p, p, n, nu).L), pred, 3.0) << "n = " << n << " nu = " << nu;
        }
    }
}

TEST(FmLn, AgreesWithLinearScan) {
    const FiniteDist p({0.7, 0.2, 0.1}), q({0.6, 0.4});
    for (std::size_t n : {3u, 10u, 25u}) {
        for (double nu : {0.3, 0.8, 0.95}) {
            const auto r = fm_L_n(p, q, n, nu);
            const auto src = iid_power(p, n);
            std::size_t expect = 0;
            for (std::size_t L = 1; L <= r.cap; ++L)
                if (max_fidelity_major(src, iid_power(q, L)).fidelity >= nu - 1e-12) expect = L;
            EXPECT_EQ(r.L, expect) << "n = " << n << " nu = " << nu;
        }
    }
}

TEST(FmLn, CapIsReturnedAsSentinel) {
    const auto r = fm_L_n(FiniteDist({0.8, 0.2}), FiniteDist({0.6, 0.4}), 4, 1e-12);
    EXPECT_EQ(r.cap, 20u);
    EXPECT_EQ(r.L, r.cap);
}

TEST(FmLn, RejectsDegenerateInputs) {
    const FiniteDist p({0.8, 0.2});
    EXPECT_THROW(fm_L_n(p, FiniteDist({1.0}), 4, 0.9), InvalidInput);
    EXPECT_THROW(fm_L_n(FiniteDist({1.0}), p, 4, 0.9), InvalidInput);
    EXPECT_THROW(fm_L_n(p, p, 0, 0.9), InvalidInput);
    EXPECT_THROW(fm_L_n(p, p, 4, 0.0), InvalidInput);
}
