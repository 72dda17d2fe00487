#pragma once

// Deterministic conversions W: X -> Y, the exhaustive maximal fidelity F^D,
// the one-shot copy count L^D, and its finite-n surrogate through F^M.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "rngrate/dist.hpp"
#include "rngrate/majorization.hpp"
#include "rngrate/parallel.hpp"

namespace rngrate {

struct DetMap {
    std::vector<std::size_t> assignment;  // source index -> target index
    std::size_t target_size = 0;
};

inline FiniteDist pushforward(const DetMap& w, const FiniteDist& p) {
    if (w.assignment.size() != p.size()) throw InvalidInput("pushforward: map and distribution sizes differ");
    std::vector<double> out(w.target_size, 0.0);
    for (std::size_t x = 0; x < p.size(); ++x) {
        if (w.assignment[x] >= w.target_size) throw InvalidInput("pushforward: image outside target support");
        out[w.assignment[x]] += p[x];
    }
    return FiniteDist(std::move(out));
}

struct DetResult {
    double fidelity = 0.0;
    DetMap map;
};

inline constexpr double kExhaustiveLimit = 1e7;

namespace detail {

inline constexpr double kTieTolerance = 1e-12;

// Lexicographic scan of all maps with assignment[0] == head.
inline DetResult scan_with_head(std::span<const double> p, std::span<const double> sq, std::size_t head) {
    const std::size_t nx = p.size(), ny = sq.size();
    std::vector<std::size_t> a(nx, 0);
    a[0] = head;
    std::vector<double> img(ny);
    DetResult best;
    best.fidelity = -1.0;
    while (true) {
        std::fill(img.begin(), img.end(), 0.0);
        for (std::size_t x = 0; x < nx; ++x) img[a[x]] += p[x];
        double f = 0.0;
        for (std::size_t y = 0; y < ny; ++y)
            if (img[y] > 0.0) f += std::sqrt(img[y]) * sq[y];
        if (f > best.fidelity + kTieTolerance) {
            best.fidelity = f;
            best.map.assignment = a;
        }
        // odometer over positions 1..nx-1, last position fastest
        std::size_t pos = nx;
        while (pos > 1) {
            --pos;
            if (++a[pos] < ny) break;
            a[pos] = 0;
            if (pos == 1) return best;
        }
        if (nx == 1) return best;
    }
}

}  // namespace detail

/// Exact F^D(P -> Q) by enumerating all |Y|^|X| maps. Among maximizers the
/// lexicographically smallest assignment wins; the result does not depend on
/// the thread count.
inline DetResult max_fidelity_det(const FiniteDist& p, const FiniteDist& q, unsigned threads = thread_count()) {
    const double space = std::pow(static_cast<double>(q.size()), static_cast<double>(p.size()));
    if (space > kExhaustiveLimit)
        throw LimitExceeded("max_fidelity_det: " + std::to_string(q.size()) + "^" + std::to_string(p.size()) +
                            " maps exceed the exhaustive limit; use max_fidelity_major as the F^M surrogate");
    std::vector<double> sq(q.size());
    for (std::size_t y = 0; y < q.size(); ++y) sq[y] = std::sqrt(q[y]);

    // Chunks are fixed by the first coordinate, so merging them in order is
    // schedule independent.
    auto chunks = parallel_map(
        q.size(), [&](std::size_t head) { return detail::scan_with_head(p.probs(), sq, head); }, threads);
    DetResult best = chunks.front();
    for (std::size_t h = 1; h < chunks.size(); ++h)
        if (chunks[h].fidelity > best.fidelity + detail::kTieTolerance) best = chunks[h];
    best.map.target_size = q.size();
    best.fidelity = std::min(best.fidelity, 1.0);
    return best;
}

/// L^D(P, Q | nu): the largest L with F^D(P -> Q^L) >= nu, or 0 if no L
/// works. Scanning stops once sqrt(C_{Q^L}(|X|)), an upper bound on every
/// F(W(P), Q^L) that is non-increasing in L, drops below nu.
inline std::size_t oneshot_L(const FiniteDist& p, const FiniteDist& q, double nu) {
    if (!(nu > 0.0 && nu <= 1.0)) throw InvalidInput("oneshot_L: nu must lie in (0, 1]");
    if (q.positive_support() <= 1) throw InvalidInput("oneshot_L: point-mass target makes L unbounded");
    constexpr double kSlack = 1e-12;
    std::size_t best = 0;
    for (std::size_t L = 1;; ++L) {
        const double bound = std::sqrt(iid_power(q, L).cumulative(static_cast<double>(p.size())));
        if (bound < nu - kSlack) break;
        const FiniteDist qL = product_power(q, L);
        if (std::pow(static_cast<double>(qL.size()), static_cast<double>(p.size())) > kExhaustiveLimit)
            throw LimitExceeded("oneshot_L: exhaustive limit exceeded at L = " + std::to_string(L));
        if (max_fidelity_det(p, qL).fidelity >= nu - kSlack) best = L;
    }
    return best;
}

struct FmLResult {
    std::size_t L = 0;
    std::size_t cap = 0;     // scan upper limit; returned as a sentinel when every L <= cap passes
    bool monotone = true;    // probed F^M values were non-increasing in L
    bool linear_scan = false;
    std::vector<std::pair<std::size_t, double>> probes;
};

/// Scan upper limit for fm_L_n: four times the first-order copy count, kept
/// inside the range where the support size of Q^L is representable.
inline std::size_t fm_scan_cap(const FiniteDist& p, const FiniteDist& q, std::size_t n) {
    const double a = entropy(p) / entropy(q);
    const double by_rate = std::ceil(4.0 * a * static_cast<double>(n)) + 8.0;
    const double by_range = std::floor(11000.0 / std::log(static_cast<double>(q.positive_support())));
    return static_cast<std::size_t>(std::max(1.0, std::min(by_rate, by_range)));
}

/// L^D_n through the F^M surrogate: the largest L with
/// F^M(P^n -> Q^L) >= nu, by bracketing and bisection on L.
inline FmLResult fm_L_n(const FiniteDist& p, const FiniteDist& q, std::size_t n, double nu) {
    if (n < 1) throw InvalidInput("fm_L_n: n must be >= 1");
    if (q.positive_support() <= 1) throw InvalidInput("fm_L_n: point-mass target makes L unbounded");
    if (entropy(p) <= 0.0) throw InvalidInput("fm_L_n: source must have positive entropy");
    if (!(nu > 0.0 && nu <= 1.0)) throw InvalidInput("fm_L_n: nu must lie in (0, 1]");

    FmLResult res;
    res.cap = fm_scan_cap(p, q, n);
    const BlockDist src = iid_power(p, n);
    auto eval = [&](std::size_t L) {
        for (const auto& [l, f] : res.probes)
            if (l == L) return f;
        const double f = L == 0 ? 1.0 : max_fidelity_major(src, iid_power(q, L)).fidelity;
        res.probes.emplace_back(L, f);
        return f;
    };
    constexpr double kSlack = 1e-12;
    auto ok = [&](std::size_t L) { return eval(L) >= nu - kSlack; };

    const double a = entropy(p) / entropy(q);
    std::size_t lo = 0, hi = 0;  // ok(lo), !ok(hi) unless hi == cap + 1
    std::size_t guess = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(a * n)), 1, res.cap);
    if (ok(guess)) {
        lo = guess;
        std::size_t step = std::max<std::size_t>(1, guess / 8);
        hi = lo;
        while (true) {
            hi = std::min(res.cap, lo + step);
            if (!ok(hi)) break;
            lo = hi;
            if (hi == res.cap) {
                hi = res.cap + 1;
                break;
            }
            step *= 2;
        }
    } else {
        hi = guess;
        std::size_t step = std::max<std::size_t>(1, guess / 8);
        while (true) {
            lo = hi > step ? hi - step : 0;
            if (lo == 0 || ok(lo)) break;
            hi = lo;
            step *= 2;
        }
    }
    while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        (ok(mid) ? lo : hi) = mid;
    }
    res.L = lo;

    auto sorted = res.probes;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i].second > sorted[i - 1].second + 1e-12) res.monotone = false;
    if (!res.monotone) {
        res.linear_scan = true;
        res.L = 0;
        for (std::size_t L = 1; L <= res.cap; ++L)
            if (ok(L)) res.L = L;
    }
    return res;
}

}  // namespace rngrate
