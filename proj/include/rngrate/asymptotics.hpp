#pragma once

// Second-order limit curves for converting P^n into Q^{a n + b sqrt(n)} with
// a = H(P)/H(Q), and their inversion to second-order rates.
//
// Coordinates: x indexes source ranks as rank ~ exp(H(P) n + x sqrt(n)). In
// these coordinates the source cumulative tends to G_P (CDF of
// N_P = N(0, V(P))) and the target cumulative to G_{P,Q,b} (CDF of
// N_{P,Q,b} = N(H(Q) b, H(P)/H(Q) V(Q))). Larger b means more target copies
// and a lower limit fidelity; every curve here is non-increasing in b.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

#include "rngrate/dist.hpp"
#include "rngrate/error.hpp"
#include "rngrate/normal.hpp"

namespace rngrate {

enum class RegimeKind { SourceUniform, TargetUniform, RatioGreater, RatioLess, RatioEqual };

inline std::string_view to_string(RegimeKind k) {
    switch (k) {
        case RegimeKind::SourceUniform: return "SourceUniform";
        case RegimeKind::TargetUniform: return "TargetUniform";
        case RegimeKind::RatioGreater: return "RatioGreater";
        case RegimeKind::RatioLess: return "RatioLess";
        case RegimeKind::RatioEqual: return "RatioEqual";
    }
    return "?";
}

/// kind plus C_{P,Q} = (H(P)/V(P)) / (H(Q)/V(Q)); +inf for a uniform source,
/// 0 for a uniform target.
struct ConversionRegime {
    RegimeKind kind = RegimeKind::RatioEqual;
    double c_pq = 1.0;
};

struct GaussianSpec {
    double mean = 0.0;
    double variance = 1.0;

    GaussianSpec() = default;
    GaussianSpec(double m, double v) : mean(m), variance(v) {
        if (!(v > 0.0) || !std::isfinite(v)) throw InvalidInput("GaussianSpec: variance must be positive");
    }

    double sd() const { return std::sqrt(variance); }
    double z(double x) const { return (x - mean) / sd(); }
    double log_pdf(double x) const { return normal::log_pdf(z(x)) - 0.5 * std::log(variance); }
    double pdf(double x) const { return std::exp(log_pdf(x)); }
    double cdf(double x) const { return normal::cdf(z(x)); }
    double log_cdf(double x) const { return normal::log_cdf(z(x)); }
    double log_sf(double x) const { return normal::log_sf(z(x)); }
};

inline constexpr double kRatioTolerance = 1e-12;

/// Statistics of an ordered pair (P, Q) with the regime resolved.
struct ConversionPair {
    SourceStats source;
    SourceStats target;
    ConversionRegime regime;

    double first_order_rate() const { return source.h / target.h; }

    /// N_P
    GaussianSpec source_gaussian() const {
        if (source.is_uniform) throw RegimeError("source is uniform: N_P is degenerate");
        return {0.0, source.v};
    }
    /// N_{P,Q,b}
    GaussianSpec target_gaussian(double b) const {
        if (target.is_uniform) throw RegimeError("target is uniform: N_{P,Q,b} is degenerate");
        return {target.h * b, source.h / target.h * target.v};
    }
};

inline ConversionRegime regime_classify(const SourceStats& p, const SourceStats& q) {
    if (!(p.h > 0.0) || !(q.h > 0.0)) throw RegimeError("source and target need positive entropy");
    if (p.is_uniform && q.is_uniform)
        throw RegimeError("both distributions are uniform; the conversion is outside the second-order theory");
    if (p.is_uniform) return {RegimeKind::SourceUniform, std::numeric_limits<double>::infinity()};
    if (q.is_uniform) return {RegimeKind::TargetUniform, 0.0};
    const double c = (p.h / p.v) / (q.h / q.v);
    if (std::abs(c - 1.0) <= kRatioTolerance) return {RegimeKind::RatioEqual, c};
    return {c > 1.0 ? RegimeKind::RatioGreater : RegimeKind::RatioLess, c};
}

inline ConversionRegime regime_classify(const FiniteDist& p, const FiniteDist& q) {
    return regime_classify(stats(p), stats(q));
}

inline ConversionPair make_pair(const FiniteDist& p, const FiniteDist& q) {
    ConversionPair pair{stats(p), stats(q), {}};
    pair.regime = regime_classify(pair.source, pair.target);
    return pair;
}

//------------------------------------------------------------------------------
// Gaussian overlap I_{P,Q,b}(x) = int_{-inf}^x sqrt(N_P N_{P,Q,b})
//------------------------------------------------------------------------------

/// sqrt(N_P N_{P,Q,b}) is K times a normal density with mean H(Q) b/(1+C)
/// and variance 2 V(P) C/(1+C).
struct OverlapShape {
    double log_k = 0.0;
    GaussianSpec shape;
};

inline OverlapShape overlap_shape(const ConversionPair& pair, double b) {
    if (pair.source.is_uniform || pair.target.is_uniform)
        throw RegimeError("gaussian_overlap needs both varentropies positive");
    const double c = pair.source.h * pair.target.v / (pair.target.h * pair.source.v);
    const double m = pair.target.h * b;
    const double vp = pair.source.v;
    OverlapShape s;
    s.log_k = 0.5 * std::log(2.0 * std::sqrt(c) / (1.0 + c)) - m * m / (4.0 * vp * (1.0 + c));
    s.shape = GaussianSpec(m / (1.0 + c), 2.0 * vp * c / (1.0 + c));
    return s;
}

inline double gaussian_overlap(const ConversionPair& pair, double b, double x) {
    const auto s = overlap_shape(pair, b);
    if (x == std::numeric_limits<double>::infinity()) return std::exp(s.log_k);
    return std::exp(s.log_k + s.shape.log_cdf(x));
}

/// I(inf) - I(x), evaluated without cancellation.
inline double gaussian_overlap_upper(const ConversionPair& pair, double b, double x) {
    const auto s = overlap_shape(pair, b);
    return std::exp(s.log_k + s.shape.log_sf(x));
}

//------------------------------------------------------------------------------
// Tangency thresholds
//------------------------------------------------------------------------------

enum class Threshold { Alpha, Beta };

struct ThresholdResult {
    double x = 0.0;
    double residual = 0.0;  // |log lhs - log rhs|
};

namespace detail {

// alpha: log(N_P/G_P) - log(N_T/G_T); beta: the same with survival functions.
inline double threshold_gap(const GaussianSpec& np, const GaussianSpec& nt, Threshold which, double x) {
    const double sp = np.sd(), st = nt.sd();
    if (which == Threshold::Alpha)
        return (normal::log_reversed_hazard(np.z(x)) - std::log(sp)) -
               (normal::log_reversed_hazard(nt.z(x)) - std::log(st));
    return (normal::log_reversed_hazard(-np.z(x)) - std::log(sp)) -
           (normal::log_reversed_hazard(-nt.z(x)) - std::log(st));
}

}  // namespace detail

/// Unique solution of N_P/N_{P,Q,b} = G_P/G_{P,Q,b} (alpha, C > 1) or of
/// N_P/N_{P,Q,b} = (1-G_P)/(1-G_{P,Q,b}) (beta, C < 1).
inline ThresholdResult solve_threshold(const ConversionPair& pair, double b, Threshold which) {
    const auto kind = pair.regime.kind;
    if (which == Threshold::Alpha && kind != RegimeKind::RatioGreater)
        throw RegimeError("alpha threshold needs H(P)/V(P) > H(Q)/V(Q), got " + std::string(to_string(kind)));
    if (which == Threshold::Beta && kind != RegimeKind::RatioLess)
        throw RegimeError("beta threshold needs H(P)/V(P) < H(Q)/V(Q), got " + std::string(to_string(kind)));
    const GaussianSpec np = pair.source_gaussian();
    const GaussianSpec nt = pair.target_gaussian(b);
    const double wide = std::max(np.sd(), nt.sd());
    // With unequal means the crossing can sit about |mean gap| / |C - 1|
    // away from both means, in either tail.
    const double c = nt.variance / np.variance;
    const double reach = 4.0 * std::abs(nt.mean - np.mean) * std::max(c, 1.0) / std::abs(c - 1.0);
    const double lo = std::min(np.mean, nt.mean) - 40.0 * wide - reach;
    const double hi = std::max(np.mean, nt.mean) + 40.0 * wide + reach;
    auto gap = [&](double x) { return detail::threshold_gap(np, nt, which, x); };

    constexpr int kGrid = 2000;
    int changes = 0;
    double blo = lo, bhi = hi;
    double prev_x = lo, prev_g = gap(lo);
    for (int i = 1; i <= kGrid; ++i) {
        const double x = lo + (hi - lo) * i / kGrid;
        const double g = gap(x);
        if ((prev_g > 0.0) != (g > 0.0)) {
            ++changes;
            blo = prev_x;
            bhi = x;
        }
        prev_x = x;
        prev_g = g;
    }
    if (changes != 1)
        throw SolverError("threshold: expected one sign change on [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "], found " + std::to_string(changes) + " (b = " +
                          std::to_string(b) + ")");
    const bool lo_positive = gap(blo) > 0.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (blo + bhi);
        if (mid <= blo || mid >= bhi) break;
        ((gap(mid) > 0.0) == lo_positive ? blo : bhi) = mid;
    }
    const double x = std::abs(gap(blo)) <= std::abs(gap(bhi)) ? blo : bhi;
    return {x, std::abs(gap(x))};
}

//------------------------------------------------------------------------------
// Limit curves
//------------------------------------------------------------------------------

/// C > 1: sqrt(G_P(alpha) G_{P,Q,b}(alpha)) + I(inf) - I(alpha).
inline double f1_limit(const ConversionPair& pair, double b) {
    if (pair.regime.kind != RegimeKind::RatioGreater) throw RegimeError("f1_limit needs RatioGreater");
    const double alpha = solve_threshold(pair, b, Threshold::Alpha).x;
    const auto np = pair.source_gaussian();
    const auto nt = pair.target_gaussian(b);
    const double chord = std::exp(0.5 * (np.log_cdf(alpha) + nt.log_cdf(alpha)));
    return std::clamp(chord + gaussian_overlap_upper(pair, b, alpha), 0.0, 1.0);
}

/// C < 1: I(beta) + sqrt((1 - G_P(beta)) (1 - G_{P,Q,b}(beta))).
inline double f2_limit(const ConversionPair& pair, double b) {
    if (pair.regime.kind != RegimeKind::RatioLess) throw RegimeError("f2_limit needs RatioLess");
    const double beta = solve_threshold(pair, b, Threshold::Beta).x;
    const auto np = pair.source_gaussian();
    const auto nt = pair.target_gaussian(b);
    const double chord = std::exp(0.5 * (np.log_sf(beta) + nt.log_sf(beta)));
    return std::clamp(gaussian_overlap(pair, b, beta) + chord, 0.0, 1.0);
}

/// C = 1: 1 for b <= 0, exp(-(H(Q) b)^2 / (8 V(P))) for b > 0.
inline double feq_limit(const ConversionPair& pair, double b) {
    if (pair.regime.kind != RegimeKind::RatioEqual) throw RegimeError("feq_limit needs RatioEqual");
    if (b <= 0.0) return 1.0;
    const double m = pair.target.h * b;
    return std::exp(-m * m / (8.0 * pair.source.v));
}

/// Uniform target: sqrt(1 - G_P(H(Q) b)).
inline double uniform_target_limit(const ConversionPair& pair, double b) {
    if (pair.regime.kind != RegimeKind::TargetUniform) throw RegimeError("uniform_target_limit needs TargetUniform");
    return std::exp(0.5 * normal::log_sf(pair.target.h * b / std::sqrt(pair.source.v)));
}

/// Uniform source: sqrt(G_{P,Q,b}(0)) = sqrt(G(-H(Q)^{3/2} b / sqrt(H(P) V(Q)))).
inline double uniform_source_limit(const ConversionPair& pair, double b) {
    if (pair.regime.kind != RegimeKind::SourceUniform) throw RegimeError("uniform_source_limit needs SourceUniform");
    const double hq = pair.target.h;
    return std::exp(0.5 * normal::log_cdf(-hq * std::sqrt(hq) * b / std::sqrt(pair.source.h * pair.target.v)));
}

/// Limit fidelity at the critical first-order rate, dispatched on regime.
inline double critical_limit(const ConversionPair& pair, double b) {
    switch (pair.regime.kind) {
        case RegimeKind::SourceUniform: return uniform_source_limit(pair, b);
        case RegimeKind::TargetUniform: return uniform_target_limit(pair, b);
        case RegimeKind::RatioGreater: return f1_limit(pair, b);
        case RegimeKind::RatioLess: return f2_limit(pair, b);
        case RegimeKind::RatioEqual: return feq_limit(pair, b);
    }
    return 0.0;
}

/// lim F^D(P^n -> Q^{a n + b sqrt(n)}). Off the critical rate the limit is
/// 1 below and 0 above, independent of b.
inline double limit_fidelity(const ConversionPair& pair, double a, double b) {
    if (!(a > 0.0)) throw InvalidInput("limit_fidelity: first-order rate must be positive");
    const double crit = pair.first_order_rate();
    if (std::abs(a - crit) > kRatioTolerance * crit) return a < crit ? 1.0 : 0.0;
    return critical_limit(pair, b);
}

inline double limit_fidelity(const FiniteDist& p, const FiniteDist& q, double a, double b) {
    return limit_fidelity(make_pair(p, q), a, b);
}

//------------------------------------------------------------------------------
// Second-order rates
//------------------------------------------------------------------------------

struct RateResult {
    double a = 0.0;   // H(P)/H(Q)
    double r2 = 0.0;  // L = a n + r2 sqrt(n) + o(sqrt(n))
    ConversionRegime regime;
    std::optional<double> threshold;  // alpha or beta at b = r2
    double residual = 0.0;            // |limit(r2) - nu|
};

/// The unique b with critical_limit(b) = nu, by bisection on the
/// non-increasing curve.
inline RateResult second_order_rate(const ConversionPair& pair, double nu) {
    if (!(nu > 0.0 && nu < 1.0)) throw InvalidInput("second_order_rate: nu must lie in (0, 1)");
    auto curve = [&](double b) { return critical_limit(pair, b); };

    double lo = -1.0, hi = 1.0;
    for (int k = 0; curve(lo) < nu; ++k) {
        if (k > 40) throw SolverError("second_order_rate: no lower bracket");
        hi = lo;
        lo *= 2.0;
    }
    for (int k = 0; curve(hi) > nu; ++k) {
        if (k > 40) throw SolverError("second_order_rate: no upper bracket");
        lo = hi;
        hi *= 2.0;
    }
    double flo = curve(lo);
    for (int it = 0; it < 300; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double f = curve(mid);
        if (f >= nu) {
            lo = mid;
            flo = f;
        } else {
            hi = mid;
        }
    }
    const double fhi = curve(hi);
    const double b = std::abs(flo - nu) <= std::abs(fhi - nu) ? lo : hi;

    RateResult r;
    r.a = pair.first_order_rate();
    r.r2 = b;
    r.regime = pair.regime;
    r.residual = std::abs(curve(b) - nu);
    if (pair.regime.kind == RegimeKind::RatioGreater) r.threshold = solve_threshold(pair, b, Threshold::Alpha).x;
    if (pair.regime.kind == RegimeKind::RatioLess) r.threshold = solve_threshold(pair, b, Threshold::Beta).x;
    return r;
}

inline RateResult second_order_rate(const FiniteDist& p, const FiniteDist& q, double nu) {
    return second_order_rate(make_pair(p, q), nu);
}

/// Closed-form inverses, where they exist.
inline std::optional<double> closed_form_rate(const ConversionPair& pair, double nu) {
    const auto& s = pair.source;
    const auto& t = pair.target;
    switch (pair.regime.kind) {
        case RegimeKind::TargetUniform: return -std::sqrt(s.v) * normal::quantile(nu * nu) / t.h;
        case RegimeKind::SourceUniform:
            return -std::sqrt(s.h * t.v) * normal::quantile(nu * nu) / (t.h * std::sqrt(t.h));
        case RegimeKind::RatioEqual: return std::sqrt(8.0 * s.v * std::log(1.0 / nu)) / t.h;
        default: return std::nullopt;
    }
}

/// a n + r2 sqrt(n); no third-order term.
inline double ldn_expand(const ConversionPair& pair, double nu, std::size_t n) {
    if (n == 0) return 0.0;
    const auto r = second_order_rate(pair, nu);
    const double dn = static_cast<double>(n);
    return r.a * dn + r.r2 * std::sqrt(dn);
}

}  // namespace rngrate
