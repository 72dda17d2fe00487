#pragma once

// Attainment curves: distribution functions A on the real line, built from
// scaled Gaussian CDF pieces, whose density has the limit fidelity with
// N_{P,Q,b}. The fidelity integral is evaluated by adaptive Gauss-Kronrod
// quadrature, which is also the numerical route for I_{P,Q,b}.

#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rngrate/asymptotics.hpp"

namespace rngrate {

/// A(x) = offset + scale * Phi((x - gauss.mean) / gauss.sd) on [lo, hi].
struct CurveSegment {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    double offset = 0.0;
    double scale = 0.0;
    GaussianSpec gauss;

    double value(double x) const {
        if (scale == 0.0) return offset;
        return offset + scale * gauss.cdf(x);
    }
    double limit_lo() const { return lo == -std::numeric_limits<double>::infinity() ? offset : value(lo); }
    double limit_hi() const {
        return hi == std::numeric_limits<double>::infinity() ? offset + scale : value(hi);
    }
};

class AttainmentCurve {
public:
    static constexpr double kTolerance = 1e-9;

    explicit AttainmentCurve(std::vector<CurveSegment> segments) : segments_(std::move(segments)) {
        constexpr double inf = std::numeric_limits<double>::infinity();
        if (segments_.empty()) throw InvalidInput("attainment curve needs at least one segment");
        if (segments_.front().lo != -inf || segments_.back().hi != inf)
            throw InvalidInput("attainment curve must cover the whole real line");
        for (std::size_t i = 0; i < segments_.size(); ++i) {
            const auto& s = segments_[i];
            if (s.scale < 0.0 || !(s.lo < s.hi)) throw InvalidInput("attainment curve is not increasing");
            if (i + 1 < segments_.size()) {
                const auto& t = segments_[i + 1];
                if (s.hi != t.lo) throw InvalidInput("attainment segments are not contiguous");
                if (std::abs(s.limit_hi() - t.limit_lo()) > kTolerance)
                    throw InvalidInput("attainment curve is discontinuous at x = " + std::to_string(s.hi));
            }
        }
        if (std::abs(segments_.front().limit_lo()) > kTolerance ||
            std::abs(segments_.back().limit_hi() - 1.0) > kTolerance)
            throw InvalidInput("attainment curve must rise from 0 to 1");
    }

    double operator()(double x) const {
        for (const auto& s : segments_)
            if (x <= s.hi) return s.value(x);
        return segments_.back().value(x);
    }

    const std::vector<CurveSegment>& segments() const { return segments_; }

private:
    std::vector<CurveSegment> segments_;
};

namespace detail {

/// int_lo^hi sqrt(scale * pdf_a(x) * pdf_b(x)) dx. The integrand is a
/// Gaussian bump; quadrature is confined to +-40 of its widths and split
/// into pieces two widths long.
inline double bhattacharyya_integral(const GaussianSpec& a, double scale, const GaussianSpec& b, double lo,
                                     double hi) {
    if (scale <= 0.0) return 0.0;
    const double va = a.variance, vb = b.variance;
    const double center = (a.mean * vb + b.mean * va) / (va + vb);
    const double width = std::sqrt(2.0 * va * vb / (va + vb));
    const double from = std::max(lo, center - 40.0 * width);
    const double to = std::min(hi, center + 40.0 * width);
    if (!(from < to)) return 0.0;
    const double log_scale = std::log(scale);
    auto integrand = [&](double x) { return std::exp(0.5 * (log_scale + a.log_pdf(x) + b.log_pdf(x))); };
    using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;
    const int pieces = std::max(1, static_cast<int>(std::ceil((to - from) / (2.0 * width))));
    double total = 0.0;
    for (int k = 0; k < pieces; ++k) {
        const double x0 = from + (to - from) * k / pieces;
        const double x1 = k + 1 == pieces ? to : from + (to - from) * (k + 1) / pieces;
        total += Quad::integrate(integrand, x0, x1, 12, 1e-14);
    }
    return total;
}

}  // namespace detail

/// F(dA/dx, reference) = int sqrt(A'(x)) sqrt(reference(x)) dx.
inline double attainment_fidelity(const AttainmentCurve& curve, const GaussianSpec& reference) {
    double f = 0.0;
    for (const auto& s : curve.segments()) f += detail::bhattacharyya_integral(s.gauss, s.scale, reference, s.lo, s.hi);
    return f;
}

inline double attainment_fidelity(const AttainmentCurve& curve, const ConversionPair& pair, double b) {
    return attainment_fidelity(curve, pair.target_gaussian(b));
}

/// Numerical I_{P,Q,b}(x).
inline double overlap_quadrature(const ConversionPair& pair, double b, double x) {
    return detail::bhattacharyya_integral(pair.source_gaussian(), 1.0, pair.target_gaussian(b),
                                          -std::numeric_limits<double>::infinity(), x);
}

inline AttainmentCurve gaussian_cdf_curve(const GaussianSpec& g) {
    return AttainmentCurve({CurveSegment{-std::numeric_limits<double>::infinity(),
                                         std::numeric_limits<double>::infinity(), 0.0, 1.0, g}});
}

/// A_1: G_P(alpha)/G_{P,Q,b}(alpha) * G_{P,Q,b} below alpha, G_P above.
inline AttainmentCurve a1_curve(const ConversionPair& pair, double b) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const double alpha = solve_threshold(pair, b, Threshold::Alpha).x;
    const auto np = pair.source_gaussian();
    const auto nt = pair.target_gaussian(b);
    const double k = std::exp(np.log_cdf(alpha) - nt.log_cdf(alpha));
    return AttainmentCurve({CurveSegment{-inf, alpha, 0.0, k, nt}, CurveSegment{alpha, inf, 0.0, 1.0, np}});
}

/// A_2: G_P below beta, 1 - (1-G_P(beta))/(1-G_{P,Q,b}(beta)) (1 - G_{P,Q,b}) above.
inline AttainmentCurve a2_curve(const ConversionPair& pair, double b) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const double beta = solve_threshold(pair, b, Threshold::Beta).x;
    const auto np = pair.source_gaussian();
    const auto nt = pair.target_gaussian(b);
    const double k = std::exp(np.log_sf(beta) - nt.log_sf(beta));
    return AttainmentCurve({CurveSegment{-inf, beta, 0.0, 1.0, np}, CurveSegment{beta, inf, 1.0 - k, k, nt}});
}

/// The attaining curve for the pair's regime: A_1, A_2, or for C = 1 G_P when
/// b > 0 and the target CDF itself when b <= 0.
inline AttainmentCurve attainment_curve_for(const ConversionPair& pair, double b) {
    switch (pair.regime.kind) {
        case RegimeKind::RatioGreater: return a1_curve(pair, b);
        case RegimeKind::RatioLess: return a2_curve(pair, b);
        case RegimeKind::RatioEqual:
            return b > 0.0 ? gaussian_cdf_curve(pair.source_gaussian()) : gaussian_cdf_curve(pair.target_gaussian(b));
        default: throw RegimeError("attainment curves need both distributions non-uniform");
    }
}

}  // namespace rngrate
