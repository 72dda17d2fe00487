#pragma once

// Standard normal helpers with log-domain tails.

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/distributions/normal.hpp>

namespace rngrate::normal {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

inline double log_pdf(double z) { return -0.5 * z * z - kLogSqrt2Pi; }
inline double pdf(double z) { return std::exp(log_pdf(z)); }

inline double cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// log Phi(z), accurate far into the lower tail.
inline double log_cdf(double z) {
    if (z > 6.0) return std::log1p(-0.5 * std::erfc(z / std::numbers::sqrt2));
    if (z > -30.0) return std::log(0.5 * std::erfc(-z / std::numbers::sqrt2));
    if (z == -std::numeric_limits<double>::infinity()) return -std::numeric_limits<double>::infinity();
    // Mills-ratio series: Phi(z) ~ phi(z)/|z| * sum_k (-1)^k (2k-1)!! / z^(2k)
    const double r = 1.0 / (z * z);
    double term = 1.0, sum = 1.0;
    for (int k = 1; k <= 7; ++k) {
        term *= -static_cast<double>(2 * k - 1) * r;
        sum += term;
    }
    return log_pdf(z) - std::log(-z) + std::log(sum);
}

/// log(phi(z) / Phi(z)), without the cancellation of log_pdf - log_cdf in
/// the lower tail.
inline double log_reversed_hazard(double z) {
    if (z > -30.0) return log_pdf(z) - log_cdf(z);
    const double r = 1.0 / (z * z);
    double term = 1.0, sum = 1.0;
    for (int k = 1; k <= 7; ++k) {
        term *= -static_cast<double>(2 * k - 1) * r;
        sum += term;
    }
    return std::log(-z) - std::log(sum);
}

/// log(1 - Phi(z)).
inline double log_sf(double z) { return log_cdf(-z); }

inline double quantile(double p) {
    static const boost::math::normal_distribution<double> standard;
    return boost::math::quantile(standard, p);
}

}  // namespace rngrate::normal
