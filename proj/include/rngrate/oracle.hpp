#pragma once

// Brute-force reference for F^M on tiny targets. Used by the test suites and
// the `validate` command; the production path in majorization.hpp never
// includes it.
//
// P' is taken sorted and paired with the sorted target (rearrangement
// inequality), and the concave objective is maximized by nested golden-section
// searches over the partial sums S_1, ..., S_{m-1}. Each level maximizes over
// the exact slice of the convex feasible set {S_l >= C_P(l), p' decreasing},
// so every nested value function is concave and unimodal.

#include <cmath>
#include <limits>
#include <vector>

#include "rngrate/dist.hpp"

namespace rngrate {

namespace detail {

class OracleSearch {
public:
    OracleSearch(std::vector<double> c, std::vector<double> q, int iters)
        : c_(std::move(c)), q_(std::move(q)), m_(q_.size()), iters_(iters) {}

    double run() { return level(1, 0.0, 0.0, true); }

private:
    static constexpr double kNegInf = -std::numeric_limits<double>::infinity();

    double term(std::size_t l, double p) const { return std::sqrt(std::max(0.0, p) * q_[l - 1]); }

    // Best objective over S_l..S_{m-1} given S_{l-1} = prev and
    // S_{l-2} = prev2; `first` marks l == 1 where p'_1 is uncapped.
    double level(std::size_t l, double prev, double prev2, bool first) const {
        const double cap = first ? 1.0 : prev - prev2;  // p'_l <= p'_{l-1}
        if (l == m_) {
            const double p = 1.0 - prev;
            if (p > cap + 1e-12) return kNegInf;
            return term(l, p);
        }
        double lo = std::max(c_[l - 1], prev);
        for (std::size_t j = l + 1; j <= m_; ++j) {
            const double cj = j == m_ ? 1.0 : c_[j - 1];
            const double k = static_cast<double>(j - l);
            lo = std::max(lo, (cj + k * prev) / (k + 1.0));
        }
        const double hi = std::min(1.0, prev + cap);
        if (lo > hi + 1e-12) return kNegInf;
        const double top = std::max(lo, hi);

        auto value = [&](double s) { return term(l, s - prev) + level(l + 1, s, prev, false); };

        constexpr double kInvPhi = 0.6180339887498949;
        double a = lo, b = top;
        double x1 = b - kInvPhi * (b - a), x2 = a + kInvPhi * (b - a);
        double f1 = value(x1), f2 = value(x2);
        for (int it = 0; it < iters_; ++it) {
            if (f1 < f2) {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + kInvPhi * (b - a);
                f2 = value(x2);
            } else {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - kInvPhi * (b - a);
                f1 = value(x1);
            }
        }
        return std::max({f1, f2, value(lo), value(top)});
    }

    std::vector<double> c_;
    std::vector<double> q_;
    std::size_t m_;
    int iters_;
};

}  // namespace detail

/// Reference F^M(source -> target) for targets with at most 4 points,
/// accurate to about 1e-8.
inline double oracle_max_fidelity(const FiniteDist& source, const FiniteDist& target, int iters = 48) {
    if (target.size() > 4) throw LimitExceeded("oracle_max_fidelity: target support must be <= 4");
    const auto q = target.sorted_desc();
    const auto p = source.sorted_desc();
    std::vector<double> c(q.size(), 1.0);
    double acc = 0.0;
    for (std::size_t l = 0; l < q.size(); ++l) {
        if (l < p.size()) acc += p[l];
        c[l] = std::min(1.0, acc);
    }
    if (q.size() == 1) return 1.0;
    return std::min(1.0, detail::OracleSearch(std::move(c), q, iters).run());
}

}  // namespace rngrate
