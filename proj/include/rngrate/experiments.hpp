#pragma once

// Experiment configuration, grid sweeps (limit curves, attainment tables,
// finite-n convergence) and the cross-module validation suites.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rngrate/asymptotics.hpp"
#include "rngrate/attainment.hpp"
#include "rngrate/detmap.hpp"
#include "rngrate/dist.hpp"
#include "rngrate/majorization.hpp"
#include "rngrate/oracle.hpp"
#include "rngrate/parallel.hpp"

namespace rngrate {

enum class OutputFormat { Csv, Json };
enum class Rounding { Nearest, Floor };

struct ExperimentConfig {
    FiniteDist source;
    FiniteDist target;
    std::optional<double> nu;
    std::vector<double> b_grid;
    std::vector<std::size_t> n_grid;
    std::string output_path;
    OutputFormat format = OutputFormat::Csv;

    std::optional<double> b;         // fixed second-order rate for finite-n
    double rate_factor = 1.0;        // first-order rate as a multiple of H(P)/H(Q)
    Rounding rounding = Rounding::Nearest;
};

/// 12 significant digits; the fixed format keeps sweep outputs byte-stable.
inline std::string fmt12(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x == 0.0 ? 0.0 : x);
    return buf;
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_real(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw InvalidInput("cannot parse number '" + s + "'");
    }
    if (used != s.size()) throw InvalidInput("cannot parse number '" + s + "'");
    return v;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(trim(cur));
    return out;
}

}  // namespace detail

/// "lo:hi:step" (inclusive) or a comma list.
inline std::vector<double> parse_real_grid(const std::string& text) {
    const std::string s = detail::trim(text);
    std::vector<double> out;
    if (s.find(':') != std::string::npos) {
        const auto parts = detail::split(s, ':');
        if (parts.size() != 3) throw InvalidInput("grid must be lo:hi:step, got '" + s + "'");
        const double lo = detail::parse_real(parts[0]), hi = detail::parse_real(parts[1]),
                     step = detail::parse_real(parts[2]);
        if (!(step > 0.0) || hi < lo) throw InvalidInput("grid needs step > 0 and hi >= lo");
        const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
        if (count > 10'000'000) throw InvalidInput("grid too large");
        for (std::size_t i = 0; i < count; ++i) out.push_back(lo + step * static_cast<double>(i));
    } else {
        for (const auto& p : detail::split(s, ','))
            if (!p.empty()) out.push_back(detail::parse_real(p));
    }
    if (out.empty()) throw InvalidInput("grid is empty");
    if (!std::is_sorted(out.begin(), out.end())) throw InvalidInput("grid must be sorted");
    return out;
}

inline std::vector<std::size_t> parse_int_grid(const std::string& text) {
    std::vector<std::size_t> out;
    for (double v : parse_real_grid(text)) {
        if (v < 1.0 || v != std::floor(v)) throw InvalidInput("n grid entries must be positive integers");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

/// Flat "key = value" lines; '#' starts a comment.
inline std::map<std::string, std::string> parse_config_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw InvalidInput("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = detail::trim(line.substr(0, eq));
        std::replace(key.begin(), key.end(), '-', '_');
        kv[key] = detail::trim(line.substr(eq + 1));
    }
    return kv;
}

inline std::map<std::string, std::string> load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

//------------------------------------------------------------------------------
// Sweeps
//------------------------------------------------------------------------------

struct CurveRow {
    double b = 0.0;
    double fidelity = 0.0;
    RegimeKind regime = RegimeKind::RatioEqual;
};

inline std::vector<CurveRow> curve_rows(const ConversionPair& pair, std::span<const double> b_grid) {
    return parallel_map(b_grid.size(), [&](std::size_t i) {
        return CurveRow{b_grid[i], critical_limit(pair, b_grid[i]), pair.regime.kind};
    });
}

struct AttainmentRow {
    double x = 0.0;
    double g_p = 0.0;
    double g_pqb = 0.0;
    double a = 0.0;
};

inline std::vector<AttainmentRow> attainment_rows(const ConversionPair& pair, double b, std::span<const double> x_grid) {
    const auto curve = attainment_curve_for(pair, b);
    const auto np = pair.source_gaussian();
    const auto nt = pair.target_gaussian(b);
    std::vector<AttainmentRow> rows;
    rows.reserve(x_grid.size());
    for (double x : x_grid) rows.push_back({x, np.cdf(x), nt.cdf(x), curve(x)});
    return rows;
}

struct FiniteNRow {
    std::size_t n = 0;
    std::size_t L = 0;
    double fm = 0.0;
    double limit = 0.0;
    double gap = 0.0;
};

inline std::size_t copy_count(double a, double b, std::size_t n, Rounding rounding) {
    const double dn = static_cast<double>(n);
    const double raw = a * dn + b * std::sqrt(dn);
    const double l = rounding == Rounding::Nearest ? std::round(raw) : std::floor(raw);
    return l <= 0.0 ? 0 : static_cast<std::size_t>(l);
}

/// F^M(P^n -> Q^L) with L = a n + b sqrt(n) rounded, against the limit value.
inline std::vector<FiniteNRow> finite_n_rows(const FiniteDist& p, const FiniteDist& q, double a, double b,
                                              std::span<const std::size_t> n_grid,
                                              Rounding rounding = Rounding::Nearest) {
    const auto pair = make_pair(p, q);
    const double limit = limit_fidelity(pair, a, b);
    return parallel_map(n_grid.size(), [&](std::size_t i) {
        FiniteNRow row;
        row.n = n_grid[i];
        row.L = copy_count(a, b, row.n, rounding);
        row.fm = row.L == 0 ? 1.0 : max_fidelity_major(iid_power(p, row.n), iid_power(q, row.L)).fidelity;
        row.limit = limit;
        row.gap = row.fm - limit;
        return row;
    });
}

//------------------------------------------------------------------------------
// Validation suites
//------------------------------------------------------------------------------

/// Normalized exponential weights; occasionally zeroes an entry.
inline FiniteDist random_dist(std::mt19937_64& rng, std::size_t k) {
    std::exponential_distribution<double> e(1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> w(k);
    double total = 0.0;
    for (auto& x : w) {
        x = e(rng);
        if (k > 1 && u(rng) < 0.05) x = 0.0;
        total += x;
    }
    if (total <= 0.0) {
        w[0] = 1.0;
        total = 1.0;
    }
    for (auto& x : w) x /= total;
    return FiniteDist(std::move(w));
}

/// Random non-uniform distribution with 2..k points, all positive.
inline FiniteDist random_nonuniform(std::mt19937_64& rng, std::size_t kmax) {
    std::uniform_int_distribution<std::size_t> size(2, kmax);
    while (true) {
        const std::size_t k = size(rng);
        std::uniform_real_distribution<double> u(0.05, 1.0);
        std::vector<double> w(k);
        double total = 0.0;
        for (auto& x : w) total += (x = u(rng));
        for (auto& x : w) x /= total;
        FiniteDist d(std::move(w));
        if (stats(d).v > 1e-3) return d;
    }
}

struct SuiteReport {
    std::string name;
    std::size_t cases = 0;
    std::size_t failures = 0;
    std::string first_failure;

    void record(bool ok, const std::string& what) {
        ++cases;
        if (ok) return;
        if (failures++ == 0) first_failure = what;
    }
};

using MajorSolver = std::function<MajorSolution(const BlockDist&, const BlockDist&)>;

inline MajorSolver default_major_solver() {
    return [](const BlockDist& s, const BlockDist& t) { return max_fidelity_major(s, t); };
}

/// Representative pair per regime, in enum order.
inline std::vector<std::pair<FiniteDist, FiniteDist>> regime_showcase() {
    return {
        {FiniteDist({0.5, 0.5}), FiniteDist({0.8, 0.2})},  // SourceUniform
        {FiniteDist({0.8, 0.2}), FiniteDist({0.5, 0.5})},  // TargetUniform
        {FiniteDist({0.6, 0.4}), FiniteDist({0.8, 0.2})},  // RatioGreater
        {FiniteDist({0.8, 0.2}), FiniteDist({0.6, 0.4})},  // RatioLess
        {FiniteDist({0.8, 0.2}), FiniteDist({0.8, 0.2})},  // RatioEqual
    };
}

inline std::string describe(const FiniteDist& p) {
    std::string s = "(";
    for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "," : "") + fmt12(p[i]);
    return s + ")";
}

inline std::vector<SuiteReport> run_validation(const MajorSolver& solver = default_major_solver(),
                                               std::uint64_t seed = 20240601, std::size_t cases = 100) {
    std::vector<SuiteReport> out;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> size4(1, 4), size3(1, 3);

    {
        SuiteReport r{"oracle-equivalence", 0, 0, {}};
        for (std::size_t i = 0; i < cases; ++i) {
            const auto p = random_dist(rng, size4(rng)), q = random_dist(rng, size4(rng));
            const double fm = solver(BlockDist::from_finite(p), BlockDist::from_finite(q)).fidelity;
            const double fo = oracle_max_fidelity(p, q);
            r.record(std::abs(fm - fo) <= 1e-6, "F^M " + fmt12(fm) + " vs oracle " + fmt12(fo) + " for " +
                                                    describe(p) + " -> " + describe(q));
        }
        out.push_back(r);
    }
    {
        SuiteReport r{"dominance", 0, 0, {}};
        for (std::size_t i = 0; i < cases; ++i) {
            const auto p = random_dist(rng, size3(rng)), q = random_dist(rng, size3(rng));
            const double fd = max_fidelity_det(p, q, 1).fidelity;
            const double fm = solver(BlockDist::from_finite(p), BlockDist::from_finite(q)).fidelity;
            r.record(fd <= fm + 1e-9, "F^D " + fmt12(fd) + " > F^M " + fmt12(fm) + " for " + describe(p) +
                                          " -> " + describe(q));
        }
        out.push_back(r);
    }
    {
        SuiteReport r{"quadrature-identity", 0, 0, {}};
        std::uniform_real_distribution<double> bdist(-2.0, 2.0), xdist(-3.0, 3.0);
        std::size_t per_regime[5] = {0, 0, 0, 0, 0};
        std::size_t guard = 0;
        while ((per_regime[2] < cases / 5 || per_regime[3] < cases / 5) && ++guard < 100 * cases) {
            const auto pair = make_pair(random_nonuniform(rng, 4), random_nonuniform(rng, 4));
            const auto kind = pair.regime.kind;
            if (kind != RegimeKind::RatioGreater && kind != RegimeKind::RatioLess) continue;
            auto& count = per_regime[static_cast<int>(kind)];
            if (count >= cases / 5) continue;
            ++count;
            const double b = bdist(rng), x = xdist(rng);
            const double closed = gaussian_overlap(pair, b, x), quad = overlap_quadrature(pair, b, x);
            r.record(std::abs(closed - quad) <= 1e-9, "I closed " + fmt12(closed) + " vs quadrature " + fmt12(quad));
            const double lim = critical_limit(pair, b);
            const double att = attainment_fidelity(attainment_curve_for(pair, b), pair, b);
            r.record(std::abs(lim - att) <= 1e-8, std::string(to_string(kind)) + " limit " + fmt12(lim) +
                                                      " vs attainment " + fmt12(att));
        }
        for (std::size_t i = 0; i < cases / 5; ++i) {
            const auto p = random_nonuniform(rng, 4);
            auto perm = std::vector<double>(p.probs().begin(), p.probs().end());
            std::shuffle(perm.begin(), perm.end(), rng);
            perm.push_back(0.0);
            const auto pair = make_pair(p, FiniteDist(perm));
            const double b = bdist(rng);
            const double lim = feq_limit(pair, b);
            const double att = attainment_fidelity(attainment_curve_for(pair, b), pair, b);
            r.record(std::abs(lim - att) <= 1e-8, "RatioEqual limit " + fmt12(lim) + " vs attainment " + fmt12(att));
        }
        out.push_back(r);
    }
    {
        SuiteReport r{"inverse-consistency", 0, 0, {}};
        for (const auto& [p, q] : regime_showcase()) {
            const auto pair = make_pair(p, q);
            for (int k = 1; k <= 19; ++k) {
                const double nu = 0.05 * k;
                const auto rate = second_order_rate(pair, nu);
                const double back = limit_fidelity(pair, rate.a, rate.r2);
                r.record(std::abs(back - nu) <= 1e-8, std::string(to_string(pair.regime.kind)) + " nu " +
                                                          fmt12(nu) + " -> " + fmt12(back));
                if (const auto cf = closed_form_rate(pair, nu))
                    r.record(std::abs(*cf - rate.r2) <= 1e-9, std::string(to_string(pair.regime.kind)) +
                                                                  " closed form " + fmt12(*cf) + " vs " +
                                                                  fmt12(rate.r2));
            }
        }
        out.push_back(r);
    }
    return out;
}

}  // namespace rngrate
