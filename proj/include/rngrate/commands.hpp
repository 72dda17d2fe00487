#pragma once

// Command implementations behind the rngrate CLI. Each writes its record to
// an output stream and returns the process exit status:
//   0 success, 1 usage or I/O error, 2 regime error.

#include <ostream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "rngrate/experiments.hpp"

namespace rngrate::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRegime = 2;

namespace detail {

inline nlohmann::ordered_json number(double x) {
    if (!std::isfinite(x)) return fmt12(x);
    return nlohmann::ordered_json::parse(fmt12(x));
}

inline std::string join(const std::vector<double>& v, char sep = ' ') {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? std::string(1, sep) : "") + fmt12(v[i]);
    return s;
}

}  // namespace detail

inline int cmd_rate(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
    if (!cfg.nu) {
        err << "rate: --nu is required\n";
        return kExitUsage;
    }
    const auto pair = make_pair(cfg.source, cfg.target);
    const auto r = second_order_rate(pair, *cfg.nu);
    if (cfg.format == OutputFormat::Json) {
        nlohmann::ordered_json j;
        j["a"] = detail::number(r.a);
        j["r2"] = detail::number(r.r2);
        j["regime"] = std::string(to_string(r.regime.kind));
        j["c_pq"] = detail::number(r.regime.c_pq);
        j["threshold"] = r.threshold ? detail::number(*r.threshold) : nlohmann::ordered_json();
        j["residual"] = detail::number(r.residual);
        out << j.dump(2) << "\n";
    } else {
        out << "a,r2,regime,c_pq,threshold,residual\n"
            << fmt12(r.a) << ',' << fmt12(r.r2) << ',' << to_string(r.regime.kind) << ',' << fmt12(r.regime.c_pq)
            << ',' << (r.threshold ? fmt12(*r.threshold) : "") << ',' << fmt12(r.residual) << "\n";
    }
    return kExitOk;
}

inline int cmd_curve(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
    if (cfg.b_grid.empty()) {
        err << "curve: --b-grid is required\n";
        return kExitUsage;
    }
    const auto pair = make_pair(cfg.source, cfg.target);
    const auto rows = curve_rows(pair, cfg.b_grid);
    if (cfg.format == OutputFormat::Json) {
        auto j = nlohmann::ordered_json::array();
        for (const auto& r : rows)
            j.push_back({{"b", detail::number(r.b)},
                         {"fidelity", detail::number(r.fidelity)},
                         {"regime", std::string(to_string(r.regime))}});
        out << j.dump(2) << "\n";
    } else {
        out << "b,fidelity,regime\n";
        for (const auto& r : rows) out << fmt12(r.b) << ',' << fmt12(r.fidelity) << ',' << to_string(r.regime) << "\n";
    }
    return kExitOk;
}

/// x, G_P(x), G_{P,Q,b}(x), A(x) for the regime's attainment curve.
inline int cmd_attainment(const ExperimentConfig& cfg, double b, const std::vector<double>& x_grid,
                          std::ostream& out) {
    const auto pair = make_pair(cfg.source, cfg.target);
    const auto rows = attainment_rows(pair, b, x_grid);
    if (cfg.format == OutputFormat::Json) {
        auto j = nlohmann::ordered_json::array();
        for (const auto& r : rows)
            j.push_back({{"x", detail::number(r.x)},
                         {"G_P", detail::number(r.g_p)},
                         {"G_PQb", detail::number(r.g_pqb)},
                         {"A", detail::number(r.a)}});
        out << j.dump(2) << "\n";
    } else {
        out << "x,G_P,G_PQb,A\n";
        for (const auto& r : rows)
            out << fmt12(r.x) << ',' << fmt12(r.g_p) << ',' << fmt12(r.g_pqb) << ',' << fmt12(r.a) << "\n";
    }
    return kExitOk;
}

inline int cmd_finite_n(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
    if (cfg.n_grid.empty()) {
        err << "finite-n: --n-grid is required\n";
        return kExitUsage;
    }
    if (!cfg.b && !cfg.nu) {
        err << "finite-n: one of --b or --nu is required\n";
        return kExitUsage;
    }
    const auto pair = make_pair(cfg.source, cfg.target);
    const double a = cfg.rate_factor * pair.first_order_rate();
    const double b = cfg.b ? *cfg.b : second_order_rate(pair, *cfg.nu).r2;
    const auto rows = finite_n_rows(cfg.source, cfg.target, a, b, cfg.n_grid, cfg.rounding);
    if (cfg.format == OutputFormat::Json) {
        auto j = nlohmann::ordered_json::array();
        for (const auto& r : rows)
            j.push_back({{"n", r.n},
                         {"L", r.L},
                         {"fm", detail::number(r.fm)},
                         {"limit", detail::number(r.limit)},
                         {"gap", detail::number(r.gap)}});
        out << j.dump(2) << "\n";
    } else {
        out << "n,L,fm,limit,gap\n";
        for (const auto& r : rows)
            out << r.n << ',' << r.L << ',' << fmt12(r.fm) << ',' << fmt12(r.limit) << ',' << fmt12(r.gap) << "\n";
    }
    return kExitOk;
}

struct OneshotOptions {
    std::size_t source_power = 1;
    std::size_t target_power = 1;
};

/// F^D, F^M, their gap and the optimal map; with nu also L^D(P, Q | nu).
inline int cmd_oneshot(const ExperimentConfig& cfg, const OneshotOptions& opt, std::ostream& out) {
    const FiniteDist p = product_power(cfg.source, opt.source_power);
    const FiniteDist q = product_power(cfg.target, opt.target_power);
    const auto det = max_fidelity_det(p, q);
    const auto major = max_fidelity_major(p, q);
    std::optional<std::size_t> l_star;
    if (cfg.nu) l_star = oneshot_L(p, cfg.target, *cfg.nu);

    std::vector<double> assignment(det.map.assignment.begin(), det.map.assignment.end());
    std::vector<double> breakpoints(major.active_breakpoints.begin(), major.active_breakpoints.end());
    if (cfg.format == OutputFormat::Json) {
        nlohmann::ordered_json j;
        j["fd"] = detail::number(det.fidelity);
        j["fm"] = detail::number(major.fidelity);
        j["gap"] = detail::number(major.fidelity - det.fidelity);
        j["map"] = det.map.assignment;
        j["breakpoints"] = nlohmann::ordered_json::array();
        for (double x : breakpoints) j["breakpoints"].push_back(detail::number(x));
        if (l_star) j["L"] = *l_star;
        auto blocks = nlohmann::ordered_json::array();
        for (const auto& blk : major.optimizer.blocks())
            blocks.push_back({{"log_value", detail::number(blk.log_value)},
                              {"log_count", detail::number(blk.log_count)},
                              {"count", blk.count ? nlohmann::ordered_json(*blk.count) : nlohmann::ordered_json()}});
        j["optimizer"] = blocks;
        out << j.dump(2) << "\n";
    } else {
        out << "fd," << fmt12(det.fidelity) << "\n"
            << "fm," << fmt12(major.fidelity) << "\n"
            << "gap," << fmt12(major.fidelity - det.fidelity) << "\n"
            << "map," << detail::join(assignment) << "\n"
            << "breakpoints," << detail::join(breakpoints) << "\n";
        if (l_star) out << "L," << *l_star << "\n";
        out << "block,log_value,log_count,count\n";
        for (const auto& blk : major.optimizer.blocks())
            out << "block," << fmt12(blk.log_value) << ',' << fmt12(blk.log_count) << ','
                << (blk.count ? std::to_string(*blk.count) : "") << "\n";
    }
    return kExitOk;
}

/// Runs the validation suites; exit 1 iff any case failed.
inline int cmd_validate(std::ostream& out, const MajorSolver& solver = default_major_solver(),
                        std::uint64_t seed = 20240601) {
    const auto reports = run_validation(solver, seed);
    bool ok = true;
    for (const auto& r : reports) {
        out << r.name << ": " << (r.cases - r.failures) << "/" << r.cases << " passed";
        if (r.failures) {
            ok = false;
            out << " FAILED (first: " << r.first_failure << ")";
        }
        out << "\n";
    }
    out << (ok ? "validate: all suites passed\n" : "validate: FAILURES\n");
    return ok ? kExitOk : kExitUsage;
}

/// Optimizer with its fidelity scaled down by 2%; exercises cmd_validate's
/// failure path.
inline MajorSolver faulty_major_solver() {
    return [](const BlockDist& s, const BlockDist& t) {
        auto sol = max_fidelity_major(s, t);
        sol.fidelity *= 0.98;
        return sol;
    };
}

}  // namespace rngrate::cli
