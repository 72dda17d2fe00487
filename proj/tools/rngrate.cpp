// rngrate: one-shot and second-order random number conversion fidelities.
//
//   rngrate rate      --source 0.8,0.2 --target 0.6,0.4 --nu 0.9
//   rngrate curve     --source 0.8,0.2 --target 0.6,0.4 --b-grid -2:2:0.5
//   rngrate finite-n  --source 0.8,0.2 --target 0.6,0.4 --n-grid 50,100,200 --b 0
//   rngrate oneshot   --source 0.7,0.3 --target 0.6,0.4 --nu 0.9
//   rngrate validate

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "rngrate/commands.hpp"

namespace {

using namespace rngrate;

struct RawOptions {
    std::string config;
    std::string source;
    std::string target;
    std::string nu;
    std::string b_grid;
    std::string n_grid;
    std::string out;
    std::string format;
    std::string b;
    std::string rate_factor;
    std::string rounding;
};

void add_common(CLI::App* app, RawOptions& raw) {
    app->add_option("--config", raw.config, "flat key = value config file");
    app->add_option("--source", raw.source, "source distribution: inline list or file path");
    app->add_option("--target", raw.target, "target distribution: inline list or file path");
    app->add_option("--format", raw.format, "csv or json");
    app->add_option("--out", raw.out, "output path (default or '-': stdout)");
}

ExperimentConfig resolve(const RawOptions& raw) {
    std::map<std::string, std::string> kv;
    if (!raw.config.empty()) kv = load_config_file(raw.config);
    auto pick = [&](const std::string& flag, const char* key) -> std::string {
        if (!flag.empty()) return flag;
        auto it = kv.find(key);
        return it == kv.end() ? std::string{} : it->second;
    };
    ExperimentConfig cfg;
    const std::string source = pick(raw.source, "source"), target = pick(raw.target, "target");
    if (source.empty() || target.empty()) throw InvalidInput("--source and --target are required");
    cfg.source = load_dist(source);
    cfg.target = load_dist(target);
    if (auto s = pick(raw.nu, "nu"); !s.empty()) {
        cfg.nu = detail::parse_real(s);
        if (!(*cfg.nu > 0.0 && *cfg.nu <= 1.0)) throw InvalidInput("--nu must lie in (0, 1]");
    }
    if (auto s = pick(raw.b_grid, "b_grid"); !s.empty()) cfg.b_grid = parse_real_grid(s);
    if (auto s = pick(raw.n_grid, "n_grid"); !s.empty()) cfg.n_grid = parse_int_grid(s);
    if (auto s = pick(raw.b, "b"); !s.empty()) cfg.b = detail::parse_real(s);
    if (auto s = pick(raw.rate_factor, "rate_factor"); !s.empty()) cfg.rate_factor = detail::parse_real(s);
    cfg.output_path = pick(raw.out, "out");
    const std::string format = pick(raw.format, "format");
    if (format == "json") cfg.format = OutputFormat::Json;
    else if (format.empty() || format == "csv") cfg.format = OutputFormat::Csv;
    else throw InvalidInput("--format must be csv or json");
    const std::string rounding = pick(raw.rounding, "rounding");
    if (rounding == "floor") cfg.rounding = Rounding::Floor;
    else if (rounding.empty() || rounding == "nearest") cfg.rounding = Rounding::Nearest;
    else throw InvalidInput("--rounding must be nearest or floor");
    return cfg;
}

/// Buffers output so a failed command leaves no partial file behind.
int emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return cli::kExitOk;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f || !(f << text)) {
        std::cerr << "rngrate: cannot write '" << path << "'\n";
        return cli::kExitUsage;
    }
    return cli::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal random number conversion fidelities under majorization"};
    app.require_subcommand(1);
    RawOptions raw;

    auto* rate = app.add_subcommand("rate", "second-order rate R2 at confidence nu");
    add_common(rate, raw);
    rate->add_option("--nu", raw.nu, "confidence coefficient in (0, 1)");

    auto* curve = app.add_subcommand("curve", "limit fidelity over a grid of b");
    add_common(curve, raw);
    curve->add_option("--b-grid", raw.b_grid, "lo:hi:step or comma list");
    std::string attainment_grid, attainment_out, attainment_b;
    curve->add_option("--attainment", attainment_grid, "x grid for the attainment table (x, G_P, G_PQb, A)");
    curve->add_option("--attainment-b", attainment_b, "b for the attainment table (default: first b)");
    curve->add_option("--attainment-out", attainment_out, "attainment table path (default: after the curve)");

    auto* finite = app.add_subcommand("finite-n", "F^M(P^n -> Q^L) against the limit curve");
    add_common(finite, raw);
    finite->add_option("--n-grid", raw.n_grid, "lo:hi:step or comma list of n");
    finite->add_option("--nu", raw.nu, "use b = R2(nu)");
    finite->add_option("--b", raw.b, "fixed second-order rate");
    finite->add_option("--rate-factor", raw.rate_factor, "first-order rate as a multiple of H(P)/H(Q)");
    finite->add_option("--rounding", raw.rounding, "nearest (default) or floor for L");

    auto* oneshot = app.add_subcommand("oneshot", "exact F^D, F^M and the optimal map");
    add_common(oneshot, raw);
    oneshot->add_option("--nu", raw.nu, "also report L^D(P, Q | nu)");
    cli::OneshotOptions oneshot_opt;
    oneshot->add_option("--source-power", oneshot_opt.source_power, "use P^n as the source")->check(CLI::PositiveNumber);
    oneshot->add_option("--target-power", oneshot_opt.target_power, "use Q^L as the target")->check(CLI::PositiveNumber);

    auto* validate = app.add_subcommand("validate", "run the cross-module invariant suites");
    bool inject_fault = false;
    std::uint64_t seed = 20240601;
    validate->add_flag("--inject-fault", inject_fault, "perturb the optimizer (test hook)")->group("");
    validate->add_option("--seed", seed, "random seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? cli::kExitOk : cli::kExitUsage;
    }

    std::ostringstream out;
    try {
        int code = cli::kExitOk;
        if (*validate) {
            code = cli::cmd_validate(out, inject_fault ? cli::faulty_major_solver() : default_major_solver(), seed);
            std::cout << out.str();
            return code;
        }
        const ExperimentConfig cfg = resolve(raw);
        if (*rate) code = cli::cmd_rate(cfg, out, std::cerr);
        else if (*curve) {
            code = cli::cmd_curve(cfg, out, std::cerr);
            if (code == cli::kExitOk && !attainment_grid.empty()) {
                const double b = attainment_b.empty() ? cfg.b_grid.front() : detail::parse_real(attainment_b);
                std::ostringstream table;
                cli::cmd_attainment(cfg, b, parse_real_grid(attainment_grid), table);
                if (attainment_out.empty()) out << "\n" << table.str();
                else if (int c = emit(attainment_out, table.str()); c != cli::kExitOk) return c;
            }
        } else if (*finite) code = cli::cmd_finite_n(cfg, out, std::cerr);
        else if (*oneshot) code = cli::cmd_oneshot(cfg, oneshot_opt, out);
        if (code != cli::kExitOk) return code;
        return emit(cfg.output_path, out.str());
    } catch (const RegimeError& e) {
        std::cerr << "rngrate: regime error: " << e.what() << "\n";
        return cli::kExitRegime;
    } catch (const std::exception& e) {
        std::cerr << "rngrate: " << e.what() << "\n";
        return cli::kExitUsage;
    }
}
