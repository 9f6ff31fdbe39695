// Command-line front end: simulate, fit, rate-experiment, bounds, diagnose.
// Exit codes: 0 success, 2 validation/usage error, 1 runtime error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sievenet/bounds.hpp"
#include "sievenet/diagnostics.hpp"
#include "sievenet/harness.hpp"
#include "sievenet/io.hpp"
#include "sievenet/serialize.hpp"

using namespace sievenet;
namespace fs = std::filesystem;

namespace {

struct GlobalOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    std::optional<std::size_t> threads;
};

ExperimentConfig load_config(const GlobalOpts& g, const std::string& fallback_setting) {
    ExperimentConfig cfg;
    if (!g.config_path.empty()) {
        std::ifstream in(g.config_path);
        if (!in) throw std::invalid_argument("cannot open config: " + g.config_path);
        nlohmann::json j;
        in >> j;
        cfg = j.get<ExperimentConfig>();
    } else {
        cfg = fallback_setting == "logistic" ? default_logistic_config()
                                             : default_regression_config();
        if (!fallback_setting.empty()) cfg.setting = setting_from_string(fallback_setting);
    }
    if (g.seed) cfg.master_seed = *g.seed;
    if (g.threads) cfg.threads = *g.threads;
    return cfg;
}

int run_simulate(const GlobalOpts& g, const std::string& setting, std::size_t n) {
    const auto cfg = load_config(g, setting);
    const std::uint64_t seed = g.seed.value_or(cfg.master_seed);
    const auto sample = cfg.setting == Setting::logistic
                            ? simulate_logistic_auto(cfg.logistic, n, seed)
                            : simulate_ar_arch(cfg.ar, n, seed);
    fs::create_directories(g.out_dir);
    const fs::path csv = fs::path(g.out_dir) / "sample.csv";
    write_sample_csv(sample, csv);

    nlohmann::json meta;
    meta["seed"] = seed;
    meta["n"] = n;
    meta["setting"] = to_string(cfg.setting);
    if (cfg.setting == Setting::logistic)
        meta["dgp"] = cfg.logistic;
    else
        meta["dgp"] = cfg.ar;
    std::ofstream mf(fs::path(g.out_dir) / "sample_meta.json");
    mf << meta.dump(2) << "\n";
    std::cout << "wrote " << csv.string() << " (" << sample.size() << " rows, dim "
              << sample.dim << ")\n";
    return 0;
}

int run_fit(const GlobalOpts& g, const std::string& setting, const std::string& input,
            std::size_t depth_override, std::size_t width_override) {
    const auto cfg = load_config(g, setting);
    const auto sample = read_sample_csv(input);

    ScalingInput sin = cfg.scaling;
    sin.n = sample.size();
    sin.d = sample.dim;
    const auto scaled = cfg.setting == Setting::logistic
                            ? scale_logistic(sin)
                            : (cfg.setting == Setting::regression_stationary
                                   ? scale_regression_stationary(sin)
                                   : scale_regression_nonstationary(sin));
    ArchitectureSpec arch = ArchitectureSpec::uniform(
        depth_override ? depth_override : scaled.depth,
        width_override ? width_override : scaled.width, sample.dim,
        std::max(2.0, scaled.bound));

    const Criterion crit = cfg.setting == Setting::logistic
                               ? Criterion::logistic(cfg.logistic.bound)
                               : Criterion::least_squares();
    const auto fit = fit_sieve(crit, arch, sample, cfg.optimizer, cfg.restarts,
                               g.seed.value_or(cfg.master_seed));

    nlohmann::json out;
    out["params"] = fit.params;
    out["empirical_criterion"] = fit.empirical_criterion;
    out["theta_n"] = fit.theta_n;
    out["restarts_used"] = fit.restarts_used;
    out["restarts_discarded"] = fit.restarts_discarded;
    out["restart_criteria"] = fit.restart_criteria;
    out["trace"] = {{"iterations", fit.trace.iterations},
                    {"initial_criterion", fit.trace.initial_criterion},
                    {"final_criterion", fit.trace.final_criterion}};
    fs::create_directories(g.out_dir);
    const fs::path path = fs::path(g.out_dir) / "fit.json";
    std::ofstream f(path);
    f << out.dump(2) << "\n";
    std::cout << "fit: criterion=" << fit.empirical_criterion << " theta_n=" << fit.theta_n
              << " -> " << path.string() << "\n";
    return 0;
}

int run_rate_experiment(const GlobalOpts& g, const std::string& setting) {
    const auto cfg = load_config(g, setting);
    const auto report = run_rate_experiment(cfg);
    emit_report(report, g.out_dir);
    std::cout << "rate-experiment: slope=" << report.fitted_slope
              << " (se=" << report.slope_se
              << ", theory exponent=" << report.theoretical_exponent << ")\n";
    for (std::size_t i = 0; i < report.grid.size(); ++i)
        std::cout << "  n=" << report.grid[i] << " median_l2=" << report.median_l2[i] << "\n";
    std::cout << "reports in " << g.out_dir << "\n";
    return 0;
}

int run_bounds(const GlobalOpts& g, const std::string& setting,
               const std::vector<std::size_t>& grid, bool csv) {
    const auto cfg = load_config(g, setting);
    const auto n_grid = grid.empty() ? cfg.n_grid : grid;

    if (csv)
        std::cout << "n,L_n,H_n,W_n,B_n,rate_value,pdim_lower,pdim_upper\n";
    else
        std::printf("%10s %6s %8s %12s %10s %14s %14s %14s\n", "n", "L_n", "H_n", "W_n", "B_n",
                    "rate_value", "pdim_lower", "pdim_upper");
    for (std::size_t n : n_grid) {
        ScalingInput sin = cfg.scaling;
        sin.n = n;
        const auto out = cfg.setting == Setting::logistic
                             ? scale_logistic(sin)
                             : (cfg.setting == Setting::regression_stationary
                                    ? scale_regression_stationary(sin)
                                    : scale_regression_nonstationary(sin));
        const auto [lo, hi] = pdim_order_bounds(out.param_count, out.depth);
        if (csv)
            std::cout << n << ',' << out.depth << ',' << out.width << ',' << out.param_count
                      << ',' << format_double(out.bound) << ',' << format_double(out.rate_value)
                      << ',' << format_double(lo) << ',' << format_double(hi) << "\n";
        else
            std::printf("%10zu %6zu %8zu %12zu %10.4g %14.6g %14.6g %14.6g\n", n, out.depth,
                        out.width, out.param_count, out.bound, out.rate_value, lo, hi);
    }
    return 0;
}

int run_diagnose(const GlobalOpts& g, const std::string& input, double envelope,
                 const std::string& crit_name, double logistic_b, std::size_t block_len) {
    const auto sample = read_sample_csv(input);
    const Criterion crit =
        crit_name == "logistic" ? Criterion::logistic(logistic_b) : Criterion::least_squares();
    const auto trunc = truncation_report(sample.y, envelope, crit);

    nlohmann::json out;
    out["n"] = sample.size();
    out["envelope"] = envelope;
    out["criterion"] = crit_name;
    out["truncation"] = {{"max_abs_y", trunc.max_abs_y},
                         {"exceed_count", trunc.exceed_count},
                         {"m_n_max", trunc.m_n_max},
                         {"tail_moment_hat", trunc.tail_moment_hat}};
    if (block_len > 0) {
        const auto part = block_partition(sample.size(), block_len);
        const auto norms =
            block_norm([](std::span<const double> x) { return x[0]; }, sample, part);
        out["blocks"] = {{"a", part.block_len},
                         {"b", part.block_count},
                         {"remainder", part.remainder.size()},
                         {"x1_block_rms", norms.per_block},
                         {"x1_aggregate", norms.aggregate}};
    }
    fs::create_directories(g.out_dir);
    const fs::path path = fs::path(g.out_dir) / "diagnose.json";
    std::ofstream f(path);
    f << out.dump(2) << "\n";
    std::cout << out.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DNN sieve estimation toolkit for dependent data"};
    app.require_subcommand(1);
    app.fallthrough();  // let global flags appear after the subcommand

    GlobalOpts g;
    std::uint64_t seed_raw = 0;
    std::size_t threads_raw = 0;
    auto* seed_opt = app.add_option("--seed", seed_raw, "master seed override");
    auto* threads_opt = app.add_option("--threads", threads_raw, "worker thread count");
    app.add_option("--config", g.config_path, "experiment config JSON");
    app.add_option("--out", g.out_dir, "output directory");

    std::string setting;
    std::size_t n = 1000;
    auto* sim = app.add_subcommand("simulate", "simulate a DGP path to CSV");
    sim->add_option("--setting", setting,
                    "regression_stationary | regression_nonstationary | logistic");
    sim->add_option("--n", n, "observations to keep");

    std::string fit_input = "sample.csv";
    std::size_t fit_depth = 0, fit_width = 0;
    auto* fit = app.add_subcommand("fit", "fit a sieve network to a sample CSV");
    fit->add_option("--setting", setting, "criterion/scaling setting");
    fit->add_option("--input", fit_input, "sample CSV path");
    fit->add_option("--depth", fit_depth, "override hidden depth");
    fit->add_option("--width", fit_width, "override hidden width");

    auto* rate = app.add_subcommand("rate-experiment", "run the Monte Carlo rate experiment");
    rate->add_option("--setting", setting, "experiment setting when no config is given");

    std::vector<std::size_t> grid;
    bool csv = false;
    auto* bounds = app.add_subcommand("bounds", "print the architecture/bound table");
    bounds->add_option("--setting", setting, "scaling rule to apply");
    bounds->add_option("--n-grid", grid, "sample sizes")->delimiter(',');
    bounds->add_flag("--csv", csv, "CSV output");

    std::string diag_input = "sample.csv";
    double envelope = 2.0;
    std::string crit_name = "least_squares";
    double logistic_b = 2.0;
    std::size_t block_len = 0;
    auto* diag = app.add_subcommand("diagnose", "truncation/block diagnostics for a sample");
    diag->add_option("--input", diag_input, "sample CSV path");
    diag->add_option("--envelope", envelope, "envelope bound B_n");
    diag->add_option("--criterion", crit_name, "least_squares | logistic");
    diag->add_option("--logistic-b", logistic_b, "B for the logistic criterion");
    diag->add_option("--block-len", block_len, "include block norms with this block length");

    try {
        app.parse(argc, argv);
        if (*seed_opt) g.seed = seed_raw;
        if (*threads_opt) g.threads = threads_raw;

        if (sim->parsed()) return run_simulate(g, setting, n);
        if (fit->parsed()) return run_fit(g, setting, fit_input, fit_depth, fit_width);
        if (rate->parsed()) return run_rate_experiment(g, setting);
        if (bounds->parsed()) return run_bounds(g, setting, grid, csv);
        if (diag->parsed())
            return run_diagnose(g, diag_input, envelope, crit_name, logistic_b, block_len);
        std::cerr << "no subcommand\n";
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
