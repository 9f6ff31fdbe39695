#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "sievenet/bounds.hpp"
#include "sievenet/dgp.hpp"
#include "sievenet/estimator.hpp"
#include "sievenet/io.hpp"
#include "sievenet/stats.hpp"

namespace sievenet {

enum class Setting { regression_stationary, regression_nonstationary, logistic };

inline std::string to_string(Setting s) {
    switch (s) {
        case Setting::regression_stationary: return "regression_stationary";
        case Setting::regression_nonstationary: return "regression_nonstationary";
        case Setting::logistic: return "logistic";
    }
    return "unknown";
}

inline Setting setting_from_string(const std::string& s) {
    if (s == "regression_stationary") return Setting::regression_stationary;
    if (s == "regression_nonstationary") return Setting::regression_nonstationary;
    if (s == "logistic") return Setting::logistic;
    throw std::invalid_argument("unknown setting: " + s);
}

/// Synthetic error injection for harness self-tests: rows get coeff * n^exponent
/// instead of fitted errors.
struct SyntheticErrors {
    double coeff = 1.0;
    double exponent = -0.3;
};

struct ExperimentConfig {
    Setting setting = Setting::regression_stationary;
    ArArchConfig ar;            // active for the regression settings
    LogisticAutoConfig logistic;  // active for the logistic setting
    ScalingInput scaling;       // n filled per grid point
    std::vector<std::size_t> n_grid = {256, 512, 1024, 2048, 4096, 8192};
    std::size_t replications = 10;
    std::size_t eval_n = 100000;
    OptimizerSettings optimizer;
    std::size_t restarts = 2;
    std::uint64_t master_seed = 7;
    std::size_t threads = 0;  // 0 = hardware concurrency
    std::optional<SyntheticErrors> synthetic;

    void validate() const {
        if (n_grid.size() < 3)
            throw std::invalid_argument("ExperimentConfig: n_grid needs >= 3 sizes");
        for (std::size_t i = 0; i + 1 < n_grid.size(); ++i)
            if (!(n_grid[i] < n_grid[i + 1]))
                throw std::invalid_argument("ExperimentConfig: n_grid must be ascending");
        if (replications < 1)
            throw std::invalid_argument("ExperimentConfig: replications must be >= 1");
        if (eval_n < 2) throw std::invalid_argument("ExperimentConfig: eval_n must be >= 2");
        if (setting == Setting::logistic) {
            logistic.validate();
            if (scaling.d != logistic.dim())
                throw std::invalid_argument("ExperimentConfig: scaling.d != logistic dim");
        } else {
            const auto rep = validate_ar_arch(ar);
            if (!rep.pass())
                throw std::invalid_argument("ExperimentConfig: AR-ARCH config invalid: " +
                                            rep.summary());
            if (scaling.d != ar.lags)
                throw std::invalid_argument("ExperimentConfig: scaling.d != ar.lags");
        }
    }
};

/// Defaults for the stationary regression rate experiment. The scaling
/// constants are calibrated so the largest grid architecture stays desk-sized.
inline ExperimentConfig default_regression_config() {
    ExperimentConfig cfg;
    cfg.setting = Setting::regression_stationary;
    cfg.ar.lags = 1;
    cfg.ar.target = make_product_sine(1, 2);
    cfg.ar.eta_form = ArArchConfig::EtaForm::abs_linear;
    cfg.ar.eta_coeff = {0.4, 0.15};
    cfg.ar.eta_min = 0.1;
    cfg.ar.burn_in = 1000;
    cfg.scaling.d = 1;
    cfg.scaling.p = 2;
    cfg.scaling.kappa_bar = 0.0;
    cfg.scaling.upsilon = 0.0;
    cfg.scaling.c_L = 0.1;
    cfg.scaling.c_H = 0.25;
    cfg.scaling.c_B = 2.0;
    cfg.optimizer.step = 1e-2;
    cfg.optimizer.max_iter = 1200;
    cfg.optimizer.rel_tol = 1e-9;
    cfg.optimizer.patience = 50;
    cfg.restarts = 2;
    cfg.master_seed = 7;
    return cfg;
}

/// Defaults for the logistic rate experiment (d = 2: one covariate, one y-lag).
inline ExperimentConfig default_logistic_config() {
    ExperimentConfig cfg;
    cfg.setting = Setting::logistic;
    cfg.logistic.y_lags = 1;
    cfg.logistic.covariate_dim = 1;
    cfg.logistic.bound = 2.0;
    cfg.logistic.target = make_product_sine(2, 2);
    cfg.logistic.covariate_process = LogisticAutoConfig::CovariateProcess::iid_uniform;
    cfg.logistic.mode = LogisticAutoConfig::ExogeneityMode::strict;
    cfg.logistic.burn_in = 1000;
    cfg.scaling.d = 2;
    cfg.scaling.p = 2;
    cfg.scaling.kappa_bar = 0.0;
    cfg.scaling.upsilon = 0.0;
    cfg.scaling.c_L = 0.1;
    cfg.scaling.c_H = 0.12;
    cfg.scaling.c_B = 2.0;
    cfg.optimizer.step = 1e-2;
    cfg.optimizer.max_iter = 1200;
    cfg.optimizer.rel_tol = 1e-9;
    cfg.optimizer.patience = 50;
    cfg.restarts = 2;
    cfg.master_seed = 7;
    return cfg;
}

struct RateRow {
    std::size_t n = 0;
    std::size_t replication = 0;
    double empirical_l2 = 0.0;
    double population_l2 = 0.0;
    double theta_n = 0.0;
    double runtime_s = 0.0;
};

struct RateReport {
    std::vector<RateRow> rows;
    std::vector<std::size_t> grid;
    std::vector<double> median_l2;        // median population_l2 per grid point
    std::vector<double> median_empirical; // median empirical_l2 per grid point
    std::vector<double> median_theta;
    std::vector<double> theory_eps;       // rate_value per grid point
    double fitted_slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double theoretical_exponent = 0.0;
};

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double se = 0.0;
};

/// OLS of ln(err) on ln(n); errors must be positive and at least three points.
inline SlopeFit slope_fit(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) throw std::invalid_argument("slope_fit: need >= 3 points");
    std::vector<double> lx, ly;
    lx.reserve(points.size());
    ly.reserve(points.size());
    for (const auto& [n, err] : points) {
        if (!(n > 0.0)) throw std::invalid_argument("slope_fit: nonpositive n");
        if (!(err > 0.0)) throw std::invalid_argument("slope_fit: nonpositive error");
        lx.push_back(std::log(n));
        ly.push_back(std::log(err));
    }
    const auto line = ols_line(lx, ly);
    return {line.slope, line.intercept, line.slope_se};
}

namespace detail {

inline ScalingOutput scaling_for(const ExperimentConfig& cfg, std::size_t n) {
    ScalingInput in = cfg.scaling;
    in.n = n;
    switch (cfg.setting) {
        case Setting::regression_stationary: return scale_regression_stationary(in);
        case Setting::regression_nonstationary: return scale_regression_nonstationary(in);
        case Setting::logistic: return scale_logistic(in);
    }
    throw std::invalid_argument("scaling_for: unknown setting");
}

inline TimeSeriesSample simulate_for(const ExperimentConfig& cfg, std::size_t n,
                                     std::uint64_t seed) {
    if (cfg.setting == Setting::logistic) return simulate_logistic_auto(cfg.logistic, n, seed);
    return simulate_ar_arch(cfg.ar, n, seed);
}

inline const HolderTarget& target_of(const ExperimentConfig& cfg) {
    return cfg.setting == Setting::logistic ? cfg.logistic.target : cfg.ar.target;
}

inline Criterion criterion_of(const ExperimentConfig& cfg) {
    return cfg.setting == Setting::logistic ? Criterion::logistic(cfg.logistic.bound)
                                            : Criterion::least_squares();
}

/// Runs `count` jobs on a bounded pool; results land in caller-indexed slots,
/// so the output order never depends on scheduling.
template <typename Job>
inline void run_pool(std::size_t count, std::size_t threads, const Job& job) {
    std::size_t k = threads == 0 ? std::thread::hardware_concurrency() : threads;
    if (k == 0) k = 1;
    k = std::min(k, count);
    if (k <= 1) {
        for (std::size_t i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(k);
    for (std::size_t w = 0; w < k; ++w)
        workers.emplace_back([&]() {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) job(i);
        });
    for (auto& t : workers) t.join();
}

}  // namespace detail

/// Monte Carlo rate experiment: per (n, replication) simulate, fit, and score;
/// then fit the log-log slope of the median population error against n.
/// Deterministic for a fixed config (cell seeds derive from the master seed).
inline RateReport run_rate_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    RateReport report;
    report.grid = cfg.n_grid;

    const std::size_t gn = cfg.n_grid.size();
    const std::size_t reps = cfg.replications;
    report.rows.resize(gn * reps);

    report.theoretical_exponent = detail::scaling_for(cfg, cfg.n_grid.back()).rate_exponent;
    report.theory_eps.reserve(gn);
    for (std::size_t gi = 0; gi < gn; ++gi)
        report.theory_eps.push_back(detail::scaling_for(cfg, cfg.n_grid[gi]).rate_value);

    if (cfg.synthetic) {
        for (std::size_t gi = 0; gi < gn; ++gi)
            for (std::size_t r = 0; r < reps; ++r) {
                RateRow& row = report.rows[gi * reps + r];
                row.n = cfg.n_grid[gi];
                row.replication = r;
                const double e =
                    cfg.synthetic->coeff *
                    std::pow(static_cast<double>(row.n), cfg.synthetic->exponent);
                row.empirical_l2 = e;
                row.population_l2 = e;
                row.theta_n = 0.0;
                row.runtime_s = 0.0;
            }
    } else {
        // one fresh evaluation path for the whole experiment, x-marginals only
        const TimeSeriesSample eval_path =
            detail::simulate_for(cfg, cfg.eval_n, derive_seed(cfg.master_seed, 0xe7a1));
        const HolderTarget& target = detail::target_of(cfg);
        const Criterion crit = detail::criterion_of(cfg);

        std::vector<std::string> errors(gn * reps);
        detail::run_pool(gn * reps, cfg.threads, [&](std::size_t idx) {
            const std::size_t gi = idx / reps;
            const std::size_t r = idx % reps;
            const std::size_t n = cfg.n_grid[gi];
            RateRow& row = report.rows[idx];
            row.n = n;
            row.replication = r;
            try {
                const auto t0 = std::chrono::steady_clock::now();
                const auto scaled = detail::scaling_for(cfg, n);
                ArchitectureSpec arch = ArchitectureSpec::uniform(
                    scaled.depth, scaled.width, cfg.scaling.d, std::max(2.0, scaled.bound));
                const auto sample =
                    detail::simulate_for(cfg, n, derive_seed(cfg.master_seed, gi + 1, r + 1));
                const auto fit = fit_sieve(crit, arch, sample, cfg.optimizer, cfg.restarts,
                                           derive_seed(cfg.master_seed, 0xf1 + gi, r));
                row.empirical_l2 = empirical_l2(fit.params, target, sample);
                row.population_l2 = population_l2(fit.params, target, eval_path);
                row.theta_n = fit.theta_n;
                row.runtime_s =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            } catch (const std::exception& e) {
                errors[idx] = e.what();
            }
        });
        for (std::size_t idx = 0; idx < errors.size(); ++idx)
            if (!errors[idx].empty())
                throw std::runtime_error("rate experiment cell (n=" +
                                         std::to_string(cfg.n_grid[idx / reps]) +
                                         ", r=" + std::to_string(idx % reps) +
                                         ") failed: " + errors[idx]);
    }

    std::vector<std::pair<double, double>> med_points;
    for (std::size_t gi = 0; gi < gn; ++gi) {
        std::vector<double> pop, emp, theta;
        for (std::size_t r = 0; r < reps; ++r) {
            const RateRow& row = report.rows[gi * reps + r];
            pop.push_back(row.population_l2);
            emp.push_back(row.empirical_l2);
            theta.push_back(row.theta_n);
        }
        report.median_l2.push_back(median(pop));
        report.median_empirical.push_back(median(emp));
        report.median_theta.push_back(median(theta));
        med_points.emplace_back(static_cast<double>(cfg.n_grid[gi]), report.median_l2.back());
    }

    const auto fit = slope_fit(med_points);
    report.fitted_slope = fit.slope;
    report.intercept = fit.intercept;
    report.slope_se = fit.se;
    return report;
}

/// Writes rows.csv, summary.json and plot.csv (median error with the theory
/// curve anchored at the smallest n).
inline void emit_report(const RateReport& report, const std::filesystem::path& dir) {
    if (report.rows.empty()) throw std::invalid_argument("emit_report: empty report");
    std::filesystem::create_directories(dir);

    {
        std::ofstream out(dir / "rows.csv");
        if (!out) throw std::runtime_error("cannot write " + (dir / "rows.csv").string());
        out << "n,replication,empirical_l2,population_l2,theta_n,runtime_s\n";
        for (const auto& row : report.rows)
            out << row.n << ',' << row.replication << ',' << format_double(row.empirical_l2)
                << ',' << format_double(row.population_l2) << ',' << format_double(row.theta_n)
                << ',' << format_double(row.runtime_s) << "\n";
        if (!out) throw std::runtime_error("write failed: rows.csv");
    }

    {
        nlohmann::json j;
        j["fitted_slope"] = report.fitted_slope;
        j["intercept"] = report.intercept;
        j["slope_se"] = report.slope_se;
        j["theoretical_exponent"] = report.theoretical_exponent;
        j["n_grid"] = report.grid;
        j["median_population_l2"] = report.median_l2;
        j["median_empirical_l2"] = report.median_empirical;
        j["median_theta_n"] = report.median_theta;
        std::ofstream out(dir / "summary.json");
        if (!out) throw std::runtime_error("cannot write " + (dir / "summary.json").string());
        out << j.dump(2) << "\n";
        if (!out) throw std::runtime_error("write failed: summary.json");
    }

    {
        std::ofstream out(dir / "plot.csv");
        if (!out) throw std::runtime_error("cannot write " + (dir / "plot.csv").string());
        out << "n,median_l2,theory_curve\n";
        const double anchor =
            report.theory_eps.empty() || report.theory_eps.front() == 0.0
                ? 1.0
                : report.median_l2.front() / report.theory_eps.front();
        for (std::size_t gi = 0; gi < report.grid.size(); ++gi)
            out << report.grid[gi] << ',' << format_double(report.median_l2[gi]) << ','
                << format_double(anchor * report.theory_eps[gi]) << "\n";
        if (!out) throw std::runtime_error("write failed: plot.csv");
    }
}

/// Reads rows.csv back; used by round-trip checks and the determinism test.
inline std::vector<RateRow> read_rows_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    std::vector<RateRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        RateRow row;
        std::istringstream ss(line);
        std::string field;
        std::getline(ss, field, ',');
        row.n = std::stoull(field);
        std::getline(ss, field, ',');
        row.replication = std::stoull(field);
        std::getline(ss, field, ',');
        row.empirical_l2 = std::stod(field);
        std::getline(ss, field, ',');
        row.population_l2 = std::stod(field);
        std::getline(ss, field, ',');
        row.theta_n = std::stod(field);
        std::getline(ss, field, ',');
        row.runtime_s = std::stod(field);
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Config (de)serialization.
// ---------------------------------------------------------------------------

inline void to_json(nlohmann::json& j, const OptimizerSettings& o) {
    j = nlohmann::json{{"step", o.step},         {"max_iter", o.max_iter},
                       {"rel_tol", o.rel_tol},   {"patience", o.patience},
                       {"monotone", o.monotone}, {"beta1", o.beta1},
                       {"beta2", o.beta2},       {"eps", o.eps}};
}

inline void from_json(const nlohmann::json& j, OptimizerSettings& o) {
    o.step = j.value("step", o.step);
    o.max_iter = j.value("max_iter", o.max_iter);
    o.rel_tol = j.value("rel_tol", o.rel_tol);
    o.patience = j.value("patience", o.patience);
    o.monotone = j.value("monotone", o.monotone);
    o.beta1 = j.value("beta1", o.beta1);
    o.beta2 = j.value("beta2", o.beta2);
    o.eps = j.value("eps", o.eps);
}

inline void to_json(nlohmann::json& j, const HolderTarget& t) {
    if (t.id == TargetId::custom)
        throw std::invalid_argument("custom targets are not serializable");
    j = nlohmann::json{{"id", to_string(t.id)}, {"dim", t.dim}, {"smoothness", t.smoothness}};
}

inline void from_json(const nlohmann::json& j, HolderTarget& t) {
    t.id = target_id_from_string(j.at("id").get<std::string>());
    t.dim = j.at("dim").get<std::size_t>();
    t.smoothness = j.value("smoothness", std::size_t{2});
    t.bounded = true;
}

inline void to_json(nlohmann::json& j, const ArArchConfig& c) {
    j = nlohmann::json{
        {"lags", c.lags},
        {"target", c.target},
        {"eta_form", c.eta_form == ArArchConfig::EtaForm::abs_linear ? "abs_linear"
                                                                     : "sqrt_quadratic"},
        {"eta_coeff", c.eta_coeff},
        {"eta_min", c.eta_min},
        {"burn_in", c.burn_in},
        {"contraction_margin", c.contraction_margin},
        {"y_init", c.y_init}};
}

inline void from_json(const nlohmann::json& j, ArArchConfig& c) {
    c.lags = j.value("lags", c.lags);
    if (j.contains("target")) j.at("target").get_to(c.target);
    if (j.contains("eta_form")) {
        const auto s = j.at("eta_form").get<std::string>();
        if (s == "abs_linear")
            c.eta_form = ArArchConfig::EtaForm::abs_linear;
        else if (s == "sqrt_quadratic")
            c.eta_form = ArArchConfig::EtaForm::sqrt_quadratic;
        else
            throw std::invalid_argument("unknown eta_form: " + s);
    }
    c.eta_coeff = j.value("eta_coeff", c.eta_coeff);
    c.eta_min = j.value("eta_min", c.eta_min);
    c.burn_in = j.value("burn_in", c.burn_in);
    c.contraction_margin = j.value("contraction_margin", c.contraction_margin);
    c.y_init = j.value("y_init", c.y_init);
}

inline void to_json(nlohmann::json& j, const LogisticAutoConfig& c) {
    j = nlohmann::json{
        {"y_lags", c.y_lags},
        {"covariate_dim", c.covariate_dim},
        {"bound", c.bound},
        {"target", c.target},
        {"covariate_process",
         c.covariate_process == LogisticAutoConfig::CovariateProcess::iid_uniform
             ? "iid_uniform"
             : "gaussian_copula_ar"},
        {"copula_rho", c.copula_rho},
        {"mode",
         c.mode == LogisticAutoConfig::ExogeneityMode::strict ? "strict" : "uniform_noise"},
        {"burn_in", c.burn_in}};
}

inline void from_json(const nlohmann::json& j, LogisticAutoConfig& c) {
    c.y_lags = j.value("y_lags", c.y_lags);
    c.covariate_dim = j.value("covariate_dim", c.covariate_dim);
    c.bound = j.value("bound", c.bound);
    if (j.contains("target")) j.at("target").get_to(c.target);
    if (j.contains("covariate_process")) {
        const auto s = j.at("covariate_process").get<std::string>();
        if (s == "iid_uniform")
            c.covariate_process = LogisticAutoConfig::CovariateProcess::iid_uniform;
        else if (s == "gaussian_copula_ar")
            c.covariate_process = LogisticAutoConfig::CovariateProcess::gaussian_copula_ar;
        else
            throw std::invalid_argument("unknown covariate_process: " + s);
    }
    c.copula_rho = j.value("copula_rho", c.copula_rho);
    if (j.contains("mode")) {
        const auto s = j.at("mode").get<std::string>();
        if (s == "strict")
            c.mode = LogisticAutoConfig::ExogeneityMode::strict;
        else if (s == "uniform_noise")
            c.mode = LogisticAutoConfig::ExogeneityMode::uniform_noise;
        else
            throw std::invalid_argument("unknown exogeneity mode: " + s);
    }
    c.burn_in = j.value("burn_in", c.burn_in);
}

inline void to_json(nlohmann::json& j, const ScalingInput& s) {
    j = nlohmann::json{{"d", s.d},           {"p", s.p},   {"kappa_bar", s.kappa_bar},
                       {"upsilon", s.upsilon}, {"c_L", s.c_L}, {"c_H", s.c_H},
                       {"c_B", s.c_B}};
}

inline void from_json(const nlohmann::json& j, ScalingInput& s) {
    s.d = j.value("d", s.d);
    s.p = j.value("p", s.p);
    s.kappa_bar = j.value("kappa_bar", s.kappa_bar);
    s.upsilon = j.value("upsilon", s.upsilon);
    s.c_L = j.value("c_L", s.c_L);
    s.c_H = j.value("c_H", s.c_H);
    s.c_B = j.value("c_B", s.c_B);
}

inline void to_json(nlohmann::json& j, const ExperimentConfig& c) {
    j = nlohmann::json{{"setting", to_string(c.setting)},
                       {"scaling", c.scaling},
                       {"n_grid", c.n_grid},
                       {"replications", c.replications},
                       {"eval_n", c.eval_n},
                       {"optimizer", c.optimizer},
                       {"restarts", c.restarts},
                       {"master_seed", c.master_seed},
                       {"threads", c.threads}};
    if (c.setting == Setting::logistic)
        j["logistic_dgp"] = c.logistic;
    else
        j["ar_arch_dgp"] = c.ar;
    if (c.synthetic)
        j["synthetic"] = {{"coeff", c.synthetic->coeff}, {"exponent", c.synthetic->exponent}};
}

inline void from_json(const nlohmann::json& j, ExperimentConfig& c) {
    const auto s = j.at("setting").get<std::string>();
    c = setting_from_string(s) == Setting::logistic ? default_logistic_config()
                                                    : default_regression_config();
    c.setting = setting_from_string(s);
    if (j.contains("ar_arch_dgp")) j.at("ar_arch_dgp").get_to(c.ar);
    if (j.contains("logistic_dgp")) j.at("logistic_dgp").get_to(c.logistic);
    if (j.contains("scaling")) j.at("scaling").get_to(c.scaling);
    c.n_grid = j.value("n_grid", c.n_grid);
    c.replications = j.value("replications", c.replications);
    c.eval_n = j.value("eval_n", c.eval_n);
    if (j.contains("optimizer")) j.at("optimizer").get_to(c.optimizer);
    c.restarts = j.value("restarts", c.restarts);
    c.master_seed = j.value("master_seed", c.master_seed);
    c.threads = j.value("threads", c.threads);
    if (j.contains("synthetic")) {
        SyntheticErrors syn;
        syn.coeff = j.at("synthetic").value("coeff", 1.0);
        syn.exponent = j.at("synthetic").value("exponent", -0.3);
        c.synthetic = syn;
    }
}

}  // namespace sievenet
