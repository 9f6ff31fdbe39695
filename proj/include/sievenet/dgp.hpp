#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sievenet/rng.hpp"
#include "sievenet/stats.hpp"
#include "sievenet/targets.hpp"

namespace sievenet {

/// Ordered (y_t, x_t) pairs produced by a simulator; x is stored row-major.
struct TimeSeriesSample {
    std::size_t dim = 0;
    std::vector<double> y;
    std::vector<double> x;

    std::size_t size() const { return y.size(); }

    std::span<const double> x_row(std::size_t t) const {
        return std::span<const double>(x).subspan(t * dim, dim);
    }
};

// ---------------------------------------------------------------------------
// AR-ARCH regression generator: y_t = f0(x_t) + eta(x_t) * v_t with standard
// normal innovations and x_t = (y_{t-1}, ..., y_{t-d}).
// ---------------------------------------------------------------------------

struct ArArchConfig {
    enum class EtaForm { abs_linear, sqrt_quadratic };

    std::size_t lags = 1;  // d
    HolderTarget target = make_product_sine(1);
    EtaForm eta_form = EtaForm::abs_linear;
    std::vector<double> eta_coeff = {0.5, 0.2};  // c_0, c_1, ..., c_d
    double eta_min = 0.1;
    std::size_t burn_in = 1000;
    double contraction_margin = 0.0;
    std::vector<double> y_init;  // optional initial conditions, defaults to zeros

    double eta(std::span<const double> x) const {
        double v;
        if (eta_form == EtaForm::abs_linear) {
            v = eta_coeff[0];
            for (std::size_t j = 0; j < lags; ++j) v += eta_coeff[j + 1] * std::abs(x[j]);
        } else {
            v = eta_coeff[0];
            for (std::size_t j = 0; j < lags; ++j) v += eta_coeff[j + 1] * x[j] * x[j];
            v = std::sqrt(v);
        }
        return std::max(v, eta_min);
    }
};

/// Per-condition report mirroring the geometric-ergodicity checklist for the
/// AR-ARCH model: innovation density, bounded target, volatility bounds and
/// the drift contraction (with E|v| = sqrt(2/pi) for the standard normal).
struct ArArchValidation {
    bool innovation_ok = false;
    bool target_bounded_ok = false;
    bool eta_bounds_ok = false;
    bool contraction_ok = false;
    double contraction_sum = 0.0;
    double contraction_limit = 1.0;

    bool pass() const {
        return innovation_ok && target_bounded_ok && eta_bounds_ok && contraction_ok;
    }

    std::string summary() const {
        std::ostringstream os;
        os << "innovation=" << (innovation_ok ? "pass" : "fail")
           << " target_bounded=" << (target_bounded_ok ? "pass" : "fail")
           << " eta_bounds=" << (eta_bounds_ok ? "pass" : "fail")
           << " contraction=" << (contraction_ok ? "pass" : "fail") << " (sum="
           << contraction_sum << " < " << contraction_limit << ")";
        return os.str();
    }
};

inline ArArchValidation validate_ar_arch(const ArArchConfig& cfg) {
    ArArchValidation rep;
    rep.innovation_ok = true;  // generator only produces the supported standard normal
    rep.target_bounded_ok = cfg.target.bounded && cfg.target.dim == cfg.lags;

    const bool coeff_ok = cfg.eta_coeff.size() == cfg.lags + 1;
    double floor = 0.0;
    if (coeff_ok) {
        floor = cfg.eta_form == ArArchConfig::EtaForm::abs_linear
                    ? cfg.eta_coeff[0]
                    : std::sqrt(std::max(0.0, cfg.eta_coeff[0]));
        floor = std::max(floor, cfg.eta_min);
    }
    bool nonneg = coeff_ok;
    if (coeff_ok)
        for (double c : cfg.eta_coeff) nonneg = nonneg && c >= 0.0;
    rep.eta_bounds_ok = nonneg && floor > 0.0;

    // c_j^f = 0 for a bounded target; the eta envelope is linear in |x_j| with
    // slope c_j (abs_linear) or sqrt(c_j) (sqrt_quadratic, by subadditivity).
    const double e_abs_normal = std::sqrt(2.0 / std::numbers::pi);
    double sum = 0.0;
    if (coeff_ok)
        for (std::size_t j = 1; j <= cfg.lags; ++j) {
            const double slope = cfg.eta_form == ArArchConfig::EtaForm::abs_linear
                                     ? cfg.eta_coeff[j]
                                     : std::sqrt(std::max(0.0, cfg.eta_coeff[j]));
            sum += slope * e_abs_normal;
        }
    rep.contraction_sum = sum;
    rep.contraction_limit = 1.0 - cfg.contraction_margin;
    rep.contraction_ok = coeff_ok && rep.target_bounded_ok && sum < rep.contraction_limit;
    return rep;
}

inline TimeSeriesSample simulate_ar_arch(const ArArchConfig& cfg, std::size_t n,
                                         std::uint64_t seed) {
    const auto rep = validate_ar_arch(cfg);
    if (!rep.pass())
        throw std::invalid_argument("simulate_ar_arch: invalid config: " + rep.summary());
    if (!cfg.y_init.empty() && cfg.y_init.size() != cfg.lags)
        throw std::invalid_argument("simulate_ar_arch: y_init must have `lags` entries");

    auto eng = make_engine(derive_seed(seed, 0x617261));
    std::normal_distribution<double> innov(0.0, 1.0);

    TimeSeriesSample out;
    out.dim = cfg.lags;
    out.y.reserve(n);
    out.x.reserve(n * cfg.lags);

    // state holds (y_{t-1}, ..., y_{t-d})
    std::vector<double> state(cfg.lags, 0.0);
    for (std::size_t j = 0; j < cfg.y_init.size(); ++j) state[j] = cfg.y_init[j];

    const std::size_t total = cfg.burn_in + n;
    for (std::size_t t = 0; t < total; ++t) {
        const double yt = cfg.target(state) + cfg.eta(state) * innov(eng);
        if (t >= cfg.burn_in) {
            out.y.push_back(yt);
            out.x.insert(out.x.end(), state.begin(), state.end());
        }
        for (std::size_t j = cfg.lags; j-- > 1;) state[j] = state[j - 1];
        state[0] = yt;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Logistic binomial autoregression: y_t in {0,1} with
// E[y_t | x_t] = exp(B f0(x_t)) / (1 + exp(B f0(x_t))),
// x_t = (v_{t-1}, y_{t-1}, ..., y_{t-r}) in [0,1]^{d-r} x {0,1}^r.
// ---------------------------------------------------------------------------

struct LogisticAutoConfig {
    enum class CovariateProcess { iid_uniform, gaussian_copula_ar };
    enum class ExogeneityMode { strict, uniform_noise };

    std::size_t y_lags = 1;        // r
    std::size_t covariate_dim = 1; // d - r
    double bound = 2.0;            // B >= 2
    HolderTarget target = make_product_sine(2);
    CovariateProcess covariate_process = CovariateProcess::iid_uniform;
    double copula_rho = 0.5;
    ExogeneityMode mode = ExogeneityMode::strict;
    std::size_t burn_in = 1000;

    std::size_t dim() const { return covariate_dim + y_lags; }

    void validate() const {
        if (y_lags < 1) throw std::invalid_argument("LogisticAutoConfig: y_lags must be >= 1");
        if (covariate_dim < 1)
            throw std::invalid_argument("LogisticAutoConfig: covariate_dim must be >= 1");
        if (!(bound >= 2.0)) throw std::invalid_argument("LogisticAutoConfig: bound must be >= 2");
        if (target.dim != dim())
            throw std::invalid_argument("LogisticAutoConfig: target dim must equal d");
        if (covariate_process == CovariateProcess::gaussian_copula_ar &&
            !(copula_rho > -1.0 && copula_rho < 1.0))
            throw std::invalid_argument("LogisticAutoConfig: copula_rho must lie in (-1,1)");
    }
};

inline double sigmoid(double u) {
    if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
    const double e = std::exp(u);
    return e / (1.0 + e);
}

/// E[Y|X=x] = sigmoid(B f0(x)); always strictly inside (0,1).
inline double conditional_mean_logistic(const LogisticAutoConfig& cfg,
                                        std::span<const double> x) {
    return sigmoid(cfg.bound * cfg.target(x));
}

inline TimeSeriesSample simulate_logistic_auto(const LogisticAutoConfig& cfg, std::size_t n,
                                               std::uint64_t seed) {
    cfg.validate();
    auto cov_eng = make_engine(derive_seed(seed, 0x636f76));
    auto noise_eng = make_engine(derive_seed(seed, 0x6e6f69));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> norm(0.0, 1.0);

    const std::size_t total = cfg.burn_in + n;
    const std::size_t dv = cfg.covariate_dim;

    // covariate path drawn first, independent of the y recursion
    std::vector<double> v(total * dv, 0.0);
    if (dv > 0) {
        if (cfg.covariate_process == LogisticAutoConfig::CovariateProcess::iid_uniform) {
            for (double& vi : v) vi = unif(cov_eng);
        } else {
            const double rho = cfg.copula_rho;
            const double innov_sd = std::sqrt(1.0 - rho * rho);
            std::vector<double> z(dv);
            for (std::size_t j = 0; j < dv; ++j) z[j] = norm(cov_eng);  // stationary start
            for (std::size_t t = 0; t < total; ++t)
                for (std::size_t j = 0; j < dv; ++j) {
                    if (t > 0) z[j] = rho * z[j] + innov_sd * norm(cov_eng);
                    v[t * dv + j] = normal_cdf(z[j]);
                }
        }
    }

    TimeSeriesSample out;
    out.dim = cfg.dim();
    out.y.reserve(n);
    out.x.reserve(n * out.dim);

    std::vector<double> ylag(cfg.y_lags, 0.0);
    std::vector<double> xt(out.dim);
    for (std::size_t t = 0; t < total; ++t) {
        for (std::size_t j = 0; j < dv; ++j) xt[j] = v[t * dv + j];
        for (std::size_t j = 0; j < cfg.y_lags; ++j) xt[dv + j] = ylag[j];

        const double p = conditional_mean_logistic(cfg, xt);
        double yt;
        if (cfg.mode == LogisticAutoConfig::ExogeneityMode::strict) {
            // iid logistic-threshold noise: P(noise <= B f0) = sigmoid(B f0)
            const double u = unif(noise_eng);
            const double logistic_noise = std::log(u / (1.0 - u));
            yt = logistic_noise <= cfg.bound * cfg.target(xt) ? 1.0 : 0.0;
        } else {
            // uniform-noise mode, oriented so that E[y|x] matches the model
            const double u = unif(noise_eng);
            yt = u > 1.0 - p ? 1.0 : 0.0;
        }

        if (t >= cfg.burn_in) {
            out.y.push_back(yt);
            out.x.insert(out.x.end(), xt.begin(), xt.end());
        }
        for (std::size_t j = cfg.y_lags; j-- > 1;) ylag[j] = ylag[j - 1];
        ylag[0] = yt;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Tail machinery for the envelope-bound condition.
// ---------------------------------------------------------------------------

/// E[Y^2 1{|Y| >= B}] for Y ~ N(0,1): closed form 2 (B phi(B) + 1 - Phi(B)).
inline double tail_moment_gaussian(double b) {
    if (b < 0.0) throw std::invalid_argument("tail_moment_gaussian: B must be >= 0");
    return 2.0 * (b * normal_pdf(b) + normal_sf(b));
}

struct TailSchedule {
    enum class Mode { stationary_marginal, gaussian_schedule };

    Mode mode = Mode::stationary_marginal;
    double mu = 0.0;     // stationary marginal N(mu, sigma^2); sigma = 0 degenerate
    double sigma = 1.0;
    // per-t moments for the (possibly nonstationary) Gaussian schedule, 1-based t
    std::function<std::pair<double, double>(std::size_t)> moment_fn;
};

struct TailConditionRow {
    std::size_t n = 0;
    double envelope = 0.0;           // B_n
    double stationary_value = 0.0;   // n * P(|Y_1| > B_n)
    double tail_prob_sum = 0.0;      // sum_t P(|Y_t| >= B_n)
    double min_std_threshold = 0.0;  // min_t (B_n - |mu_t|) / sigma_t
};

struct TailConditionReport {
    std::vector<TailConditionRow> rows;
    bool stationary_trend_ok = false;
    bool sum_trend_ok = false;
    bool threshold_trend_ok = false;
    bool pass = false;
};

namespace detail {

inline bool decreasing_or_zero(const std::vector<double>& v) {
    for (std::size_t i = 0; i + 1 < v.size(); ++i)
        if (!(v[i + 1] < v[i] || (v[i] == 0.0 && v[i + 1] == 0.0))) return false;
    return true;
}

inline bool increasing_or_inf(const std::vector<double>& v) {
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        const bool both_inf = std::isinf(v[i]) && std::isinf(v[i + 1]);
        if (!(v[i + 1] > v[i] || both_inf)) return false;
    }
    return true;
}

}  // namespace detail

/// Evaluates the envelope-growth conditions on an n-grid: the stationary value
/// n P(|Y_1| > B_n) must fall, and in the Gaussian-schedule case the summed
/// tail probabilities must fall while the standardized threshold rises.
inline TailConditionReport check_tail_condition(const TailSchedule& sched,
                                                const std::function<double(std::size_t)>& b_fn,
                                                const std::vector<std::size_t>& n_grid) {
    if (n_grid.size() < 2)
        throw std::invalid_argument("check_tail_condition: need a grid of >= 2 sizes");
    TailConditionReport rep;
    std::vector<double> stat_vals, sum_vals, thr_vals;
    for (std::size_t n : n_grid) {
        TailConditionRow row;
        row.n = n;
        row.envelope = b_fn(n);
        if (sched.mode == TailSchedule::Mode::stationary_marginal) {
            row.stationary_value =
                static_cast<double>(n) * normal_two_sided_tail(row.envelope, sched.mu, sched.sigma);
            stat_vals.push_back(row.stationary_value);
        } else {
            if (!sched.moment_fn)
                throw std::invalid_argument("check_tail_condition: moment_fn not set");
            double sum = 0.0;
            double thr = std::numeric_limits<double>::infinity();
            for (std::size_t t = 1; t <= n; ++t) {
                const auto [mu_t, sigma_t] = sched.moment_fn(t);
                sum += normal_two_sided_tail(row.envelope, mu_t, sigma_t);
                const double standardized =
                    sigma_t == 0.0 ? std::numeric_limits<double>::infinity()
                                   : (row.envelope - std::abs(mu_t)) / sigma_t;
                thr = std::min(thr, standardized);
            }
            row.tail_prob_sum = sum;
            row.min_std_threshold = thr;
            sum_vals.push_back(sum);
            thr_vals.push_back(thr);
        }
        rep.rows.push_back(row);
    }
    if (sched.mode == TailSchedule::Mode::stationary_marginal) {
        rep.stationary_trend_ok = detail::decreasing_or_zero(stat_vals);
        rep.pass = rep.stationary_trend_ok;
    } else {
        rep.sum_trend_ok = detail::decreasing_or_zero(sum_vals);
        rep.threshold_trend_ok = detail::increasing_or_inf(thr_vals);
        rep.pass = rep.sum_trend_ok && rep.threshold_trend_ok;
    }
    return rep;
}

}  // namespace sievenet
