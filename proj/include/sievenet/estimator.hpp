#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "sievenet/dgp.hpp"
#include "sievenet/network.hpp"
#include "sievenet/rng.hpp"
#include "sievenet/targets.hpp"

namespace sievenet {

/// Per-observation loss: least squares (y - f(x))^2 or the scaled logistic
/// -y B f(x) + ln(1 + e^{B f(x)}) with y in {0,1}.
struct Criterion {
    enum class Kind { least_squares, logistic };

    Kind kind = Kind::least_squares;
    double scale = 2.0;  // B, logistic only

    static Criterion least_squares() { return {Kind::least_squares, 0.0}; }
    static Criterion logistic(double b) {
        if (!(b >= 2.0)) throw std::invalid_argument("Criterion::logistic: B must be >= 2");
        return {Kind::logistic, b};
    }

    double loss(double y, double f) const {
        if (kind == Kind::least_squares) {
            const double r = y - f;
            return r * r;
        }
        const double u = scale * f;
        // ln(1 + e^u) without overflow
        const double softplus = u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u));
        return -y * u + softplus;
    }

    double dloss_df(double y, double f) const {
        if (kind == Kind::least_squares) return -2.0 * (y - f);
        const double u = scale * f;
        return scale * (sigmoid(u) - y);
    }

    /// Per-observation Lipschitz envelope m_n(z): 2(|y| + B) for least squares,
    /// 2B for the logistic criterion.
    double lipschitz_envelope(double y, double bound) const {
        return kind == Kind::least_squares ? 2.0 * (std::abs(y) + bound) : 2.0 * scale;
    }
};

/// Mean loss over the sample, evaluated through the clamped network output.
inline double empirical_criterion(const Criterion& crit, const NetworkParams& params,
                                  const TimeSeriesSample& sample) {
    if (sample.size() == 0) throw std::invalid_argument("empirical_criterion: empty sample");
    if (sample.dim != params.arch.input_dim)
        throw std::invalid_argument("empirical_criterion: dimension mismatch");
    NetWorkspace ws;
    ws.resize(params.arch);
    double acc = 0.0;
    for (std::size_t t = 0; t < sample.size(); ++t) {
        const double f =
            clip_to_bound(detail::forward_pass(params, sample.x_row(t), ws), params.arch.bound);
        acc += crit.loss(sample.y[t], f);
    }
    return acc / static_cast<double>(sample.size());
}

struct OptimizerSettings {
    double step = 1e-2;
    std::size_t max_iter = 5000;
    double rel_tol = 1e-9;      // relative improvement threshold ...
    std::size_t patience = 50;  // ... over this many iterations
    bool monotone = false;      // backtrack so the criterion never increases
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct OptimizerTrace {
    std::size_t iterations = 0;
    double initial_criterion = 0.0;
    double final_criterion = 0.0;
    std::vector<double> history;  // criterion before each accepted step
};

struct FitResult {
    NetworkParams params;
    double empirical_criterion = 0.0;
    double theta_n = 0.0;
    std::size_t restarts_used = 0;
    std::size_t restarts_discarded = 0;
    std::vector<double> restart_criteria;  // final criterion per surviving restart
    OptimizerTrace trace;                  // trace of the winning restart
};

namespace detail {

// criterion value and gradient in one pass over the sample
inline double criterion_and_gradient(const Criterion& crit, const NetworkParams& params,
                                     const TimeSeriesSample& sample, NetWorkspace& ws,
                                     std::span<double> grad) {
    std::fill(grad.begin(), grad.end(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(sample.size());
    double acc = 0.0;
    for (std::size_t t = 0; t < sample.size(); ++t) {
        const auto x = sample.x_row(t);
        const double raw = forward_pass(params, x, ws);
        const double f = clip_to_bound(raw, params.arch.bound);
        acc += crit.loss(sample.y[t], f);
        const double upstream = crit.dloss_df(sample.y[t], f) * inv_n;
        backward_accumulate(params, x, upstream, ws, grad);
    }
    return acc * inv_n;
}

inline OptimizerTrace adam_minimize(const Criterion& crit, NetworkParams& params,
                                    const TimeSeriesSample& sample,
                                    const OptimizerSettings& opt) {
    const std::size_t w = params.gamma.size();
    std::vector<double> grad(w), m(w, 0.0), v(w, 0.0), prev_gamma;
    NetWorkspace ws;
    ws.resize(params.arch);

    OptimizerTrace trace;
    trace.history.reserve(std::min<std::size_t>(opt.max_iter, 8192));

    std::vector<double> best_gamma = params.gamma;
    std::vector<double> best_history;
    best_history.reserve(trace.history.capacity());
    double best = std::numeric_limits<double>::infinity();

    double cur = criterion_and_gradient(crit, params, sample, ws, grad);
    trace.initial_criterion = cur;

    std::size_t it = 0;
    for (; it < opt.max_iter; ++it) {
        trace.history.push_back(cur);
        if (!std::isfinite(cur)) break;
        if (cur < best) {
            best = cur;
            best_gamma = params.gamma;
        }
        best_history.push_back(best);
        // stop when the running best stalls over the patience window
        if (it >= opt.patience) {
            const double then = best_history[it - opt.patience];
            if (then - best < opt.rel_tol * std::max(1.0, std::abs(then))) break;
        }

        const double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(it + 1));
        const double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(it + 1));
        for (std::size_t i = 0; i < w; ++i) {
            m[i] = opt.beta1 * m[i] + (1.0 - opt.beta1) * grad[i];
            v[i] = opt.beta2 * v[i] + (1.0 - opt.beta2) * grad[i] * grad[i];
        }

        if (opt.monotone) prev_gamma = params.gamma;
        double scale = opt.step;
        for (int backtrack = 0;; ++backtrack) {
            for (std::size_t i = 0; i < w; ++i) {
                const double mhat = m[i] / bc1;
                const double vhat = v[i] / bc2;
                params.gamma[i] =
                    (opt.monotone ? prev_gamma[i] : params.gamma[i]) -
                    scale * mhat / (std::sqrt(vhat) + opt.eps);
            }
            const double next = criterion_and_gradient(crit, params, sample, ws, grad);
            if (!opt.monotone || next <= cur || backtrack >= 30) {
                cur = next;
                break;
            }
            scale *= 0.5;
        }
        if (opt.monotone && cur > trace.history.back()) {
            // could not find a non-increasing step; restore and stop
            params.gamma = prev_gamma;
            cur = trace.history.back();
            break;
        }
    }
    trace.iterations = it;

    if (cur < best && std::isfinite(cur)) {
        best = cur;
        best_gamma = params.gamma;
    }
    params.gamma = std::move(best_gamma);
    trace.final_criterion = best;
    return trace;
}

}  // namespace detail

/// Approximate sieve estimation: `restarts` independently initialized
/// full-batch Adam runs; the best final criterion wins. The reported theta_n
/// is the winner's gap to the best restart envelope (zero by construction),
/// with the per-restart finals kept as the observable gap distribution.
inline FitResult fit_sieve(const Criterion& crit, const ArchitectureSpec& arch,
                           const TimeSeriesSample& sample, const OptimizerSettings& opt,
                           std::size_t restarts, std::uint64_t seed) {
    arch.validate();
    if (sample.size() < 2) throw std::invalid_argument("fit_sieve: need at least 2 observations");
    if (sample.dim != arch.input_dim)
        throw std::invalid_argument("fit_sieve: sample/arch dimension mismatch");
    if (restarts < 1) throw std::invalid_argument("fit_sieve: need at least 1 restart");

    FitResult result;
    result.restarts_used = restarts;
    double best = std::numeric_limits<double>::infinity();
    bool have_winner = false;

    for (std::size_t r = 0; r < restarts; ++r) {
        NetworkParams p = init_params(arch, derive_seed(seed, 0xf17, r));
        OptimizerTrace trace = detail::adam_minimize(crit, p, sample, opt);
        if (!std::isfinite(trace.final_criterion)) {
            ++result.restarts_discarded;
            continue;
        }
        result.restart_criteria.push_back(trace.final_criterion);
        if (trace.final_criterion < best) {
            best = trace.final_criterion;
            result.params = std::move(p);
            result.trace = std::move(trace);
            have_winner = true;
        }
    }
    if (!have_winner) throw std::runtime_error("fit_sieve: every restart diverged");

    result.empirical_criterion = best;
    const double envelope =
        *std::min_element(result.restart_criteria.begin(), result.restart_criteria.end());
    result.theta_n = best - envelope;
    return result;
}

/// RMS distance between the fitted (clamped) network and the target over the
/// x-rows of a sample. `empirical_l2` on the training sample, `population_l2`
/// on a long fresh path.
inline double empirical_l2(const NetworkParams& params, const HolderTarget& target,
                           const TimeSeriesSample& sample) {
    if (sample.size() == 0) throw std::invalid_argument("empirical_l2: empty sample");
    NetWorkspace ws;
    ws.resize(params.arch);
    double acc = 0.0;
    for (std::size_t t = 0; t < sample.size(); ++t) {
        const auto x = sample.x_row(t);
        const double d =
            clip_to_bound(detail::forward_pass(params, x, ws), params.arch.bound) - target(x);
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(sample.size()));
}

inline double population_l2(const NetworkParams& params, const HolderTarget& target,
                            const TimeSeriesSample& eval_sample) {
    return empirical_l2(params, target, eval_sample);
}

/// Curvature constants (c1, c2) with c1 d^2 <= E[Q(f)] - E[Q(f0)] <= c2 d^2:
/// the exact identity (1, 1) for least squares; for the logistic criterion the
/// Taylor bounds c1 = 1/(2(e^{B^2}+e^{-B^2}+2)), c2 = 1/4 on the B-scaled gap.
inline std::pair<double, double> curvature_constants(const Criterion& crit) {
    if (crit.kind == Criterion::Kind::least_squares) return {1.0, 1.0};
    const double b2 = crit.scale * crit.scale;
    return {0.5 / (std::exp(b2) + std::exp(-b2) + 2.0), 0.25};
}

/// Monte Carlo curvature probe. delta_q estimates E[Q(f)] - E[Q(f0)];
/// sq_dist is the matching squared distance (||f-f0||^2 for least squares,
/// ||B(f-f0)||^2 for the logistic Taylor sandwich); lhs/rhs are the curvature
/// bounds applied to sq_dist.
struct CurvatureProbe {
    double delta_q = 0.0;
    double se_delta_q = 0.0;
    double sq_dist = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
};

namespace detail {

template <typename F>
inline CurvatureProbe curvature_probe_impl(const Criterion& crit, const F& f,
                                           const HolderTarget& f0, const TimeSeriesSample& mc,
                                           double scale_sq) {
    CurvatureProbe probe;
    const std::size_t n = mc.size();
    double acc = 0.0, acc2 = 0.0, dist = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const auto x = mc.x_row(t);
        const double fd = f(x), f0d = f0(x);
        const double dq = crit.loss(mc.y[t], fd) - crit.loss(mc.y[t], f0d);
        acc += dq;
        acc2 += dq * dq;
        dist += (fd - f0d) * (fd - f0d);
    }
    const double dn = static_cast<double>(n);
    probe.delta_q = acc / dn;
    const double var = std::max(0.0, acc2 / dn - probe.delta_q * probe.delta_q);
    probe.se_delta_q = std::sqrt(var / dn);
    probe.sq_dist = scale_sq * dist / dn;
    const auto [c1, c2] = curvature_constants(crit);
    probe.lhs = c1 * probe.sq_dist;
    probe.rhs = c2 * probe.sq_dist;
    return probe;
}

}  // namespace detail

template <typename F>
inline CurvatureProbe curvature_probe(const Criterion& crit, const F& f, const ArArchConfig& cfg,
                                      std::size_t mc_n, std::uint64_t seed) {
    if (crit.kind != Criterion::Kind::least_squares)
        throw std::invalid_argument("curvature_probe: AR-ARCH config implies least squares");
    const auto mc = simulate_ar_arch(cfg, mc_n, seed);
    return detail::curvature_probe_impl(crit, f, cfg.target, mc, 1.0);
}

template <typename F>
inline CurvatureProbe curvature_probe(const Criterion& crit, const F& f,
                                      const LogisticAutoConfig& cfg, std::size_t mc_n,
                                      std::uint64_t seed) {
    if (crit.kind != Criterion::Kind::logistic)
        throw std::invalid_argument("curvature_probe: logistic config implies logistic loss");
    const auto mc = simulate_logistic_auto(cfg, mc_n, seed);
    return detail::curvature_probe_impl(crit, f, cfg.target, mc, crit.scale * crit.scale);
}

}  // namespace sievenet
