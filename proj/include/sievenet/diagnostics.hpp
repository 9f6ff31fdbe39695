#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "sievenet/estimator.hpp"
#include "sievenet/network.hpp"
#include "sievenet/rng.hpp"
#include "sievenet/targets.hpp"

namespace sievenet {

/// Alternating blocks of length a: b = floor(n/(2a)) odd blocks T1_j, even
/// blocks T2_j and the remainder T_R. Indices are 1-based observation times.
struct BlockPartition {
    std::size_t n = 0;
    std::size_t block_len = 0;    // a
    std::size_t block_count = 0;  // b
    std::vector<std::vector<std::size_t>> t1;
    std::vector<std::vector<std::size_t>> t2;
    std::vector<std::size_t> remainder;
};

inline BlockPartition block_partition(std::size_t n, std::size_t a) {
    if (a < 1 || 2 * a > n)
        throw std::invalid_argument("block_partition: need 1 <= a <= n/2");
    BlockPartition part;
    part.n = n;
    part.block_len = a;
    part.block_count = n / (2 * a);
    part.t1.resize(part.block_count);
    part.t2.resize(part.block_count);
    for (std::size_t j = 1; j <= part.block_count; ++j) {
        auto& odd = part.t1[j - 1];
        auto& even = part.t2[j - 1];
        for (std::size_t t = 2 * (j - 1) * a + 1; t <= (2 * j - 1) * a; ++t) odd.push_back(t);
        for (std::size_t t = (2 * j - 1) * a + 1; t <= 2 * j * a; ++t) even.push_back(t);
    }
    for (std::size_t t = 2 * part.block_count * a + 1; t <= n; ++t)
        part.remainder.push_back(t);
    return part;
}

struct BlockNorms {
    std::vector<double> per_block;  // RMS of g over each odd block
    double aggregate = 0.0;         // pooled RMS across odd blocks
};

/// Per-odd-block RMS norms ((1/a) sum_{t in T1j} g(x_t)^2)^{1/2} and the pooled
/// aggregate ((1/b) sum_j per_block_j^2)^{1/2}.
inline BlockNorms block_norm(const std::function<double(std::span<const double>)>& g,
                             const TimeSeriesSample& sample, const BlockPartition& part) {
    if (sample.size() != part.n)
        throw std::invalid_argument("block_norm: partition does not match sample length");
    BlockNorms out;
    out.per_block.reserve(part.block_count);
    double pooled = 0.0;
    for (const auto& block : part.t1) {
        double acc = 0.0;
        for (std::size_t t : block) {
            const double v = g(sample.x_row(t - 1));
            acc += v * v;
        }
        acc /= static_cast<double>(part.block_len);
        pooled += acc;
        out.per_block.push_back(std::sqrt(acc));
    }
    out.aggregate = std::sqrt(pooled / static_cast<double>(part.block_count));
    return out;
}

/// Heuristic lower bound on the empirical Rademacher complexity of
/// {networks of `arch` within empirical radius r of f0}, centered at f0.
/// For each sign draw the sup is approached two ways and the better kept:
/// a short gradient ascent on the sign correlation followed by scaling the
/// fitted network toward f0 onto the radius, and the best in-radius constant.
inline double empirical_rademacher(const ArchitectureSpec& arch, const HolderTarget& f0,
                                   const TimeSeriesSample& sample, double radius,
                                   std::size_t draws, std::uint64_t seed,
                                   const OptimizerSettings& opt = {.step = 2e-2,
                                                                   .max_iter = 200,
                                                                   .rel_tol = 1e-7,
                                                                   .patience = 25}) {
    arch.validate();
    if (sample.size() == 0) throw std::invalid_argument("empirical_rademacher: empty sample");
    if (radius < 0.0) throw std::invalid_argument("empirical_rademacher: negative radius");
    if (draws < 1) throw std::invalid_argument("empirical_rademacher: need draws >= 1");

    const std::size_t n = sample.size();
    const double inv_n = 1.0 / static_cast<double>(n);

    std::vector<double> f0_vals(n);
    double f0_mean = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        f0_vals[t] = f0(sample.x_row(t));
        f0_mean += f0_vals[t];
    }
    f0_mean *= inv_n;
    double f0_var = 0.0;
    for (double v : f0_vals) f0_var += (v - f0_mean) * (v - f0_mean);
    f0_var *= inv_n;

    // treat maximizing the sign correlation as least squares toward huge
    // pseudo-targets: grad of -(1/n) sum xi (f - f0) wrt f is -xi/n
    NetWorkspace ws;
    ws.resize(arch);
    std::vector<double> grad(param_count(arch));

    double total = 0.0;
    for (std::size_t d = 0; d < draws; ++d) {
        auto eng = make_engine(derive_seed(seed, 0x7261, d));
        std::bernoulli_distribution coin(0.5);
        std::vector<double> xi(n);
        double xi_mean = 0.0;
        for (double& s : xi) {
            s = coin(eng) ? 1.0 : -1.0;
            xi_mean += s;
        }
        xi_mean *= inv_n;

        double draw_best = 0.0;  // f = f0 (radius 0) always gives 0

        // candidate 1: best constant within the radius
        if (radius * radius >= f0_var) {
            const double shift = std::sqrt(radius * radius - f0_var);
            for (double c : {f0_mean + shift, f0_mean - shift}) {
                const double cc = clip_to_bound(c, arch.bound);
                double obj = 0.0;
                for (std::size_t t = 0; t < n; ++t) obj += xi[t] * (cc - f0_vals[t]);
                draw_best = std::max(draw_best, obj * inv_n);
            }
        }

        // candidate 2: short gradient ascent, then scale toward f0 onto the radius
        if (radius > 0.0) {
            NetworkParams p = init_params(arch, derive_seed(seed, 0x7262, d));
            std::vector<double> m(p.gamma.size(), 0.0), v(p.gamma.size(), 0.0);
            for (std::size_t it = 0; it < opt.max_iter; ++it) {
                std::fill(grad.begin(), grad.end(), 0.0);
                for (std::size_t t = 0; t < n; ++t) {
                    detail::forward_pass(p, sample.x_row(t), ws);
                    detail::backward_accumulate(p, sample.x_row(t), -xi[t] * inv_n, ws, grad);
                }
                const double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(it + 1));
                const double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(it + 1));
                for (std::size_t i = 0; i < p.gamma.size(); ++i) {
                    m[i] = opt.beta1 * m[i] + (1.0 - opt.beta1) * grad[i];
                    v[i] = opt.beta2 * v[i] + (1.0 - opt.beta2) * grad[i] * grad[i];
                    p.gamma[i] -= opt.step * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + opt.eps);
                }
            }
            // scale s (f - f0) onto the radius ball and evaluate the correlation
            double dist2 = 0.0, corr = 0.0;
            for (std::size_t t = 0; t < n; ++t) {
                const double diff =
                    clip_to_bound(detail::forward_pass(p, sample.x_row(t), ws), arch.bound) -
                    f0_vals[t];
                dist2 += diff * diff;
                corr += xi[t] * diff;
            }
            dist2 *= inv_n;
            corr *= inv_n;
            const double s = dist2 > 0.0 ? std::min(1.0, radius / std::sqrt(dist2)) : 0.0;
            draw_best = std::max(draw_best, s * corr);
        }

        total += draw_best;
    }
    return total / static_cast<double>(draws);
}

/// Truncation diagnostics for the envelope bound B_n: the largest |y|, how
/// often the envelope event |y_t| >= B_n fires, the worst-case Lipschitz
/// envelope max_t m_n(z_t), and the plug-in tail moment (1/n) sum y^2 1{|y|>=B}.
struct TruncationReport {
    double max_abs_y = 0.0;
    std::size_t exceed_count = 0;
    double m_n_max = 0.0;
    double tail_moment_hat = 0.0;
};

inline TruncationReport truncation_report(std::span<const double> y, double envelope,
                                          const Criterion& crit) {
    TruncationReport rep;
    double tail = 0.0;
    for (double yt : y) {
        const double a = std::abs(yt);
        rep.max_abs_y = std::max(rep.max_abs_y, a);
        if (a >= envelope) {
            ++rep.exceed_count;
            tail += yt * yt;
        }
    }
    rep.m_n_max = crit.lipschitz_envelope(rep.max_abs_y, envelope);
    rep.tail_moment_hat = y.empty() ? 0.0 : tail / static_cast<double>(y.size());
    return rep;
}

}  // namespace sievenet
