#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "sievenet/activation.hpp"
#include "sievenet/rng.hpp"

namespace sievenet {

/// Fully connected feedforward architecture: `depth` hidden layers with the
/// given widths, scalar affine output node, and a sup-norm bound enforced by
/// clamping the output to [-bound, bound].
struct ArchitectureSpec {
    std::size_t depth = 1;
    std::vector<std::size_t> widths;
    std::size_t input_dim = 1;
    double bound = 2.0;
    ActivationSpec activation = ActivationSpec::relu();

    void validate() const {
        if (depth < 1) throw std::invalid_argument("ArchitectureSpec: depth must be >= 1");
        if (widths.size() != depth)
            throw std::invalid_argument("ArchitectureSpec: widths.size() must equal depth");
        for (std::size_t h : widths)
            if (h < 1) throw std::invalid_argument("ArchitectureSpec: widths must be >= 1");
        if (input_dim < 1) throw std::invalid_argument("ArchitectureSpec: input_dim must be >= 1");
        if (!(bound >= 2.0)) throw std::invalid_argument("ArchitectureSpec: bound must be >= 2");
        activation.validate();
    }

    static ArchitectureSpec uniform(std::size_t depth, std::size_t width, std::size_t input_dim,
                                    double bound = 2.0,
                                    ActivationSpec act = ActivationSpec::relu()) {
        ArchitectureSpec a;
        a.depth = depth;
        a.widths.assign(depth, width);
        a.input_dim = input_dim;
        a.bound = bound;
        a.activation = std::move(act);
        return a;
    }
};

/// Total number of parameters: every node carries one intercept plus one weight
/// per unit of the previous layer; the output node counts as one more layer of
/// width one.
inline std::size_t param_count(const ArchitectureSpec& arch) {
    arch.validate();
    std::size_t total = 0;
    std::size_t prev = arch.input_dim;
    for (std::size_t l = 0; l < arch.depth; ++l) {
        total += arch.widths[l] * (prev + 1);
        prev = arch.widths[l];
    }
    total += prev + 1;  // output node
    return total;
}

/// Flat parameter vector in canonical layout: layers in order (hidden layers
/// then output), nodes in order within a layer, and per node the intercept
/// first followed by the incoming weights.
struct NetworkParams {
    ArchitectureSpec arch;
    std::vector<double> gamma;

    void validate() const {
        arch.validate();
        if (gamma.size() != param_count(arch))
            throw std::invalid_argument("NetworkParams: gamma length != param_count(arch)");
    }
};

/// He-style initialization: every entry of gamma drawn N(0, 2/fan_in) with the
/// fan-in of its layer. Deterministic for a fixed seed.
inline NetworkParams init_params(const ArchitectureSpec& arch, std::uint64_t seed) {
    NetworkParams p;
    p.arch = arch;
    p.gamma.resize(param_count(arch));
    auto eng = make_engine(derive_seed(seed, 0x6e657477 /* layer stream */));
    std::normal_distribution<double> unit(0.0, 1.0);
    std::size_t idx = 0;
    std::size_t prev = arch.input_dim;
    for (std::size_t l = 0; l <= arch.depth; ++l) {
        const std::size_t width = (l < arch.depth) ? arch.widths[l] : 1;
        const double scale = std::sqrt(2.0 / static_cast<double>(prev));
        for (std::size_t h = 0; h < width; ++h)
            for (std::size_t k = 0; k <= prev; ++k) p.gamma[idx++] = scale * unit(eng);
        prev = width;
    }
    return p;
}

/// Reusable buffers for forward/backward passes over one architecture.
struct NetWorkspace {
    std::vector<std::vector<double>> pre;    // pre-activations per hidden layer
    std::vector<std::vector<double>> act;    // activations per hidden layer
    std::vector<std::vector<double>> delta;  // backprop node sensitivities
    std::vector<std::size_t> layer_off;      // parameter offset per hidden layer
    std::size_t out_off = 0;                 // parameter offset of the output node
    double raw = 0.0;

    void resize(const ArchitectureSpec& arch) {
        pre.resize(arch.depth);
        act.resize(arch.depth);
        delta.resize(arch.depth);
        layer_off.resize(arch.depth);
        std::size_t off = 0;
        std::size_t prev = arch.input_dim;
        for (std::size_t l = 0; l < arch.depth; ++l) {
            pre[l].resize(arch.widths[l]);
            act[l].resize(arch.widths[l]);
            delta[l].resize(arch.widths[l]);
            layer_off[l] = off;
            off += arch.widths[l] * (prev + 1);
            prev = arch.widths[l];
        }
        out_off = off;
    }
};

namespace detail {

inline double forward_pass(const NetworkParams& p, std::span<const double> x, NetWorkspace& ws) {
    const auto& arch = p.arch;
    const double* g = p.gamma.data();
    std::span<const double> prev = x;
    for (std::size_t l = 0; l < arch.depth; ++l) {
        const std::size_t width = arch.widths[l];
        for (std::size_t h = 0; h < width; ++h) {
            double z = *g++;  // intercept
            for (double v : prev) z += *g++ * v;
            ws.pre[l][h] = z;
            ws.act[l][h] = arch.activation(z);
        }
        prev = ws.act[l];
    }
    double out = *g++;
    for (double v : prev) out += *g++ * v;
    ws.raw = out;
    return out;
}

}  // namespace detail

/// Raw network output nu_{L+1,1}(x | gamma); hidden nodes apply the activation,
/// the output node is affine.
inline double forward(const NetworkParams& params, std::span<const double> x) {
    if (x.size() != params.arch.input_dim)
        throw std::invalid_argument("forward: input dimension mismatch");
    NetWorkspace ws;
    ws.resize(params.arch);
    return detail::forward_pass(params, x, ws);
}

inline double clip_to_bound(double raw, double bound) {
    return std::max(-bound, std::min(bound, raw));
}

/// Output clamped into [-B, B]; this is the function that lives in the sieve space.
inline double clipped_forward(const NetworkParams& params, std::span<const double> x) {
    return clip_to_bound(forward(params, x), params.arch.bound);
}

namespace detail {

// Clamp derivative with the left-piece convention at the boundaries:
// slope 1 on (-B, B], slope 0 elsewhere.
inline double clip_slope(double raw, double bound) {
    return (raw > -bound && raw <= bound) ? 1.0 : 0.0;
}

/// Accumulates upstream * d(clipped_forward)/d(gamma) into grad (same layout as
/// gamma). Assumes forward_pass has just filled ws for this x.
inline void backward_accumulate(const NetworkParams& p, std::span<const double> x, double upstream,
                                NetWorkspace& ws, std::span<double> grad) {
    const auto& arch = p.arch;
    const double out_scale = upstream * clip_slope(ws.raw, arch.bound);
    if (out_scale == 0.0) return;

    // output node
    const std::size_t out_off = ws.out_off;
    const std::size_t last_w = arch.widths[arch.depth - 1];
    const double* out_g = p.gamma.data() + out_off;
    grad[out_off] += out_scale;
    for (std::size_t i = 0; i < last_w; ++i) {
        grad[out_off + 1 + i] += out_scale * ws.act[arch.depth - 1][i];
        ws.delta[arch.depth - 1][i] =
            out_scale * out_g[1 + i] * arch.activation.slope_at(ws.pre[arch.depth - 1][i]);
    }

    // hidden layers, last to first
    for (std::size_t l = arch.depth; l-- > 0;) {
        const std::size_t width = arch.widths[l];
        const std::size_t in_dim = (l == 0) ? arch.input_dim : arch.widths[l - 1];
        std::span<const double> inputs = (l == 0) ? x : std::span<const double>(ws.act[l - 1]);
        if (l > 0)
            for (std::size_t i = 0; i < in_dim; ++i) ws.delta[l - 1][i] = 0.0;
        const double* gl = p.gamma.data() + ws.layer_off[l];
        double* gradl = grad.data() + ws.layer_off[l];
        for (std::size_t h = 0; h < width; ++h) {
            const double dh = ws.delta[l][h];
            const std::size_t node_off = h * (in_dim + 1);
            if (dh != 0.0) {
                gradl[node_off] += dh;
                for (std::size_t k = 0; k < in_dim; ++k)
                    gradl[node_off + 1 + k] += dh * inputs[k];
            }
            if (l > 0 && dh != 0.0) {
                for (std::size_t k = 0; k < in_dim; ++k)
                    ws.delta[l - 1][k] += dh * gl[node_off + 1 + k];
            }
        }
        if (l > 0)
            for (std::size_t k = 0; k < in_dim; ++k)
                ws.delta[l - 1][k] *= arch.activation.slope_at(ws.pre[l - 1][k]);
    }
}

}  // namespace detail

/// Reverse-mode gradient of clipped_forward wrt gamma, scaled by `upstream`.
/// Zero whenever the output clamp is active; kinks use the left-piece slope.
inline std::vector<double> gradient(const NetworkParams& params, std::span<const double> x,
                                    double upstream = 1.0) {
    if (x.size() != params.arch.input_dim)
        throw std::invalid_argument("gradient: input dimension mismatch");
    NetWorkspace ws;
    ws.resize(params.arch);
    detail::forward_pass(params, x, ws);
    std::vector<double> grad(params.gamma.size(), 0.0);
    detail::backward_accumulate(params, x, upstream, ws, grad);
    return grad;
}

}  // namespace sievenet
