#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>

namespace sievenet {

enum class TargetId { product_sine, scaled_cosine, custom };

inline std::string to_string(TargetId id) {
    switch (id) {
        case TargetId::product_sine: return "product_sine";
        case TargetId::scaled_cosine: return "scaled_cosine";
        case TargetId::custom: return "custom";
    }
    return "unknown";
}

inline TargetId target_id_from_string(const std::string& s) {
    if (s == "product_sine") return TargetId::product_sine;
    if (s == "scaled_cosine") return TargetId::scaled_cosine;
    if (s == "custom") return TargetId::custom;
    throw std::invalid_argument("unknown target id: " + s);
}

/// Smooth regression target with a claimed smoothness order. The library
/// targets keep every partial derivative (and the function itself) bounded by
/// one in sup-norm:
///   product_sine   f0(x) = prod_j sin(x_j)
///   scaled_cosine  f0(x) = cos(mean(x))
struct HolderTarget {
    TargetId id = TargetId::product_sine;
    std::size_t dim = 1;
    std::size_t smoothness = 2;
    bool bounded = true;  // custom targets must declare boundedness themselves
    std::function<double(std::span<const double>)> custom_fn;

    double operator()(std::span<const double> x) const {
        if (x.size() != dim) throw std::invalid_argument("HolderTarget: dimension mismatch");
        switch (id) {
            case TargetId::product_sine: {
                double v = 1.0;
                for (double xi : x) v *= std::sin(xi);
                return v;
            }
            case TargetId::scaled_cosine: {
                double s = 0.0;
                for (double xi : x) s += xi;
                return std::cos(s / static_cast<double>(dim));
            }
            case TargetId::custom:
                if (!custom_fn) throw std::invalid_argument("HolderTarget: custom_fn not set");
                return custom_fn(x);
        }
        throw std::invalid_argument("HolderTarget: unknown id");
    }
};

inline HolderTarget make_product_sine(std::size_t dim, std::size_t smoothness = 2) {
    return {TargetId::product_sine, dim, smoothness, true, {}};
}

inline HolderTarget make_scaled_cosine(std::size_t dim, std::size_t smoothness = 2) {
    return {TargetId::scaled_cosine, dim, smoothness, true, {}};
}

inline HolderTarget make_custom_target(std::size_t dim,
                                       std::function<double(std::span<const double>)> fn,
                                       bool bounded = true, std::size_t smoothness = 1) {
    return {TargetId::custom, dim, smoothness, bounded, std::move(fn)};
}

/// Root-mean-square distance between two functions over the x-rows of an
/// evaluation sample (Monte Carlo stand-in for the L2(P_X) norm).
template <typename F, typename G>
inline double true_l2_distance(const F& f, const G& g, std::span<const double> x_flat,
                               std::size_t dim) {
    if (dim == 0 || x_flat.size() % dim != 0)
        throw std::invalid_argument("true_l2_distance: bad sample layout");
    const std::size_t n = x_flat.size() / dim;
    if (n == 0) throw std::invalid_argument("true_l2_distance: empty sample");
    double s = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        std::span<const double> row = x_flat.subspan(t * dim, dim);
        const double d = f(row) - g(row);
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(n));
}

}  // namespace sievenet
