#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sievenet/stats.hpp"

namespace sievenet {

/// Inputs to the architecture scaling rules. The c_* constants instantiate the
/// asymptotic-order relations; they default to 1 and outputs are rounded up.
struct ScalingInput {
    std::size_t n = 0;
    std::size_t d = 1;        // input dimension
    std::size_t p = 1;        // smoothness
    double kappa_bar = 0.0;   // growth exponent of the envelope bound
    double upsilon = 0.0;     // block exponent (stationary regression only)
    double c_L = 1.0;
    double c_H = 1.0;
    double c_B = 1.0;

    void validate() const {
        if (n < 2) throw std::invalid_argument("ScalingInput: n must be >= 2");
        if (d < 1 || p < 1) throw std::invalid_argument("ScalingInput: d, p must be >= 1");
        if (!(kappa_bar >= 0.0 && kappa_bar < 0.5))
            throw std::invalid_argument("ScalingInput: kappa_bar must lie in [0, 1/2)");
        if (upsilon < 0.0) throw std::invalid_argument("ScalingInput: upsilon must be >= 0");
        if (!(c_L > 0.0 && c_H > 0.0 && c_B > 0.0))
            throw std::invalid_argument("ScalingInput: constants must be positive");
    }
};

struct ScalingOutput {
    std::size_t depth = 0;        // L_n
    std::size_t width = 0;        // H_n (uniform)
    std::size_t param_count = 0;  // W_n for the uniform architecture
    double bound = 0.0;           // B_n
    double rate_exponent = 0.0;   // power of n in eps_n (negative)
    double rate_value = 0.0;      // eps_n including its log factor
    double projection_bound = 0.0;  // sup-norm approximation error bound
};

namespace detail {

inline std::size_t ceil_pos(double v) {
    const double c = std::ceil(v);
    return c < 1.0 ? 1 : static_cast<std::size_t>(c);
}

// W = H^2(L-1) + H(d+L+1) + 1 for L uniform hidden layers of width H.
inline std::size_t uniform_param_count(std::size_t L, std::size_t H, std::size_t d) {
    return H * H * (L - 1) + H * (d + L + 1) + 1;
}

inline ScalingOutput make_scaling(const ScalingInput& in, double width_exp, double rate_exp,
                                  double log_power, double bound) {
    const double n = static_cast<double>(in.n);
    const double ln = std::log(n);
    ScalingOutput out;
    out.depth = ceil_pos(in.c_L * ln);
    out.width = ceil_pos(in.c_H * std::pow(n, width_exp) * ln * ln);
    out.param_count = uniform_param_count(out.depth, out.width, in.d);
    out.bound = bound;
    out.rate_exponent = rate_exp;
    out.rate_value = std::pow(n, rate_exp) * std::pow(ln, log_power);
    out.projection_bound = std::pow(n, rate_exp);
    return out;
}

}  // namespace detail

/// Architecture and rate for nonstationary alpha-mixing regression:
/// H ~ n^{(d/(p+d/2))(1/4-kappa)} log^2 n, eps ~ n^{-(p/(p+d/2))(1/4-kappa)} log^{2+upsilon} n.
inline ScalingOutput scale_regression_nonstationary(const ScalingInput& in) {
    in.validate();
    if (!(in.kappa_bar < 0.25))
        throw std::invalid_argument(
            "scale_regression_nonstationary: kappa_bar must lie in [0, 1/4)");
    const double d = static_cast<double>(in.d), p = static_cast<double>(in.p);
    const double shrink = 0.25 - in.kappa_bar;
    return detail::make_scaling(in, (d / (p + d / 2.0)) * shrink, -(p / (p + d / 2.0)) * shrink,
                                2.0 + in.upsilon,
                                in.c_B * std::pow(static_cast<double>(in.n), in.kappa_bar));
}

/// Architecture and rate for strictly stationary beta-mixing regression:
/// H ~ n^{(d/(p+d))(1/2-kappa-upsilon)} log^2 n, eps ~ n^{-(p/(p+d))(1/2-kappa-upsilon)} log^6 n.
/// upsilon = 0 gives the headline stationary rate.
inline ScalingOutput scale_regression_stationary(const ScalingInput& in) {
    in.validate();
    if (!(in.upsilon < 0.5 - in.kappa_bar))
        throw std::invalid_argument(
            "scale_regression_stationary: upsilon must lie in [0, 1/2 - kappa_bar)");
    const double d = static_cast<double>(in.d), p = static_cast<double>(in.p);
    const double shrink = 0.5 - in.kappa_bar - in.upsilon;
    return detail::make_scaling(in, (d / (p + d)) * shrink, -(p / (p + d)) * shrink, 6.0,
                                in.c_B * std::pow(static_cast<double>(in.n), in.kappa_bar));
}

/// Architecture and rate for the logistic binomial autoregression:
/// H ~ n^{(1/2)(d/(p+d))} log^2 n, eps ~ n^{-(1/2)(p/(p+d))} log^5 n, and the
/// sup-norm bound is the fixed value 2.
inline ScalingOutput scale_logistic(const ScalingInput& in) {
    in.validate();
    const double d = static_cast<double>(in.d), p = static_cast<double>(in.p);
    return detail::make_scaling(in, 0.5 * d / (p + d), -0.5 * p / (p + d), 5.0, 2.0);
}

/// Guaranteed sup-norm projection error n^{-kappa p / d}, available once the
/// architecture clears the depth/width thresholds ceil(C log n) and
/// ceil(C n^kappa log^2 n).
inline double approximation_bound(std::size_t depth, std::size_t min_width, std::size_t n,
                                  std::size_t d, std::size_t p, double kappa,
                                  double threshold_const = 1.0) {
    if (n < 3) throw std::invalid_argument("approximation_bound: n must be >= 3");
    if (!(kappa > 0.0 && kappa < 1.0))
        throw std::invalid_argument("approximation_bound: kappa must lie in (0,1)");
    const double ln = std::log(static_cast<double>(n));
    const auto depth_needed = detail::ceil_pos(threshold_const * ln);
    const auto width_needed =
        detail::ceil_pos(threshold_const * std::pow(static_cast<double>(n), kappa) * ln * ln);
    if (depth < depth_needed || min_width < width_needed)
        throw std::invalid_argument(
            "approximation_bound: architecture too small (need depth >= " +
            std::to_string(depth_needed) + ", min width >= " + std::to_string(width_needed) + ")");
    return std::pow(static_cast<double>(n), -kappa * static_cast<double>(p) /
                                                static_cast<double>(d));
}

/// Order bounds c W L ln(W/L) <= Pdim <= C W L ln W for piecewise-linear nets.
inline std::pair<double, double> pdim_order_bounds(std::size_t param_count, std::size_t depth,
                                                   double c_lower = 1.0, double c_upper = 1.0) {
    if (depth < 1) throw std::invalid_argument("pdim_order_bounds: depth must be >= 1");
    if (param_count <= depth)
        throw std::invalid_argument("pdim_order_bounds: need param_count > depth");
    const double w = static_cast<double>(param_count), l = static_cast<double>(depth);
    return {c_lower * w * l * std::log(w / l), c_upper * w * l * std::log(w)};
}

/// Log of the pseudo-dimension covering bound: pdim * ln(2 e B a / (delta pdim)).
inline double covering_bound_log(double delta, double bound, std::size_t a, std::size_t pdim) {
    if (pdim < 1) throw std::invalid_argument("covering_bound_log: pdim must be >= 1");
    if (a < pdim) throw std::invalid_argument("covering_bound_log: need a >= pdim");
    if (!(delta > 0.0 && delta <= 2.0 * bound))
        throw std::invalid_argument("covering_bound_log: need 0 < delta <= 2B");
    const double pd = static_cast<double>(pdim);
    return pd * std::log(2.0 * std::numbers::e * bound * static_cast<double>(a) / (delta * pd));
}

enum class ActivationClass { piecewise_linear, piecewise_polynomial, sigmoid };

/// Complexity bound Xi for general feedforward graphs with W parameters,
/// L layers and U computation units. The piecewise-polynomial class takes the
/// maximal degree and breakpoint count; the sigmoid formula is stated in log2.
inline double ffn_complexity_xi(ActivationClass cls, std::size_t param_count, std::size_t depth,
                                std::size_t units, std::size_t poly_degree = 1,
                                std::size_t breakpoints = 1) {
    if (param_count < 1 || depth < 1 || units < 1)
        throw std::invalid_argument("ffn_complexity_xi: W, L, U must be >= 1");
    const double w = static_cast<double>(param_count);
    const double l = static_cast<double>(depth);
    const double u = static_cast<double>(units);
    switch (cls) {
        case ActivationClass::piecewise_linear:
            return w * l * std::log(w);
        case ActivationClass::piecewise_polynomial:
            if (poly_degree < 1 || breakpoints < 1)
                throw std::invalid_argument("ffn_complexity_xi: degree and breakpoints >= 1");
            return w * u *
                   std::log(static_cast<double>(poly_degree + 1) *
                            static_cast<double>(breakpoints));
        case ActivationClass::sigmoid: {
            const double wu = (w + 2.0) * u;
            return wu * wu + wu * std::log2(18.0 * (w + 2.0) * u * u);
        }
    }
    throw std::invalid_argument("ffn_complexity_xi: unknown activation class");
}

/// Dudley entropy-integral bound inf_alpha { 4 alpha + 8 sqrt(2/n) int_alpha^D
/// sqrt(log N(u)) du }, minimized over 64 log-spaced alphas in [D*1e-6, D].
/// `cover_log_fn` maps a radius to the log covering number (clamped at 0).
inline double dudley_bound(const std::function<double(double)>& cover_log_fn, double diameter,
                           std::size_t n_eff) {
    if (diameter < 0.0) throw std::invalid_argument("dudley_bound: negative diameter");
    if (n_eff < 1) throw std::invalid_argument("dudley_bound: n_eff must be >= 1");
    if (diameter == 0.0) return 0.0;

    auto integrand = [&](double u) { return std::sqrt(std::max(0.0, cover_log_fn(u))); };
    const double coeff = 8.0 * std::sqrt(2.0 / static_cast<double>(n_eff));

    constexpr int kGrid = 64;
    const double lo = diameter * 1e-6;
    const double ratio = std::pow(diameter / lo, 1.0 / (kGrid - 1));
    double best = std::numeric_limits<double>::infinity();
    double alpha = lo;
    for (int i = 0; i < kGrid; ++i) {
        const double integral =
            alpha >= diameter ? 0.0 : adaptive_simpson(integrand, alpha, diameter, 1e-12);
        best = std::min(best, 4.0 * alpha + coeff * integral);
        alpha *= ratio;
    }
    return best;
}

}  // namespace sievenet
