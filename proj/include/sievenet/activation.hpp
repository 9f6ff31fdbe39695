#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace sievenet {

/// Continuous piecewise-linear activation, assembled from ascending breakpoints,
/// one slope per piece (breakpoints.size() + 1 pieces) and the value at zero.
/// Continuity holds by construction. At a breakpoint the derivative convention
/// is the slope of the piece to its left.
struct ActivationSpec {
    std::vector<double> breakpoints;
    std::vector<double> slopes;
    double value_at_zero = 0.0;

    static ActivationSpec relu() { return {{0.0}, {0.0, 1.0}, 0.0}; }

    static ActivationSpec leaky_relu(double c = 0.01) { return {{0.0}, {c, 1.0}, 0.0}; }

    static ActivationSpec identity() { return {{}, {1.0}, 0.0}; }

    void validate() const {
        if (slopes.size() != breakpoints.size() + 1)
            throw std::invalid_argument("ActivationSpec: need breakpoints+1 slopes");
        for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
            if (!(breakpoints[i] < breakpoints[i + 1]))
                throw std::invalid_argument("ActivationSpec: breakpoints must be ascending");
        for (double s : slopes)
            if (!std::isfinite(s)) throw std::invalid_argument("ActivationSpec: non-finite slope");
    }

    double operator()(double z) const {
        // integrate the piecewise-constant slope from 0 to z
        const double lo = std::min(0.0, z), hi = std::max(0.0, z);
        double acc = 0.0;
        double prev = lo;
        for (double bp : breakpoints) {
            if (bp <= lo) continue;
            if (bp >= hi) break;
            acc += slope_in_piece(0.5 * (prev + bp)) * (bp - prev);
            prev = bp;
        }
        acc += slope_in_piece(0.5 * (prev + hi)) * (hi - prev);
        return z >= 0.0 ? value_at_zero + acc : value_at_zero - acc;
    }

    /// Derivative with the left-piece convention at breakpoints (0 for ReLU at 0).
    double slope_at(double z) const { return slopes[piece_below(z)]; }

    std::size_t piece_count() const { return slopes.size(); }

private:
    std::size_t piece_below(double z) const {
        std::size_t k = 0;
        while (k < breakpoints.size() && breakpoints[k] < z) ++k;
        return k;
    }

    double slope_in_piece(double z_interior) const {
        std::size_t k = 0;
        while (k < breakpoints.size() && breakpoints[k] <= z_interior) ++k;
        return slopes[k];
    }
};

}  // namespace sievenet
