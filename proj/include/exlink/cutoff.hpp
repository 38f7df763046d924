#pragma once

#include <array>
#include <cmath>

#include "exlink/grid.hpp"

namespace exlink {

/// C1 monotone ramp: 0 on (-inf, 1], 1 on [2, inf), cubic smoothstep in
/// between.  Max slope 3/2, within the contract bound of 2.
inline double cutoff_ramp(double t) {
    if (t <= 1.0) return 0.0;
    if (t >= 2.0) return 1.0;
    const double u = t - 1.0;
    return u * u * (3.0 - 2.0 * u);
}

/// Derivative of the ramp (for defect quadratures).
inline double cutoff_ramp_slope(double t) {
    if (t <= 1.0 || t >= 2.0) return 0.0;
    const double u = t - 1.0;
    return 6.0 * u * (1.0 - u);
}

/// Obstacle cutoff  xi(x) = ramp(|x| / rho): vanishes on the obstacle,
/// one beyond 2 rho.  A grid without obstacle has xi identically one.
inline double cutoff_xi(const Grid& grid, const std::array<double, 3>& x) {
    const double rho = grid.obstacle_radius();
    if (rho <= 0.0) return 1.0;
    const double r = grid.dim() == 3 ? std::hypot(x[0], x[1], x[2]) : std::hypot(x[0], x[1]);
    return cutoff_ramp(r / rho);
}

}  // namespace exlink
