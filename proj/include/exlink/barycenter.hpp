#pragma once

#include <array>

#include "exlink/grid.hpp"
#include "exlink/nonlinearity.hpp"
#include "exlink/radial.hpp"

namespace exlink {

/// Average of |u| over the unit-ball lattice footprint around each node
/// (same footprint everywhere; nodes outside the box read as zero).
/// Requires h <= 1/4 so the footprint resolves the ball.
Field ball_average(const Grid& grid, const Field& u);

struct BarycenterResult {
    std::array<double, 3> beta{};  // localized centroid
    double mu_max = 0.0;           // peak of the ball average
    double hat_mass = 0.0;         // L1 mass of the upper-half level set
    double support_radius = 0.0;   // farthest upper-half node from beta
};

/// Centroid of  [ ball_average(|u|) - max/2 ]+ , accumulated in integer
/// lattice coordinates relative to the peak node so that exact lattice
/// translates of a field move beta by exactly the lattice vector.
/// Throws UndefinedBarycenter when u vanishes.
BarycenterResult barycenter(const Grid& grid, const Field& u);

/// Radius r0 with  { mu(w-bump) > max/2 } = B_r0(0)  for the continuum
/// profile: the half-max radius of the ball-averaged radial bump.  Sets the
/// admissible witness scale (centers must satisfy R > 4 rho r0).
double witness_scale_radius(const RadialProfile& prof);

/// Symmetric two-bump member of the centroid-zero slice: the profile is
/// planted at +/- R theta under complementary compact cutoffs
/// eta(x) = 1 - ramp(4 |x -+ R theta| / R), summed, and scaled onto the
/// natural constraint.  The returned field has |beta| <= 2h by symmetry;
/// a larger centroid is reported as GeometryBreach.
Field s_witness(const RadialProfile& prof, const Grid& grid, double R,
                const std::array<double, 3>& theta, const Nonlinearity& model,
                double* tau_out = nullptr);

}  // namespace exlink
