#pragma once

#include "exlink/grid.hpp"
#include "exlink/linear_solver.hpp"
#include "exlink/nonlinearity.hpp"

namespace exlink {

/// Pieces of the action  I(u) = ||u||^2 / 2 - sum F(u) h^N  with
/// ||u||^2 = dirichlet + lambda * mass, and the natural-constraint value
/// G(u) = ||u||^2 - sum f(u) u h^N.
struct EnergyBreakdown {
    double kinetic = 0.0;    // discrete Dirichlet form
    double mass = 0.0;       // squared L2 norm
    double potential = 0.0;  // sum F(u) h^N
    double nonlinear = 0.0;  // sum f(u) u h^N
    double norm_sq = 0.0;
    double action = 0.0;
    double constraint = 0.0;
};

EnergyBreakdown energy_breakdown(const Grid& grid, const Nonlinearity& model, const Field& u);

double action(const Grid& grid, const Nonlinearity& model, const Field& u);
double constraint_value(const Grid& grid, const Nonlinearity& model, const Field& u);

/// lambda-weighted H1 inner product  dirichlet(u, v) + lambda * mass(u, v).
double h1_inner(const Grid& grid, double lambda, const Field& u, const Field& v);

/// Riesz gradient of the action in the lambda-weighted inner product:
/// grad = u - z with  (-Lap + lambda) z = f(u).  z is warm-started in/out,
/// which makes repeated gradient solves along a descent path cheap.
CgResult action_gradient(const Grid& grid, const Nonlinearity& model, const Field& u, Field& z,
                         Field& grad, double tol = 1e-10);

}  // namespace exlink
