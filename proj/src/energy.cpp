#include "exlink/energy.hpp"

#include "exlink/errors.hpp"

namespace exlink {

EnergyBreakdown energy_breakdown(const Grid& grid, const Nonlinearity& model, const Field& u) {
    if (u.size() != grid.node_count())
        throw GridMismatch("energy_breakdown field size does not match the grid");
    EnergyBreakdown e;
    e.kinetic = grid.dirichlet_sum(u, u);
    e.mass = grid.mass_sum(u, u);
    double pot = 0.0, nl = 0.0;
    for (std::size_t idx : grid.interior()) {
        pot += model.F(u[idx]);
        nl += model.f(u[idx]) * u[idx];
    }
    e.potential = pot * grid.cell_volume();
    e.nonlinear = nl * grid.cell_volume();
    e.norm_sq = e.kinetic + model.lambda() * e.mass;
    e.action = 0.5 * e.norm_sq - e.potential;
    e.constraint = e.norm_sq - e.nonlinear;
    return e;
}

double action(const Grid& grid, const Nonlinearity& model, const Field& u) {
    return energy_breakdown(grid, model, u).action;
}

double constraint_value(const Grid& grid, const Nonlinearity& model, const Field& u) {
    return energy_breakdown(grid, model, u).constraint;
}

double h1_inner(const Grid& grid, double lambda, const Field& u, const Field& v) {
    return grid.dirichlet_sum(u, v) + lambda * grid.mass_sum(u, v);
}

CgResult action_gradient(const Grid& grid, const Nonlinearity& model, const Field& u, Field& z,
                         Field& grad, double tol) {
    if (u.size() != grid.node_count())
        throw GridMismatch("action_gradient field size does not match the grid");
    if (z.size() != grid.node_count()) z.assign(grid.node_count(), 0.0);
    Field rhs(grid.node_count(), 0.0);
    for (std::size_t idx : grid.interior()) rhs[idx] = model.f(u[idx]);
    CgResult res = cg_solve(grid, model.lambda(), rhs, z, tol);
    grad.assign(grid.node_count(), 0.0);
    for (std::size_t idx : grid.interior()) grad[idx] = u[idx] - z[idx];
    return res;
}

}  // namespace exlink
