#include "exlink/linear_solver.hpp"

#include <cmath>

#include "exlink/errors.hpp"

namespace exlink {

namespace {

double dot(const Grid& g, const Field& a, const Field& b) {
    double s = 0.0;
    for (std::size_t idx : g.interior()) s += a[idx] * b[idx];
    return s;
}

}  // namespace

CgResult cg_solve(const Grid& grid, double lambda, const Field& rhs, Field& x, double tol,
                  int max_iter) {
    if (lambda <= 0.0) throw ConfigError("cg_solve needs lambda > 0 for definiteness");
    if (x.size() != grid.node_count() || rhs.size() != grid.node_count())
        throw GridMismatch("cg_solve field size does not match the grid");

    const double rhs_norm = std::sqrt(dot(grid, rhs, rhs));
    CgResult res;
    if (rhs_norm == 0.0) {
        x.assign(grid.node_count(), 0.0);
        res.converged = true;
        return res;
    }

    Field r(grid.node_count(), 0.0), p(grid.node_count(), 0.0), ap(grid.node_count(), 0.0);
    grid.apply_operator(lambda, x, ap);
    for (std::size_t idx : grid.interior()) r[idx] = rhs[idx] - ap[idx];
    p = r;
    double rr = dot(grid, r, r);

    for (int it = 0; it < max_iter; ++it) {
        if (std::sqrt(rr) <= tol * rhs_norm) {
            res.iterations = it;
            res.residual = std::sqrt(rr) / rhs_norm;
            res.converged = true;
            return res;
        }
        grid.apply_operator(lambda, p, ap);
        const double pap = dot(grid, p, ap);
        const double alpha = rr / pap;
        for (std::size_t idx : grid.interior()) {
            x[idx] += alpha * p[idx];
            r[idx] -= alpha * ap[idx];
        }
        const double rr_new = dot(grid, r, r);
        const double beta = rr_new / rr;
        rr = rr_new;
        for (std::size_t idx : grid.interior()) p[idx] = r[idx] + beta * p[idx];
    }
    res.iterations = max_iter;
    res.residual = std::sqrt(rr) / rhs_norm;
    return res;
}

}  // namespace exlink
