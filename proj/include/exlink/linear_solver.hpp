#pragma once

#include "exlink/grid.hpp"

namespace exlink {

struct CgResult {
    int iterations = 0;
    double residual = 0.0;  // relative l2 residual at exit
    bool converged = false;
};

/// Conjugate gradients for  (-Lap + lambda) x = rhs  over the interior nodes.
/// x is warm-started from its incoming values and holds the solution on
/// return.  The relative residual is measured against ||rhs||; a zero rhs
/// returns the zero solution immediately.
CgResult cg_solve(const Grid& grid, double lambda, const Field& rhs, Field& x,
                  double tol = 1e-10, int max_iter = 20000);

}  // namespace exlink
