#pragma once

#include "exlink/grid.hpp"
#include "exlink/nonlinearity.hpp"

namespace exlink {

/// The unique tau > 0 with  G(tau u) = 0: the scaling that places u on the
/// natural constraint.  Exists iff u has a nontrivial positive part and
/// ||u||^2 < l_infinity * mass(u+); otherwise NotProjectable is thrown.
/// G(tau u)/tau^2 is strictly decreasing in tau, so the root is found by
/// doubling + bisection.
double nehari_time(const Grid& grid, const Nonlinearity& model, const Field& u);

/// tau * u for the Nehari time tau (reported through t_out when given).
Field nehari_project(const Grid& grid, const Nonlinearity& model, const Field& u,
                     double* t_out = nullptr);

}  // namespace exlink
