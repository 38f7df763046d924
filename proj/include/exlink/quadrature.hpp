#pragma once

#include <cmath>
#include <functional>

namespace exlink {

/// Adaptive Simpson quadrature on [a,b].  Recursion depth is bounded; the
/// tolerance is absolute.  Good enough for the smooth 1d integrands used by
/// the tabulated nonlinearity and the radial energy.
double adaptive_simpson(const std::function<double(double)>& g, double a, double b,
                        double tol = 1e-11, int max_depth = 28);

}  // namespace exlink
