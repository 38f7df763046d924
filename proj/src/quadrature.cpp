#include "exlink/quadrature.hpp"

namespace exlink {

namespace {

double simpson(double fa, double fm, double fb, double a, double b) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double recurse(const std::function<double(double)>& g, double a, double b, double fa,
               double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = g(lm), frm = g(rm);
    const double left = simpson(fa, flm, fm, a, m);
    const double right = simpson(fm, frm, fb, m, b);
    const double err = left + right - whole;
    if (depth <= 0 || std::abs(err) <= 15.0 * tol)
        return left + right + err / 15.0;
    return recurse(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           recurse(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& g, double a, double b,
                        double tol, int max_depth) {
    if (a == b) return 0.0;
    const double fa = g(a), fm = g(0.5 * (a + b)), fb = g(b);
    const double whole = simpson(fa, fm, fb, a, b);
    return recurse(g, a, b, fa, fm, fb, whole, tol, max_depth);
}

}  // namespace exlink
