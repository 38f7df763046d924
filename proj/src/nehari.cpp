#include "exlink/nehari.hpp"

#include <cmath>
#include <sstream>

#include "exlink/energy.hpp"
#include "exlink/errors.hpp"

namespace exlink {

double nehari_time(const Grid& grid, const Nonlinearity& model, const Field& u) {
    if (u.size() != grid.node_count())
        throw GridMismatch("nehari_time field size does not match the grid");

    // Compact the nonzero interior values: every tau evaluation only needs
    // the multiset of node values.
    std::vector<double> vals;
    vals.reserve(grid.interior_count());
    double pos_mass = 0.0;
    for (std::size_t idx : grid.interior()) {
        if (u[idx] != 0.0) {
            vals.push_back(u[idx]);
            if (u[idx] > 0.0) pos_mass += u[idx] * u[idx];
        }
    }
    pos_mass *= grid.cell_volume();
    if (pos_mass == 0.0) throw NotProjectable("field has no positive part");

    const double norm_sq = h1_inner(grid, model.lambda(), u, u);
    const double limit = model.l_infinity() * pos_mass;
    if (norm_sq >= limit) {
        std::ostringstream os;
        os << "norm " << norm_sq << " exceeds the saturation limit " << limit
           << ": no constraint time along this ray";
        throw NotProjectable(os.str());
    }

    const double vol = grid.cell_volume();
    auto g = [&](double tau) {
        double s = 0.0;
        for (double v : vals) s += model.f(tau * v) * v;
        return norm_sq - vol * s / tau;
    };
    // d/dtau [f(tau v) v / tau] = f'(tau v) v^2 / tau - f(tau v) v / tau^2
    auto g_prime = [&](double tau) {
        double s = 0.0, sp = 0.0;
        for (double v : vals) {
            s += model.f(tau * v) * v;
            sp += model.fprime(tau * v) * v * v;
        }
        return vol * (s / (tau * tau) - sp / tau);
    };

    double lo = 1.0, hi = 1.0;
    if (g(1.0) > 0.0) {
        do {
            lo = hi;
            hi *= 2.0;
            if (hi > 1e8)
                throw NotProjectable("constraint time beyond 1e8: ray never reaches it");
        } while (g(hi) > 0.0);
    } else {
        do {
            hi = lo;
            lo *= 0.5;
            if (lo < 1e-10)
                throw NotProjectable("constraint time below 1e-10: degenerate ray");
        } while (g(lo) <= 0.0);
    }
    // Bracket-safeguarded Newton: g is strictly decreasing across [lo, hi],
    // so each evaluation tightens the bracket; out-of-bracket or slow Newton
    // steps fall back to bisection.
    double tau = 0.5 * (lo + hi);
    for (int i = 0; i < 200 && (hi - lo) > 1e-15 * hi; ++i) {
        const double gv = g(tau);
        (gv > 0.0 ? lo : hi) = tau;
        if ((hi - lo) <= 1e-15 * hi) break;
        const double gp = g_prime(tau);
        double next = (gp < 0.0) ? tau - gv / gp : lo;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        tau = next;
    }
    return 0.5 * (lo + hi);
}

Field nehari_project(const Grid& grid, const Nonlinearity& model, const Field& u,
                     double* t_out) {
    const double t = nehari_time(grid, model, u);
    if (t_out) *t_out = t;
    Field v = grid.zeros();
    for (std::size_t idx : grid.interior()) v[idx] = t * u[idx];
    return v;
}

}  // namespace exlink
