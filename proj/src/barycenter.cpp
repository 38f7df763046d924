#include "exlink/barycenter.hpp"

#include <cmath>

#include "exlink/cutoff.hpp"
#include "exlink/errors.hpp"
#include "exlink/nehari.hpp"

namespace exlink {

namespace {

// Half-width of the footprint row at squared offset q2, in lattice units.
long row_halfwidth(long radius, long q2) {
    const long rem = radius * radius - q2;
    if (rem < 0) return -1;
    return static_cast<long>(std::floor(std::sqrt(double(rem)) + 1e-9));
}

}  // namespace

Field ball_average(const Grid& grid, const Field& u) {
    if (u.size() != grid.node_count())
        throw GridMismatch("ball_average field size does not match the grid");
    if (grid.spacing() > 0.25 * (1.0 + 1e-12))
        throw ConfigError("ball average needs h <= 1/4 to resolve the unit ball");

    const long K = static_cast<long>(std::floor(1.0 / grid.spacing() + 1e-9));
    const long ex = grid.extent(0), ey = grid.extent(1), ez = grid.extent(2);
    const std::size_t sy = grid.stride(1), sz = grid.stride(2);

    // |u| with zeros at non-interior nodes.
    Field absu(grid.node_count(), 0.0);
    for (std::size_t idx : grid.interior()) absu[idx] = std::abs(u[idx]);

    Field out(grid.node_count(), 0.0);
    std::vector<double> prefix(ex + 1, 0.0);
    long count = 0;

    // For every (dy[, dz]) row of the footprint, add a sliding-window row sum
    // via prefix sums; each output node costs O(1) per row.
    for (long dz = (grid.dim() == 3 ? -K : 0); dz <= (grid.dim() == 3 ? K : 0); ++dz) {
        for (long dy = -K; dy <= K; ++dy) {
            const long kx = row_halfwidth(K, dy * dy + dz * dz);
            if (kx < 0) continue;
            count += 2 * kx + 1;
            for (long k = 0; k < ez; ++k) {
                const long ks = k + dz;
                const bool live_z = ks >= 0 && ks < ez;
                for (long j = 0; j < ey; ++j) {
                    const long js = j + dy;
                    if (!live_z || js < 0 || js >= ey) continue;
                    const double* src = absu.data() + sz * ks + sy * js;
                    prefix[0] = 0.0;
                    for (long i = 0; i < ex; ++i) prefix[i + 1] = prefix[i] + src[i];
                    double* dst = out.data() + sz * k + sy * j;
                    for (long i = 0; i < ex; ++i) {
                        const long a = std::max(0L, i - kx);
                        const long b = std::min(ex - 1, i + kx);
                        dst[i] += prefix[b + 1] - prefix[a];
                    }
                }
            }
        }
    }
    const double inv = 1.0 / double(count);  // footprint node count
    for (double& v : out) v *= inv;
    return out;
}

BarycenterResult barycenter(const Grid& grid, const Field& u) {
    Field mu = ball_average(grid, u);

    double mu_max = 0.0;
    std::size_t peak = 0;
    for (std::size_t idx = 0; idx < mu.size(); ++idx) {
        if (mu[idx] > mu_max) {
            mu_max = mu[idx];
            peak = idx;
        }
    }
    if (mu_max <= 0.0) throw UndefinedBarycenter("field vanishes: no localized centroid");

    const double level = 0.5 * mu_max;
    const auto pl = grid.lattice(peak);
    double weight = 0.0;
    std::array<double, 3> first{0.0, 0.0, 0.0};
    for (std::size_t idx = 0; idx < mu.size(); ++idx) {
        const double v = mu[idx] - level;
        if (v <= 0.0) continue;
        const auto l = grid.lattice(idx);
        weight += v;
        for (int d = 0; d < grid.dim(); ++d) first[d] += v * double(l[d] - pl[d]);
    }
    if (weight <= 0.0) throw UndefinedBarycenter("upper level set carries no weight");

    BarycenterResult res;
    res.mu_max = mu_max;
    res.hat_mass = weight * grid.cell_volume();
    for (int d = 0; d < grid.dim(); ++d)
        res.beta[d] = grid.spacing() * (double(pl[d]) + first[d] / weight);
    for (std::size_t idx = 0; idx < mu.size(); ++idx) {
        if (mu[idx] - level <= 0.0) continue;
        const auto x = grid.coords(idx);
        double d2 = 0.0;
        for (int d = 0; d < grid.dim(); ++d)
            d2 += (x[d] - res.beta[d]) * (x[d] - res.beta[d]);
        res.support_radius = std::max(res.support_radius, std::sqrt(d2));
    }
    return res;
}

double witness_scale_radius(const RadialProfile& prof) {
    // Ball average of the continuum bump at distance r from its center,
    // by midpoint quadrature over the unit-ball footprint.
    const double step = 0.02;
    const int K = static_cast<int>(1.0 / step);
    auto mu_at = [&](double r) {
        double sum = 0.0;
        long count = 0;
        for (int i = -K; i < K; ++i) {
            for (int j = -K; j < K; ++j) {
                const double zx = (i + 0.5) * step, zy = (j + 0.5) * step;
                if (prof.N == 3) {
                    for (int k = -K; k < K; ++k) {
                        const double zz = (k + 0.5) * step;
                        if (zx * zx + zy * zy + zz * zz > 1.0) continue;
                        sum += prof.value(std::hypot(r - zx, zy, zz));
                        ++count;
                    }
                } else {
                    if (zx * zx + zy * zy > 1.0) continue;
                    sum += prof.value(std::hypot(r - zx, zy));
                    ++count;
                }
            }
        }
        return sum / double(count);
    };
    const double peak = mu_at(0.0);
    double lo = 0.0, hi = 1.0;
    while (mu_at(hi) > 0.5 * peak) {
        lo = hi;
        hi += 1.0;
        if (hi > prof.r_max) throw SolverStall("ball-averaged bump never falls to half max");
    }
    for (int i = 0; i < 40; ++i) {
        const double mid = 0.5 * (lo + hi);
        (mu_at(mid) > 0.5 * peak ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

Field s_witness(const RadialProfile& prof, const Grid& grid, double R,
                const std::array<double, 3>& theta, const Nonlinearity& model,
                double* tau_out) {
    const double rho = grid.obstacle_radius();
    const double r0 = witness_scale_radius(prof);
    if (rho > 0.0 && R <= 4.0 * rho * r0)
        throw ConfigError("witness scale too small: centers must satisfy R > 4 rho r0");

    // Both centers need the usual decay margin inside the box.
    const double margin = 5.0 / std::sqrt(model.lambda());
    for (int sign : {+1, -1}) {
        for (int d = 0; d < grid.dim(); ++d) {
            const double c = sign * R * theta[d];
            const double lo = grid.spacing() * grid.lo_index(d);
            const double hi = grid.spacing() * (grid.lo_index(d) + grid.extent(d) - 1);
            if (c < lo + margin || c > hi - margin)
                throw BumpTruncated("witness center leaves no decay margin inside the box");
        }
    }

    // eta(x) = 1 - ramp(4 |x -+ R theta| / R): one inside B_{R/4}, zero
    // outside B_{R/2}; the two supports are disjoint and clear the obstacle.
    const double cut = 4.0 / R;
    Field z = grid.sample([&](const std::array<double, 3>& x) {
        double dp2 = 0.0, dm2 = 0.0;
        for (int d = 0; d < grid.dim(); ++d) {
            const double dp = x[d] - R * theta[d], dm = x[d] + R * theta[d];
            dp2 += dp * dp;
            dm2 += dm * dm;
        }
        const double rp = std::sqrt(dp2), rm = std::sqrt(dm2);
        const double eta1 = 1.0 - cutoff_ramp(cut * rp);
        const double eta2 = 1.0 - cutoff_ramp(cut * rm);
        double val = 0.0;
        if (eta1 > 0.0) val += prof.value(rp) * eta1;
        if (eta2 > 0.0) val += prof.value(rm) * eta2;
        return val;
    });

    Field v = nehari_project(grid, model, z, tau_out);
    const BarycenterResult b = barycenter(grid, v);
    double norm = 0.0;
    for (int d = 0; d < grid.dim(); ++d) norm += b.beta[d] * b.beta[d];
    if (std::sqrt(norm) > 2.0 * grid.spacing())
        throw GeometryBreach("witness centroid left the discrete slice");
    return v;
}

}  // namespace exlink
