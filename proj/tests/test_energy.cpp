#include <cmath>

#include "doctest.h"
#include "exlink/energy.hpp"
#include "exlink/errors.hpp"
#include "exlink/grid.hpp"
#include "exlink/nonlinearity.hpp"
#include "exlink/radial.hpp"

using namespace exlink;

namespace {

const SaturableModel& desk_model() {
    static SaturableModel m(1.0, 0.5);
    return m;
}

const RadialProfile& desk_profile() {
    static RadialProfile p = shoot_ground_state(desk_model(), 2);
    return p;
}

Field sample_bump(const Grid& g, const RadialProfile& prof, double cx, double cy) {
    return g.sample([&](const std::array<double, 3>& x) {
        return prof.value(std::hypot(x[0] - cx, x[1] - cy));
    });
}

Field smooth_noise(const Grid& g, double cx, double cy) {
    return g.sample([&](const std::array<double, 3>& x) {
        const double dx = x[0] - cx, dy = x[1] - cy;
        return (1.0 + 0.3 * std::sin(2.0 * dx) * std::cos(dy)) *
               std::exp(-0.3 * (dx * dx + dy * dy));
    });
}

}  // namespace

TEST_CASE("breakdown pieces are mutually consistent") {
    Grid g(2, 0.1, {-6, -6, 0}, {6, 6, 0}, 1.0);
    Field u = smooth_noise(g, 2.0, 0.5);
    EnergyBreakdown e = energy_breakdown(g, desk_model(), u);
    CHECK(e.norm_sq == doctest::Approx(e.kinetic + e.mass).epsilon(1e-14));
    CHECK(e.action == doctest::Approx(0.5 * e.norm_sq - e.potential).epsilon(1e-14));
    CHECK(e.constraint == doctest::Approx(e.norm_sq - e.nonlinear).epsilon(1e-14));
    CHECK(e.kinetic > 0.0);
    CHECK(e.potential > 0.0);
    CHECK(action(g, desk_model(), u) == e.action);
    CHECK(constraint_value(g, desk_model(), u) == e.constraint);
    CHECK(h1_inner(g, 1.0, u, u) == doctest::Approx(e.norm_sq).epsilon(1e-14));

    Field bad(7, 0.0);
    CHECK_THROWS_AS(energy_breakdown(g, desk_model(), bad), GridMismatch);
    Field z, grad;
    CHECK_THROWS_AS(action_gradient(g, desk_model(), bad, z, grad), GridMismatch);
}

TEST_CASE("Riesz gradient matches finite-difference directional derivatives") {
    Grid g(2, 0.2, {-6, -6, 0}, {6, 6, 0}, 1.0);
    Field u = sample_bump(g, desk_profile(), 2.5, 0.0);
    Field v = smooth_noise(g, -2.0, 1.0);
    Field z, grad;
    CgResult res = action_gradient(g, desk_model(), u, z, grad, 1e-12);
    REQUIRE(res.converged);

    const double inner = h1_inner(g, 1.0, grad, v);
    const double eps = 1e-5;
    Field up = u, um = u;
    for (std::size_t idx : g.interior()) {
        up[idx] += eps * v[idx];
        um[idx] -= eps * v[idx];
    }
    const double fd =
        (action(g, desk_model(), up) - action(g, desk_model(), um)) / (2.0 * eps);
    CHECK(inner == doctest::Approx(fd).epsilon(1e-7));
}

TEST_CASE("gradient satisfies its defining linear system") {
    Grid g(2, 0.2, {-6, -6, 0}, {6, 6, 0}, 1.0);
    Field u = sample_bump(g, desk_profile(), 2.0, -1.0);
    Field z, grad;
    REQUIRE(action_gradient(g, desk_model(), u, z, grad, 1e-12).converged);
    // A (u - grad) = f(u) pointwise.
    Field diff = g.zeros(), adiff;
    for (std::size_t idx : g.interior()) diff[idx] = u[idx] - grad[idx];
    g.apply_operator(1.0, diff, adiff);
    double worst = 0.0;
    for (std::size_t idx : g.interior())
        worst = std::max(worst, std::abs(adiff[idx] - desk_model().f(u[idx])));
    CHECK(worst <= 1e-8);
}

TEST_CASE("sampled ground bump: discrete action sits just below the radial level") {
    const RadialProfile& prof = desk_profile();
    auto level = [&](double h) {
        Grid g(2, h, {-20, -20, 0}, {20, 20, 0}, 0.0);
        Field u = sample_bump(g, prof, 0.0, 0.0);
        return energy_breakdown(g, desk_model(), u);
    };
    EnergyBreakdown c = level(0.1);
    EnergyBreakdown c2 = level(0.2);
    // Kinetic term is biased low by O(h^2); mass and potential sums are
    // spectrally accurate, so the whole action lands slightly below m.
    CHECK(c.action < prof.m);
    CHECK(prof.m - c.action <= 0.01 * prof.m);
    CHECK(c2.action < c.action);
    const double ratio = (prof.m - c2.action) / (prof.m - c.action);
    CHECK(ratio == doctest::Approx(4.0).epsilon(0.15));
    // The lattice Pohozaev identity (N = 2): lambda * mass = 2 * potential.
    CHECK(c.mass == doctest::Approx(2.0 * c.potential).epsilon(5e-3));
    // Natural-constraint residual inherited from the discretization.
    CHECK(std::abs(c.constraint) / c.norm_sq <= 5e-3);
}

TEST_CASE("action is exactly invariant under lattice translations") {
    Grid g(2, 0.1, {-20, -20, 0}, {20, 20, 0}, 0.0);
    const RadialProfile& prof = desk_profile();
    Field a = sample_bump(g, prof, 0.0, 0.0);
    Field b = sample_bump(g, prof, 0.1, -0.3);
    CHECK(action(g, desk_model(), b) ==
          doctest::Approx(action(g, desk_model(), a)).epsilon(1e-11));
}
