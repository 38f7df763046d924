#include <cmath>

#include "doctest.h"
#include "exlink/energy.hpp"
#include "exlink/errors.hpp"
#include "exlink/grid.hpp"
#include "exlink/nehari.hpp"
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

Field gauss(const Grid& g, double sigma2) {
    return g.sample([&](const std::array<double, 3>& x) {
        return std::exp(-0.5 * (x[0] * x[0] + x[1] * x[1]) / sigma2);
    });
}

}  // namespace

TEST_CASE("sampled ground bump projects with time close to one") {
    Grid g(2, 0.1, {-20, -20, 0}, {20, 20, 0}, 0.0);
    Field u = g.sample([&](const std::array<double, 3>& x) {
        return desk_profile().value(std::hypot(x[0], x[1]));
    });
    const double t = nehari_time(g, desk_model(), u);
    CHECK(t == doctest::Approx(1.0).epsilon(5e-3));
    double t_out = 0.0;
    Field proj = nehari_project(g, desk_model(), u, &t_out);
    CHECK(t_out == t);
    // The projection lies on the constraint.
    const double gval = constraint_value(g, desk_model(), proj);
    CHECK(std::abs(gval) <= 1e-10 * h1_inner(g, 1.0, proj, proj));
    // And maximizes the action along its ray.
    const double at = action(g, desk_model(), proj);
    Field lo = g.zeros(), hi = g.zeros();
    for (std::size_t idx : g.interior()) {
        lo[idx] = 0.8 * proj[idx];
        hi[idx] = 1.25 * proj[idx];
    }
    CHECK(action(g, desk_model(), lo) < at);
    CHECK(action(g, desk_model(), hi) < at);
}

TEST_CASE("constraint time scales inversely along rays") {
    Grid g(2, 0.1, {-12, -12, 0}, {12, 12, 0}, 1.0);
    Field u = g.sample([&](const std::array<double, 3>& x) {
        return desk_profile().value(std::hypot(x[0] - 4.0, x[1]));
    });
    const double t1 = nehari_time(g, desk_model(), u);
    for (double c : {0.5, 2.0, 10.0}) {
        Field cu = g.zeros();
        for (std::size_t idx : g.interior()) cu[idx] = c * u[idx];
        CHECK(nehari_time(g, desk_model(), cu) == doctest::Approx(t1 / c).epsilon(1e-10));
    }
    // Idempotence: a projected field has time one.
    Field proj = nehari_project(g, desk_model(), u);
    CHECK(nehari_time(g, desk_model(), proj) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("sign structure around the constraint time") {
    Grid g(2, 0.1, {-12, -12, 0}, {12, 12, 0}, 1.0);
    // Centered away from the obstacle so the positive mass survives masking.
    Field u = g.sample([](const std::array<double, 3>& x) {
        const double dx = x[0] - 5.0;
        return std::exp(-0.125 * (dx * dx + x[1] * x[1]));
    });
    const double t = nehari_time(g, desk_model(), u);
    auto scaled = [&](double c) {
        Field v = g.zeros();
        for (std::size_t idx : g.interior()) v[idx] = c * u[idx];
        return v;
    };
    CHECK(constraint_value(g, desk_model(), scaled(0.5 * t)) > 0.0);
    CHECK(constraint_value(g, desk_model(), scaled(2.0 * t)) < 0.0);
    CHECK(std::abs(constraint_value(g, desk_model(), scaled(t))) <=
          1e-10 * h1_inner(g, 1.0, u, u) * t * t);
}

TEST_CASE("rays that never meet the constraint are reported") {
    Grid g(2, 0.1, {-10, -10, 0}, {10, 10, 0}, 0.0);
    // Narrow Gaussian: ||u||^2 >= l_inf * mass(u+) along the whole ray.
    CHECK_THROWS_AS(nehari_time(g, desk_model(), gauss(g, 0.25)), NotProjectable);
    // Wide Gaussian projects fine.
    CHECK_NOTHROW(nehari_time(g, desk_model(), gauss(g, 4.0)));
    // Zero and nonpositive fields have no ray to project.
    CHECK_THROWS_AS(nehari_time(g, desk_model(), g.zeros()), NotProjectable);
    Field neg = g.zeros();
    for (std::size_t idx : g.interior()) neg[idx] = -1.0;
    CHECK_THROWS_AS(nehari_time(g, desk_model(), neg), NotProjectable);
    Field bad(5, 0.0);
    CHECK_THROWS_AS(nehari_time(g, desk_model(), bad), GridMismatch);
}

TEST_CASE("fields with a negative lobe project through their positive part") {
    Grid g(2, 0.1, {-14, -10, 0}, {14, 10, 0}, 0.0);
    Field u = g.sample([](const std::array<double, 3>& x) {
        const double dp = (x[0] - 4.0) * (x[0] - 4.0) + x[1] * x[1];
        const double dm = (x[0] + 4.0) * (x[0] + 4.0) + x[1] * x[1];
        return 2.0 * std::exp(-dp / 8.0) - 1.5 * std::exp(-dm / 8.0);
    });
    double t = 0.0;
    Field proj = nehari_project(g, desk_model(), u, &t);
    CHECK(t > 0.0);
    const double gval = constraint_value(g, desk_model(), proj);
    CHECK(std::abs(gval) <= 1e-10 * h1_inner(g, 1.0, proj, proj));
}
