#include <cmath>

#include "doctest.h"
#include "exlink/barycenter.hpp"
#include "exlink/energy.hpp"
#include "exlink/errors.hpp"
#include "exlink/grid.hpp"
#include "exlink/radial.hpp"

using namespace exlink;

namespace {

const RadialProfile& desk_profile() {
    static RadialProfile p = shoot_ground_state(SaturableModel(1.0, 0.5), 2);
    return p;
}

Field bump_at(const Grid& g, double cx, double cy, double amp = 1.0) {
    return g.sample([&, cx, cy, amp](const std::array<double, 3>& x) {
        return amp * desk_profile().value(std::hypot(x[0] - cx, x[1] - cy));
    });
}

}  // namespace

TEST_CASE("ball average of the unit field is one away from the rim") {
    Grid g(2, 0.25, {-4, -4, 0}, {4, 4, 0}, 0.0);
    Field one = g.sample([](const std::array<double, 3>&) { return 1.0; });
    Field mu = ball_average(g, one);
    for (std::size_t idx : g.interior()) {
        const auto x = g.coords(idx);
        if (std::max(std::abs(x[0]), std::abs(x[1])) <= 2.5)
            CHECK(mu[idx] == doctest::Approx(1.0).epsilon(1e-14));
    }
    // Near the rim the zero extension drags the average below one.
    const std::size_t corner = g.index_of({-14, -14, 0});
    CHECK(mu[corner] < 1.0);
}

TEST_CASE("centered bump has centroid at the origin") {
    Grid g(2, 0.1, {-10, -10, 0}, {10, 10, 0}, 0.0);
    BarycenterResult r = barycenter(g, bump_at(g, 0.0, 0.0));
    CHECK(std::abs(r.beta[0]) <= 1e-13);
    CHECK(std::abs(r.beta[1]) <= 1e-13);
    CHECK(r.mu_max > 0.0);
}

TEST_CASE("off-center bump is located to truncation accuracy") {
    Grid g(2, 0.1, {-10, -10, 0}, {10, 10, 0}, 0.0);
    BarycenterResult r = barycenter(g, bump_at(g, 3.7, 1.2));
    CHECK(r.beta[0] == doctest::Approx(3.7).epsilon(1e-4));
    CHECK(r.beta[1] == doctest::Approx(1.2).epsilon(1e-4));
}

TEST_CASE("exact lattice translates move the centroid exactly") {
    Grid g(2, 0.1, {-10, -10, 0}, {10, 10, 0}, 0.0);
    Field u = bump_at(g, -2.0, 1.5);
    // Copy with an integer lattice shift of (7, -4) nodes.
    Field v = g.zeros();
    for (std::size_t idx : g.interior()) {
        const auto l = g.lattice(idx);
        const std::array<long, 3> shifted{l[0] - 7, l[1] + 4, 0};
        if (g.contains(shifted)) {
            const std::size_t src = g.index_of(shifted);
            if (g.mask()[src] == NodeClass::Interior) v[idx] = u[src];
        }
    }
    BarycenterResult ru = barycenter(g, u);
    BarycenterResult rv = barycenter(g, v);
    CHECK(rv.beta[0] - ru.beta[0] == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(rv.beta[1] - ru.beta[1] == doctest::Approx(-0.4).epsilon(1e-12));
}

TEST_CASE("centroid ignores the scaling of the field") {
    Grid g(2, 0.1, {-10, -10, 0}, {10, 10, 0}, 1.0);
    Field u = bump_at(g, 4.0, -2.0);
    BarycenterResult base = barycenter(g, u);
    for (double c : {0.5, 2.0, 0.1, 10.0}) {
        Field cu = g.zeros();
        for (std::size_t idx : g.interior()) cu[idx] = c * u[idx];
        BarycenterResult r = barycenter(g, cu);
        CHECK(r.beta[0] == doctest::Approx(base.beta[0]).epsilon(1e-12));
        CHECK(r.beta[1] == doctest::Approx(base.beta[1]).epsilon(1e-12));
    }
    // Sign flips do not matter either: the average sees |u|.
    Field neg = g.zeros();
    for (std::size_t idx : g.interior()) neg[idx] = -u[idx];
    BarycenterResult rn = barycenter(g, neg);
    CHECK(rn.beta[0] == doctest::Approx(base.beta[0]).epsilon(1e-12));
}

TEST_CASE("antipodal pair balances, unequal pair leans toward the heavier bump") {
    Grid g(2, 0.1, {-14, -14, 0}, {14, 14, 0}, 1.0);
    Field pair = g.zeros();
    Field a = bump_at(g, 6.0, 0.0), b = bump_at(g, -6.0, 0.0);
    for (std::size_t idx : g.interior()) pair[idx] = a[idx] + b[idx];
    BarycenterResult rp = barycenter(g, pair);
    CHECK(std::abs(rp.beta[0]) <= 1e-12);
    CHECK(std::abs(rp.beta[1]) <= 1e-12);

    Field lean = g.zeros();
    for (std::size_t idx : g.interior()) lean[idx] = 1.3 * a[idx] + b[idx];
    BarycenterResult rl = barycenter(g, lean);
    CHECK(rl.beta[0] > 0.5);
    CHECK(rl.beta[0] < 6.5);
}

TEST_CASE("3D centroid works on a small box") {
    Grid g(3, 0.25, {-3, -3, -3}, {3, 3, 3}, 0.0);
    Field u = g.sample([](const std::array<double, 3>& x) {
        const double dx = x[0] - 0.5, dy = x[1] + 0.25, dz = x[2];
        return std::exp(-(dx * dx + dy * dy + dz * dz));
    });
    BarycenterResult r = barycenter(g, u);
    CHECK(r.beta[0] == doctest::Approx(0.5).epsilon(0.02));
    CHECK(r.beta[1] == doctest::Approx(-0.25).epsilon(0.02));
    CHECK(std::abs(r.beta[2]) <= 0.01);
}

TEST_CASE("ball average is monotone under pointwise domination") {
    Grid g(2, 0.1, {-8, -8, 0}, {8, 8, 0}, 1.0);
    Field u = bump_at(g, 4.0, 0.0);
    Field v = g.zeros();
    for (std::size_t idx : g.interior()) v[idx] = u[idx] * (1.2 + 0.5 * std::sin(double(idx)));
    Field mu = ball_average(g, u), mv = ball_average(g, v);
    for (std::size_t idx = 0; idx < mu.size(); ++idx) CHECK(mu[idx] <= mv[idx] * (1 + 1e-14));
    // And |u| versus u give the identical average.
    Field neg = g.zeros();
    for (std::size_t idx : g.interior()) neg[idx] = -u[idx];
    Field mn = ball_average(g, neg);
    for (std::size_t idx = 0; idx < mu.size(); ++idx) CHECK(mn[idx] == mu[idx]);
}

TEST_CASE("ball average peaks at the bump center") {
    Grid g(2, 0.1, {-10, -10, 0}, {10, 10, 0}, 1.0);
    Field mu = ball_average(g, bump_at(g, 4.3, -2.1));
    double best = 0.0;
    std::size_t peak = 0;
    for (std::size_t idx = 0; idx < mu.size(); ++idx) {
        if (mu[idx] > best) {
            best = mu[idx];
            peak = idx;
        }
    }
    const auto x = g.coords(peak);
    CHECK(std::abs(x[0] - 4.3) <= 0.1 + 1e-12);
    CHECK(std::abs(x[1] + 2.1) <= 0.1 + 1e-12);
}

TEST_CASE("report carries the level-set mass and extent") {
    Grid g(2, 0.1, {-10, -10, 0}, {10, 10, 0}, 0.0);
    BarycenterResult r = barycenter(g, bump_at(g, 0.0, 0.0));
    CHECK(r.hat_mass > 0.0);
    // The upper-half level set of the averaged bump is close to the disc of
    // the witness scale radius r0.
    CHECK(r.support_radius == doctest::Approx(witness_scale_radius(desk_profile())).epsilon(0.06));
}

TEST_CASE("witness scale radius of the ground profile") {
    CHECK(witness_scale_radius(desk_profile()) == doctest::Approx(1.9853).epsilon(1e-3));
}

TEST_CASE("symmetric witness pairs sit on the centroid-zero slice") {
    Grid g(2, 0.1, {-20, -20, 0}, {20, 20, 0}, 1.0);
    const SaturableModel model(1.0, 0.5);
    const RadialProfile& prof = desk_profile();
    for (auto theta : {std::array<double, 3>{1, 0, 0}, std::array<double, 3>{0, 1, 0}}) {
        double tau = 0.0;
        Field v = s_witness(prof, g, 12.0, theta, model, &tau);
        BarycenterResult b = barycenter(g, v);
        CHECK(std::hypot(b.beta[0], b.beta[1]) <= 2.0 * g.spacing());
        CHECK(tau == doctest::Approx(1.0).epsilon(0.05));
        // Two far-apart constrained bumps carry roughly twice the limit
        // level; certainly a positive margin above it.
        const double energy = action(g, model, v);
        CHECK(energy > prof.m * 1.5);
        CHECK(energy == doctest::Approx(2.0 * prof.m).epsilon(0.05));
    }
    // Scale condition and truncation margins are enforced.
    CHECK_THROWS_AS(s_witness(prof, g, 7.0, {1, 0, 0}, model), ConfigError);
    CHECK_THROWS_AS(s_witness(prof, g, 16.0, {1, 0, 0}, model), BumpTruncated);
}

TEST_CASE("degenerate inputs are reported") {
    Grid g(2, 0.1, {-4, -4, 0}, {4, 4, 0}, 1.0);
    CHECK_THROWS_AS(barycenter(g, g.zeros()), UndefinedBarycenter);
    Field bad(3, 0.0);
    CHECK_THROWS_AS(ball_average(g, bad), GridMismatch);
    Grid coarse(2, 0.5, {-4, -4, 0}, {4, 4, 0}, 1.0);
    CHECK_THROWS_AS(ball_average(coarse, coarse.zeros()), ConfigError);
}
