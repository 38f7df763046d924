#include <cmath>
#include <vector>

#include "doctest.h"
#include "exlink/errors.hpp"
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

}  // namespace

TEST_CASE("ground state matches the independent relaxation solve") {
    // Oracle: damped Newton on the finite-difference BVP, written first and
    // sharing no code with the shooting integrator.
    const RadialProfile& prof = desk_profile();
    const int n = 4000;
    const double r_max = 20.0;
    std::vector<double> wr = relax_ground_state(desk_model(), 2, r_max, n);
    REQUIRE(wr.size() == n + 1);
    const double dr = r_max / n;
    double dev = 0.0;
    for (int j = 0; j * dr <= 10.0; ++j)
        dev = std::max(dev, std::abs(wr[j] - prof.value(j * dr)));
    CHECK(dev <= 1e-4);

    // Same agreement for N = 3.
    RadialProfile p3 = shoot_ground_state(desk_model(), 3);
    std::vector<double> w3 = relax_ground_state(desk_model(), 3, r_max, n);
    dev = 0.0;
    for (int j = 0; j * dr <= 10.0; ++j)
        dev = std::max(dev, std::abs(w3[j] - p3.value(j * dr)));
    CHECK(dev <= 1e-4);
}

TEST_CASE("derived ground-state constants at lambda = 1, s = 1/2") {
    const RadialProfile& prof = desk_profile();
    CHECK(prof.b == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(prof.w0 == doctest::Approx(3.614789710729).epsilon(1e-9));
    CHECK(prof.m == doctest::Approx(20.28615753110).epsilon(1e-8));
    CHECK(prof.sigma == doctest::Approx(23.9422).epsilon(1e-4));
    CHECK(prof.half_max_radius() == doctest::Approx(1.896736853).epsilon(1e-6));
    CHECK(radial_norm_sq(prof) == doctest::Approx(148.3074695790).epsilon(1e-8));
    CHECK(radial_mass(prof) == doctest::Approx(107.7351545164).epsilon(1e-8));
    CHECK(prof.w0 > prof.b);  // ground-state height sits above the crossing

    RadialProfile p3 = shoot_ground_state(desk_model(), 3);
    CHECK(p3.w0 == doctest::Approx(5.642271445876).epsilon(1e-8));
    CHECK(p3.m == doctest::Approx(161.9306435743).epsilon(1e-8));
}

TEST_CASE("certificates: Nehari and scaling identities") {
    const RadialProfile& prof = desk_profile();
    CHECK(radial_nehari_residual(prof, desk_model()) <= 1e-3);
    CHECK(radial_nehari_residual(prof, desk_model()) <= 1e-9);  // health margin
    CHECK(pohozaev_residual(prof, desk_model()) <= 1e-3);
    CHECK(pohozaev_residual(prof, desk_model()) <= 1e-9);

    RadialProfile p3 = shoot_ground_state(desk_model(), 3);
    CHECK(radial_nehari_residual(p3, desk_model()) <= 1e-9);
    CHECK(pohozaev_residual(p3, desk_model()) <= 1e-9);
}

TEST_CASE("profile is positive and strictly decreasing") {
    const RadialProfile& prof = desk_profile();
    REQUIRE(prof.w.size() > 1000);
    for (size_t i = 1; i < prof.w.size(); ++i) {
        CHECK(prof.w[i] > 0.0);
        if (i >= 2) CHECK(prof.w[i] < prof.w[i - 1]);
    }
    CHECK(prof.wp[100] < 0.0);
}

TEST_CASE("decay law holds over the fit window") {
    const RadialProfile& prof = desk_profile();
    CHECK(prof.fit_quality <= 0.02);
    CHECK(prof.slope_quality <= 0.02);
    // Direct re-fit reproduces the stored amplitude.
    DecayFit fit = fit_decay_constants(2, 1.0, prof.dr, prof.w, prof.wp, 10.0, 15.0);
    CHECK(fit.sigma == doctest::Approx(prof.sigma).epsilon(1e-12));
    CHECK(fit.samples >= 10);

    // The law also predicts the profile: w(12.5) vs sigma r^-1/2 e^-r.
    const double law = prof.sigma * std::pow(12.5, -0.5) * std::exp(-12.5);
    CHECK(prof.value(12.5) == doctest::Approx(law).epsilon(0.02));
}

TEST_CASE("constants are stable under sample-spacing refinement") {
    const RadialProfile& prof = desk_profile();
    ShootParams p;
    p.dr_out = 2.5e-3;
    RadialProfile fine = shoot_ground_state(desk_model(), 2, p);
    CHECK(std::abs(fine.w0 - prof.w0) / prof.w0 <= 1e-6);
    CHECK(std::abs(fine.m - prof.m) / prof.m <= 1e-4);
    CHECK(std::abs(fine.sigma - prof.sigma) / prof.sigma <= 1e-3);
}

TEST_CASE("tail evaluation is continuous and follows the matched law") {
    const RadialProfile& prof = desk_profile();
    const double eps = 1e-9;
    const double below = prof.value(prof.r_tail - eps);
    const double above = prof.value(prof.r_tail + eps);
    CHECK(std::abs(above / below - 1.0) <= 1e-6);
    // Beyond the samples only the law remains.
    const double r = 25.0;
    const double law =
        prof.tail_amplitude() * std::pow(r, -0.5) * std::exp(-std::sqrt(prof.lambda) * r);
    CHECK(prof.value(r) == doctest::Approx(law).epsilon(1e-12));
    CHECK(prof.derivative(r) ==
          doctest::Approx(-(std::sqrt(prof.lambda) + 0.5 / r) * law).epsilon(1e-12));
    // Derivative law vs Hermite slope just inside the switchover.
    const double dh = prof.derivative(prof.r_tail - eps);
    const double dl = prof.derivative(prof.r_tail + eps);
    CHECK(std::abs(dl / dh - 1.0) <= 5e-3);
}

TEST_CASE("scaled profiles project back to the ground state") {
    const RadialProfile& prof = desk_profile();
    const SaturableModel& model = desk_model();
    // The ray through w meets the natural constraint exactly at w.
    CHECK(radial_nehari_time(prof, model, 1.0) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(radial_nehari_time(prof, model, 1.0) == doctest::Approx(1.0).epsilon(1e-9));
    const double t2 = radial_nehari_time(prof, model, 2.0);
    CHECK(2.0 * t2 == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(radial_action_scaled(prof, model, 2.0 * t2) == doctest::Approx(prof.m).epsilon(1e-9));
    const double th = radial_nehari_time(prof, model, 0.5);
    CHECK(0.5 * th == doctest::Approx(1.0).epsilon(1e-9));
    // Off-constraint actions sit below the constrained level along the ray.
    CHECK(radial_action_scaled(prof, model, 0.7) < prof.m);
    CHECK(radial_action_scaled(prof, model, 1.4) < prof.m);
}

TEST_CASE("inadmissible models are rejected before shooting") {
    SaturableModel at_limit(1.0, 1.0);   // lambda * s = 1
    CHECK_THROWS_AS(shoot_ground_state(at_limit, 2), NoCrossing);
    SaturableModel above(3.0, 0.5);      // lambda > 1/s
    CHECK_THROWS_AS(shoot_ground_state(above, 2), NoCrossing);
}

TEST_CASE("fit window guards") {
    const RadialProfile& prof = desk_profile();
    CHECK_THROWS_AS(fit_decay_constants(2, 1.0, prof.dr, prof.w, prof.wp, 2.0, 8.0),
                    FitWindowError);
    CHECK_THROWS_AS(fit_decay_constants(2, 1.0, prof.dr, prof.w, prof.wp, 15.0, 15.02),
                    FitWindowError);
}

TEST_CASE("relaxation guards and warm restart") {
    CHECK_THROWS_AS(relax_ground_state(desk_model(), 1, 20.0, 4000), ConfigError);
    CHECK_THROWS_AS(relax_ground_state(desk_model(), 2, 20.0, 8), ConfigError);
    std::vector<double> bad(17, 1.0);
    CHECK_THROWS_AS(relax_ground_state(desk_model(), 2, 20.0, 64, bad), ConfigError);
    // Restarting from a converged solve returns it unchanged.
    std::vector<double> w = relax_ground_state(desk_model(), 2, 20.0, 1000);
    std::vector<double> w2 = relax_ground_state(desk_model(), 2, 20.0, 1000, w);
    for (size_t j = 0; j < w.size(); j += 50)
        CHECK(w2[j] == doctest::Approx(w[j]).epsilon(1e-10));
}
