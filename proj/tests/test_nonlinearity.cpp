#include "exlink/nonlinearity.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"
#include "exlink/errors.hpp"

using namespace exlink;

namespace {

// Independent quadrature oracle (composite Simpson with fixed refinement),
// deliberately separate from the library's adaptive integrator.
double simpson_oracle(const Nonlinearity& m, double t, int n = 20000) {
    double sum = 0.0;
    const double h = t / n;
    for (int i = 0; i < n; ++i) {
        const double a = i * h, b = a + h;
        sum += h / 6.0 * (m.f(a) + 4.0 * m.f(0.5 * (a + b)) + m.f(b));
    }
    return sum;
}

double fd_oracle(const Nonlinearity& m, double t) {
    const double h = 1e-6 * std::max(1.0, t);
    return (m.f(t + h) - m.f(t - h)) / (2.0 * h);
}

// Pure cubic probe: violates only the finite-asymptote hypothesis.
struct CubicProbe final : Nonlinearity {
    double f(double t) const override { return t > 0.0 ? t * t * t : 0.0; }
    double F(double t) const override { return t > 0.0 ? 0.25 * t * t * t * t : 0.0; }
    double fprime(double t) const override { return t > 0.0 ? 3.0 * t * t : 0.0; }
    double lambda() const override { return 1.0; }
    double l_infinity() const override { return std::numeric_limits<double>::infinity(); }
};

}  // namespace

TEST_CASE("saturable model point values") {
    SaturableModel m(1.0, 0.5);
    CHECK(m.f(1.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(m.f(0.0) == 0.0);
    CHECK(m.f(-3.0) == 0.0);
    CHECK(m.F(-3.0) == 0.0);
    CHECK(m.fprime(1.0) == doctest::Approx(3.5 / 2.25).epsilon(1e-14));
    CHECK(m.l_infinity() == doctest::Approx(2.0));
    CHECK(m.crossing_b() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("crossing height across parameter sets") {
    CHECK(SaturableModel(1.0, 0.999).crossing_b() ==
          doctest::Approx(31.6227766017).epsilon(1e-9));
    CHECK_THROWS_AS(SaturableModel(1.0, 2.0).crossing_b(), NoCrossing);
    CHECK_THROWS_AS(SaturableModel(2.0, 0.5).crossing_b(), NoCrossing);  // s*lambda = 1
}

TEST_CASE("primitive agrees with quadrature oracle") {
    SaturableModel m(1.0, 0.5);
    for (double t : {0.01, 0.3, 1.0, 2.0, 7.5, 40.0}) {
        const double ref = simpson_oracle(m, t);
        CHECK(m.F(t) == doctest::Approx(ref).epsilon(1e-9));
    }
    // Closed-form cross-check at t = 2 (x = st^2 = 2): (x - log(1+x)) / (2 s^2).
    CHECK(m.F(2.0) == doctest::Approx((2.0 - std::log(3.0)) / 0.5).epsilon(1e-14));
    // Quartic behaviour near zero.
    CHECK(m.F(1e-3) == doctest::Approx(0.25e-12).epsilon(1e-5));
}

TEST_CASE("derivative agrees with finite differences") {
    SaturableModel m(1.0, 0.5);
    for (double t : {0.05, 0.7, 1.3, 5.0, 22.0}) {
        CHECK(m.fprime(t) == doctest::Approx(fd_oracle(m, t)).epsilon(1e-7));
    }
}

TEST_CASE("quotient properties on the audit grid") {
    SaturableModel m(1.0, 0.5);
    const auto grid = default_audit_grid();
    double prev_q = 0.0;
    for (size_t i = 0; i < grid.size(); ++i) {
        const double t = grid[i];
        const double q = m.f(t) / t;
        if (i > 0) CHECK(q > prev_q);  // strictly increasing quotient
        prev_q = q;
        CHECK(m.fprime(t) - q > 0.0);  // natural-constraint inequality
        CHECK(m.f(t) * t - 2.0 * m.F(t) >= 0.0);
    }
    CHECK(prev_q < m.l_infinity());
}

TEST_CASE("audit: default model passes all seven checks") {
    SaturableModel m(1.0, 0.5);
    const auto report = audit_hypotheses(m, m.growth());
    REQUIRE(report.checks.size() == 7);
    for (const auto& c : report.checks) {
        INFO(c.name, ": ", c.detail);
        CHECK(c.pass);
    }
    CHECK(report.all_pass());
}

TEST_CASE("audit: s*lambda >= 1 fails exactly the asymptote check") {
    SaturableModel m(3.0, 0.5);  // l_infinity = 2 < lambda
    const auto report = audit_hypotheses(m, m.growth());
    for (const auto& c : report.checks) {
        INFO(c.name, ": ", c.detail);
        if (c.name == "asymptote")
            CHECK_FALSE(c.pass);
        else
            CHECK(c.pass);
    }
}

TEST_CASE("audit: pure cubic fails exactly the asymptote check") {
    CubicProbe probe;
    const auto report = audit_hypotheses(probe, GrowthParams{3.0, 3.0, 3.5});
    for (const auto& c : report.checks) {
        INFO(c.name, ": ", c.detail);
        if (c.name == "asymptote")
            CHECK_FALSE(c.pass);
        else
            CHECK(c.pass);
    }
}

TEST_CASE("tabulated nonlinearity reproduces the model") {
    SaturableModel m(1.0, 0.5);
    std::vector<double> ts, fs;
    for (int i = 0; i <= 2400; ++i) {
        const double t = 1e-6 * std::pow(1e11, i / 2400.0);
        ts.push_back(t);
        fs.push_back(m.f(t));
    }
    TabulatedNonlinearity tab(1.0, ts, fs);
    for (double t : {1e-4, 0.03, 0.9, 4.0, 120.0, 8000.0}) {
        CHECK(tab.f(t) == doctest::Approx(m.f(t)).epsilon(1e-7));
        CHECK(tab.fprime(t) == doctest::Approx(m.fprime(t)).epsilon(1e-4));
        CHECK(tab.F(t) == doctest::Approx(m.F(t)).epsilon(1e-6));
    }
    CHECK(tab.l_infinity() == doctest::Approx(2.0).epsilon(1e-4));
    CHECK(tab.crossing_b() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));

    const auto report = audit_hypotheses(tab, GrowthParams{1.5, 3.0, 4.0});
    for (const auto& c : report.checks) {
        INFO(c.name, ": ", c.detail);
        CHECK(c.pass);
    }
}

TEST_CASE("audit report lookup") {
    SaturableModel m(1.0, 0.5);
    const auto report = audit_hypotheses(m, m.growth());
    REQUIRE(report.find("serrin_tang") != nullptr);
    CHECK(report.find("serrin_tang")->pass);
    CHECK(report.find("no_such_check") == nullptr);
}
