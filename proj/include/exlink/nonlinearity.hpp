#pragma once

#include <memory>
#include <string>
#include <vector>

namespace exlink {

/// Interface for the nonlinear term f of  -Delta u + lambda u = f(u).
/// Conventions shared by all implementations:
///   * f(t) = 0 for t <= 0 (the problem only sees the positive part),
///   * F is the primitive of f with F(0) = 0,
///   * l_infinity() is the asymptotic slope lim f(t)/t (may be +inf).
class Nonlinearity {
public:
    virtual ~Nonlinearity() = default;

    virtual double f(double t) const = 0;
    virtual double F(double t) const = 0;
    virtual double fprime(double t) const = 0;
    virtual double lambda() const = 0;
    virtual double l_infinity() const = 0;

    /// Positive root b of f(t) = lambda*t, i.e. where the quotient f(t)/t
    /// crosses lambda.  Default: bisection on a log grid.  Throws NoCrossing
    /// if the quotient never reaches lambda.
    virtual double crossing_b() const;
};

/// Growth envelope |f^(k)(t)| <= D (t^(p1-k) + t^(p2-k)) used by the audit.
struct GrowthParams {
    double p1 = 1.5;
    double p2 = 3.0;
    double D  = 4.0;
};

/// Saturable model  f(t) = t^3 / (1 + s t^2),  t > 0.
/// Asymptotic slope 1/s; admissible (the linear part stays subcritical at
/// infinity) iff s*lambda < 1.  Construction only requires s, lambda > 0 so
/// that inadmissible parameter sets can still be audited.
class SaturableModel final : public Nonlinearity {
public:
    SaturableModel(double lambda, double s, GrowthParams growth = {});

    double f(double t) const override;
    double F(double t) const override;
    double fprime(double t) const override;
    double lambda() const override { return lambda_; }
    double l_infinity() const override { return 1.0 / s_; }
    double crossing_b() const override;

    double s() const { return s_; }
    const GrowthParams& growth() const { return growth_; }

private:
    double lambda_;
    double s_;
    GrowthParams growth_;
};

/// Nonlinearity given by samples of f on a positive grid.  Internally a
/// natural cubic spline of log f against log t, so positivity and the
/// power-law behaviour of the tails survive interpolation.  F is computed by
/// adaptive quadrature of the interpolant; l_infinity by Richardson
/// extrapolation of f(t)/t over the top decade of the table.
class TabulatedNonlinearity final : public Nonlinearity {
public:
    /// t_samples must be strictly increasing and positive, f_samples > 0.
    TabulatedNonlinearity(double lambda, std::vector<double> t_samples,
                          std::vector<double> f_samples);

    double f(double t) const override;
    double F(double t) const override;
    double fprime(double t) const override;
    double lambda() const override { return lambda_; }
    double l_infinity() const override;

private:
    double lambda_;
    std::vector<double> logt_, logf_, spline_m_;  // knots and spline moments
    double slope_lo_, slope_hi_;                  // log-log tail slopes
};

/// One hypothesis verdict.  witness_t is the sample where the check failed
/// (or the worst-margin sample when it passed).
struct HypothesisCheck {
    std::string name;
    bool pass = false;
    double witness_t = 0.0;
    std::string detail;
};

struct AuditReport {
    std::vector<HypothesisCheck> checks;
    bool all_pass() const;
    const HypothesisCheck* find(const std::string& name) const;
};

/// Default audit grid: 400 log-spaced samples in [1e-4, 1e4].
std::vector<double> default_audit_grid();

/// Run the seven structural checks on f over the given grid:
///   smoothness        - C1 prolongation by zero at the origin,
///                       finite-difference consistency of fprime
///   growth            - derivative envelope for k = 0,1,2 (k = 3 recorded,
///                       not enforced: third differences of a tabulated f
///                       are numerically meaningless)
///   monotone_quotient - f(t)/t strictly increasing
///   asymptote         - f(t)/t has a finite plateau l and lambda - l < 0
///   nonquadraticity   - f(t)t - 2F(t) >= 0 and increasing at the top
///   natural_constraint- fprime(t) - f(t)/t > 0
///   serrin_tang       - (-lambda t + t fprime)/(-lambda t + f) decreasing
///                       beyond the crossing b (vacuous if b does not exist)
AuditReport audit_hypotheses(const Nonlinearity& model, const GrowthParams& growth,
                             const std::vector<double>& t_grid = default_audit_grid());

}  // namespace exlink
