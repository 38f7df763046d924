#include "exlink/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "exlink/errors.hpp"
#include "exlink/quadrature.hpp"

namespace exlink {

namespace {

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Nonlinearity base
// ---------------------------------------------------------------------------

double Nonlinearity::crossing_b() const {
    // Locate the sign change of f(t)/t - lambda on a log grid, then bisect.
    const double lam = lambda();
    double lo = 0.0, hi = 0.0;
    double prev_t = 1e-8, prev_g = f(prev_t) / prev_t - lam;
    for (int i = 1; i <= 1600; ++i) {
        const double t = 1e-8 * std::pow(1e16, i / 1600.0);
        const double g = f(t) / t - lam;
        if (prev_g < 0.0 && g >= 0.0) {
            lo = prev_t;
            hi = t;
            break;
        }
        prev_t = t;
        prev_g = g;
    }
    if (hi == 0.0)
        throw NoCrossing("f(t)/t never reaches lambda = " + fmt(lam) +
                         " on (0, 1e8]: no crossing height b");
    for (int i = 0; i < 200 && (hi - lo) > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) / mid - lam < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// SaturableModel
// ---------------------------------------------------------------------------

SaturableModel::SaturableModel(double lambda, double s, GrowthParams growth)
    : lambda_(lambda), s_(s), growth_(growth) {
    if (lambda <= 0.0 || s <= 0.0)
        throw ConfigError("saturable model needs lambda > 0 and s > 0 (got lambda=" +
                          fmt(lambda) + ", s=" + fmt(s) + ")");
}

double SaturableModel::f(double t) const {
    if (t <= 0.0) return 0.0;
    return t * t * t / (1.0 + s_ * t * t);
}

double SaturableModel::F(double t) const {
    if (t <= 0.0) return 0.0;
    const double x = s_ * t * t;
    // F(t) = (x - log(1+x)) / (2 s^2); series for small x avoids cancellation.
    double core;
    if (x < 1e-4) {
        core = x * x * (0.5 - x * (1.0 / 3.0 - x * 0.25));
    } else {
        core = x - std::log1p(x);
    }
    return core / (2.0 * s_ * s_);
}

double SaturableModel::fprime(double t) const {
    if (t <= 0.0) return 0.0;
    const double d = 1.0 + s_ * t * t;
    return t * t * (3.0 + s_ * t * t) / (d * d);
}

double SaturableModel::crossing_b() const {
    const double sl = s_ * lambda_;
    if (sl >= 1.0)
        throw NoCrossing("f(t)/t saturates at 1/s = " + fmt(1.0 / s_) +
                         " <= lambda = " + fmt(lambda_) + ": no crossing height b");
    return std::sqrt(lambda_ / (1.0 - sl));
}

// ---------------------------------------------------------------------------
// TabulatedNonlinearity: natural cubic spline of log f vs log t
// ---------------------------------------------------------------------------

TabulatedNonlinearity::TabulatedNonlinearity(double lambda, std::vector<double> t_samples,
                                             std::vector<double> f_samples)
    : lambda_(lambda) {
    const size_t n = t_samples.size();
    if (n < 4 || f_samples.size() != n)
        throw ConfigError("tabulated nonlinearity needs >= 4 matching samples");
    logt_.resize(n);
    logf_.resize(n);
    for (size_t i = 0; i < n; ++i) {
        if (t_samples[i] <= 0.0 || f_samples[i] <= 0.0)
            throw ConfigError("tabulated nonlinearity needs t, f > 0 at every sample");
        if (i > 0 && t_samples[i] <= t_samples[i - 1])
            throw ConfigError("tabulated nonlinearity needs strictly increasing t samples");
        logt_[i] = std::log(t_samples[i]);
        logf_[i] = std::log(f_samples[i]);
    }
    // Natural cubic spline second-derivative moments (tridiagonal sweep).
    spline_m_.assign(n, 0.0);
    std::vector<double> c(n, 0.0), d(n, 0.0);
    for (size_t i = 1; i + 1 < n; ++i) {
        const double h0 = logt_[i] - logt_[i - 1], h1 = logt_[i + 1] - logt_[i];
        const double a = h0 / 6.0, b = (h0 + h1) / 3.0, cc = h1 / 6.0;
        const double rhs = (logf_[i + 1] - logf_[i]) / h1 - (logf_[i] - logf_[i - 1]) / h0;
        const double denom = b - a * c[i - 1];
        c[i] = cc / denom;
        d[i] = (rhs - a * d[i - 1]) / denom;
    }
    for (size_t i = n - 2; i >= 1; --i) spline_m_[i] = d[i] - c[i] * spline_m_[i + 1];
    const double h0 = logt_[1] - logt_[0];
    slope_lo_ = (logf_[1] - logf_[0]) / h0 - h0 / 6.0 * spline_m_[1];
    const double h1 = logt_[n - 1] - logt_[n - 2];
    slope_hi_ = (logf_[n - 1] - logf_[n - 2]) / h1 + h1 / 6.0 * spline_m_[n - 2];
}

double TabulatedNonlinearity::f(double t) const {
    if (t <= 0.0) return 0.0;
    const double x = std::log(t);
    if (x <= logt_.front())
        return std::exp(logf_.front() + slope_lo_ * (x - logt_.front()));
    if (x >= logt_.back())
        return std::exp(logf_.back() + slope_hi_ * (x - logt_.back()));
    const auto it = std::upper_bound(logt_.begin(), logt_.end(), x);
    const size_t i = static_cast<size_t>(it - logt_.begin()) - 1;
    const double h = logt_[i + 1] - logt_[i];
    const double a = (logt_[i + 1] - x) / h, b = (x - logt_[i]) / h;
    const double y = a * logf_[i] + b * logf_[i + 1] +
                     ((a * a * a - a) * spline_m_[i] + (b * b * b - b) * spline_m_[i + 1]) *
                         h * h / 6.0;
    return std::exp(y);
}

double TabulatedNonlinearity::fprime(double t) const {
    if (t <= 0.0) return 0.0;
    const double x = std::log(t);
    double slope;  // d log f / d log t
    if (x <= logt_.front()) {
        slope = slope_lo_;
    } else if (x >= logt_.back()) {
        slope = slope_hi_;
    } else {
        const auto it = std::upper_bound(logt_.begin(), logt_.end(), x);
        const size_t i = static_cast<size_t>(it - logt_.begin()) - 1;
        const double h = logt_[i + 1] - logt_[i];
        const double a = (logt_[i + 1] - x) / h, b = (x - logt_[i]) / h;
        slope = (logf_[i + 1] - logf_[i]) / h +
                ((3.0 * b * b - 1.0) * spline_m_[i + 1] - (3.0 * a * a - 1.0) * spline_m_[i]) *
                    h / 6.0;
    }
    return f(t) * slope / t;
}

double TabulatedNonlinearity::F(double t) const {
    if (t <= 0.0) return 0.0;
    const double t0 = std::exp(logt_.front());
    if (t <= t0) {
        // Pure power-law region: integrate the extrapolation exactly.
        const double p = slope_lo_;
        return f(t) * t / (p + 1.0);
    }
    const double head = f(t0) * t0 / (slope_lo_ + 1.0);
    return head + adaptive_simpson([this](double u) { return f(u); }, t0, t,
                                   1e-12 * (1.0 + t * f(t)));
}

double TabulatedNonlinearity::l_infinity() const {
    const double T = std::exp(logt_.back());
    const double q1 = f(T) / T, q2 = f(0.5 * T) / (0.5 * T);
    return (4.0 * q1 - q2) / 3.0;  // assumes q(t) = l - c/t^2
}

// ---------------------------------------------------------------------------
// Hypothesis audit
// ---------------------------------------------------------------------------

bool AuditReport::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

const HypothesisCheck* AuditReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

std::vector<double> default_audit_grid() {
    std::vector<double> g(400);
    for (size_t i = 0; i < g.size(); ++i)
        g[i] = 1e-4 * std::pow(1e8, double(i) / double(g.size() - 1));
    return g;
}

namespace {

HypothesisCheck check_smoothness(const Nonlinearity& m, const std::vector<double>& grid) {
    HypothesisCheck c{"smoothness", true, 0.0, ""};
    if (m.f(0.0) != 0.0 || m.f(-1.0) != 0.0 || m.F(-2.0) != 0.0) {
        c.pass = false;
        c.detail = "f or F does not vanish on (-inf, 0]";
        return c;
    }
    // C1 prolongation by zero: f(t)/t -> 0 at the origin.
    const double t0 = 1e-7;
    if (std::abs(m.f(t0) / t0) > 1e-4) {
        c.pass = false;
        c.witness_t = t0;
        c.detail = "f(t)/t does not vanish at 0+ (got " + fmt(m.f(t0) / t0) + ")";
        return c;
    }
    // Finite-difference consistency of fprime on a thinned grid.
    double worst = 0.0, worst_t = grid.front();
    for (size_t i = 0; i < grid.size(); i += 7) {
        const double t = grid[i];
        const double h = 6e-6 * t;
        const double fd = (m.f(t + h) - m.f(t - h)) / (2.0 * h);
        const double err = std::abs(fd - m.fprime(t)) / (1.0 + std::abs(m.fprime(t)));
        if (err > worst) {
            worst = err;
            worst_t = t;
        }
    }
    c.witness_t = worst_t;
    c.detail = "max relative fprime vs finite-difference mismatch " + fmt(worst);
    if (worst > 1e-4) {
        c.pass = false;
        c.detail = "fprime inconsistent with finite differences: " + c.detail;
    }
    return c;
}

HypothesisCheck check_growth(const Nonlinearity& m, const GrowthParams& g,
                             const std::vector<double>& grid) {
    HypothesisCheck c{"growth", true, 0.0, ""};
    double worst_margin = 0.0;
    for (double t : grid) {
        for (int k = 0; k <= 2; ++k) {
            const double bound =
                g.D * (std::pow(t, g.p1 - k) + std::pow(t, g.p2 - k)) * (1.0 + 1e-9);
            double val;
            if (k == 0) {
                val = std::abs(m.f(t));
            } else if (k == 1) {
                val = std::abs(m.fprime(t));
            } else {
                const double h = 1.2e-4 * t;
                val = std::abs((m.fprime(t + h) - m.fprime(t - h)) / (2.0 * h));
            }
            const double margin = val / bound;
            if (margin > worst_margin) {
                worst_margin = margin;
                c.witness_t = t;
            }
        }
    }
    c.detail = "worst |f^(k)| / envelope ratio " + fmt(worst_margin) + " (k<=2; k=3 recorded, not enforced)";
    if (worst_margin > 1.0) {
        c.pass = false;
        c.detail = "envelope D(t^(p1-k)+t^(p2-k)) violated: " + c.detail;
    }
    return c;
}

HypothesisCheck check_monotone_quotient(const Nonlinearity& m, const std::vector<double>& grid) {
    HypothesisCheck c{"monotone_quotient", true, 0.0, ""};
    double min_inc = 1e300;
    double prev = m.f(grid[0]) / grid[0];
    for (size_t i = 1; i < grid.size(); ++i) {
        const double q = m.f(grid[i]) / grid[i];
        const double inc = q - prev;
        if (inc < min_inc) {
            min_inc = inc;
            c.witness_t = grid[i];
        }
        prev = q;
    }
    c.detail = "min increment of f(t)/t between samples " + fmt(min_inc);
    if (min_inc <= 0.0) {
        c.pass = false;
        c.detail = "f(t)/t not strictly increasing: " + c.detail;
    }
    return c;
}

HypothesisCheck check_asymptote(const Nonlinearity& m, const std::vector<double>& grid) {
    HypothesisCheck c{"asymptote", true, grid.back(), ""};
    const double T = grid.back();
    const double q_top = m.f(T) / T, q_dec = m.f(T / 10.0) / (T / 10.0);
    const double rise = q_top / q_dec - 1.0;
    if (!(std::abs(rise) <= 0.05)) {
        c.pass = false;
        c.detail = "f(t)/t has no plateau over the top decade (relative rise " + fmt(rise) + ")";
        return c;
    }
    // Richardson step assuming f(t)/t = l - c/t^2.
    const double l_hat = (4.0 * q_top - m.f(0.5 * T) / (0.5 * T)) / 3.0;
    const double gap = m.lambda() - l_hat;
    c.detail = "l_infinity estimate " + fmt(l_hat) + ", lambda - l = " + fmt(gap);
    if (!(gap < 0.0)) {
        c.pass = false;
        c.detail = "lambda - l_infinity = " + fmt(gap) + " >= 0 (asymptotic slope too small)";
    }
    return c;
}

HypothesisCheck check_nonquadraticity(const Nonlinearity& m, const std::vector<double>& grid) {
    HypothesisCheck c{"nonquadraticity", true, 0.0, ""};
    double worst = 1e300;
    for (double t : grid) {
        const double Q = m.f(t) * t - 2.0 * m.F(t);
        if (Q < worst) {
            worst = Q;
            c.witness_t = t;
        }
        if (Q < -1e-12 * (1.0 + t * t)) {
            c.pass = false;
            c.detail = "f(t)t - 2F(t) = " + fmt(Q) + " < 0";
            return c;
        }
    }
    const double T = grid.back();
    const double Q_top = m.f(T) * T - 2.0 * m.F(T);
    const double Q_dec = m.f(T / 10.0) * (T / 10.0) - 2.0 * m.F(T / 10.0);
    c.detail = "min value " + fmt(worst) + ", top-decade increase " + fmt(Q_top - Q_dec);
    if (!(Q_top > Q_dec + 1e-9 * (1.0 + std::abs(Q_top)))) {
        c.pass = false;
        c.witness_t = T;
        c.detail = "f(t)t - 2F(t) not increasing over the top decade: " + c.detail;
    }
    return c;
}

HypothesisCheck check_natural_constraint(const Nonlinearity& m, const std::vector<double>& grid) {
    HypothesisCheck c{"natural_constraint", true, 0.0, ""};
    double worst = 1e300;
    for (double t : grid) {
        const double d = m.fprime(t) - m.f(t) / t;
        if (d < worst) {
            worst = d;
            c.witness_t = t;
        }
    }
    c.detail = "min of fprime(t) - f(t)/t over grid " + fmt(worst);
    if (!(worst > 0.0)) {
        c.pass = false;
        c.detail = "fprime(t) - f(t)/t <= 0: " + c.detail;
    }
    return c;
}

HypothesisCheck check_serrin_tang(const Nonlinearity& m, const std::vector<double>& grid) {
    HypothesisCheck c{"serrin_tang", true, 0.0, ""};
    double b;
    try {
        b = m.crossing_b();
    } catch (const NoCrossing&) {
        c.detail = "vacuous: no crossing b, window [b, inf) empty";
        return c;
    }
    const double lam = m.lambda();
    double prev_g = 0.0, max_rise = -1e300;
    bool have_prev = false;
    for (double t : grid) {
        const double denom = m.f(t) - lam * t;
        if (t <= b || denom <= 1e-10 * lam * t) continue;  // skip the singular edge at b
        const double g = t * (m.fprime(t) - lam) / denom;
        if (have_prev) {
            const double rise = g - prev_g;
            if (rise > max_rise) {
                max_rise = rise;
                c.witness_t = t;
            }
        }
        prev_g = g;
        have_prev = true;
    }
    if (!have_prev) {
        c.detail = "vacuous: no grid samples beyond b = " + fmt(b);
        return c;
    }
    c.detail = "max increment of the uniqueness quotient beyond b " + fmt(max_rise);
    if (max_rise > 1e-10 * (1.0 + std::abs(prev_g))) {
        c.pass = false;
        c.detail = "uniqueness quotient not decreasing on [b, inf): " + c.detail;
    }
    return c;
}

}  // namespace

AuditReport audit_hypotheses(const Nonlinearity& model, const GrowthParams& growth,
                             const std::vector<double>& t_grid) {
    if (t_grid.size() < 16)
        throw ConfigError("audit grid needs at least 16 samples");
    AuditReport r;
    r.checks.push_back(check_smoothness(model, t_grid));
    r.checks.push_back(check_growth(model, growth, t_grid));
    r.checks.push_back(check_monotone_quotient(model, t_grid));
    r.checks.push_back(check_asymptote(model, t_grid));
    r.checks.push_back(check_nonquadraticity(model, t_grid));
    r.checks.push_back(check_natural_constraint(model, t_grid));
    r.checks.push_back(check_serrin_tang(model, t_grid));
    return r;
}

}  // namespace exlink
