#pragma once

#include <vector>

#include "exlink/nonlinearity.hpp"

namespace exlink {

/// Radial ground state w of  -w'' - ((N-1)/r) w' + lambda w = f(w),
/// w'(0) = 0, w > 0, w -> 0.  Samples live on the uniform grid r_i = i*dr up
/// to r_max; beyond r_tail evaluation switches to the matched decay law
///   w(r) ~ sigma * r^(-(N-1)/2) * exp(-sqrt(lambda) r).
struct RadialProfile {
    int N = 2;
    double lambda = 1.0;
    double s = 0.0;          // recorded model parameter (for sidecars)
    double dr = 0.0;
    std::vector<double> w;   // w(r_i)
    std::vector<double> wp;  // w'(r_i)
    double r_max = 0.0;      // last valid sample radius
    double r_tail = 0.0;     // switchover radius to the asymptotic law
    double sigma = 0.0;      // decay amplitude fitted over the law window
    double fit_quality = 0.0;   // max relative law deviation over the window
    double slope_quality = 0.0; // max relative deviation of the derivative law
    double m = 0.0;          // action level I(w)
    double b = 0.0;          // crossing height f(b) = lambda b
    double w0 = 0.0;         // shooting height w(0)

    /// Hermite-interpolated value / derivative; asymptotic beyond r_tail.
    double value(double r) const;
    double derivative(double r) const;

    /// Tail amplitude anchored at the matching radius (continuous with the
    /// samples; agrees with the fitted sigma to within fit_quality).
    double tail_amplitude() const;

    /// Smallest radius where w drops below w(0)/2.
    double half_max_radius() const;
};

struct ShootParams {
    double r_max = 20.0;      // integration range
    double dr_out = 5e-3;     // profile sample spacing
    double bracket_cap = 40.0;  // bracket upper bound, units of b
    double ode_tol = 1e-12;   // RK45 relative tolerance
    int max_bisect = 200;
    double fit_lo = 10.0;     // decay-law fit window
    double fit_hi = 15.0;
    double tail_cut = 1e-6;   // r_tail = first radius with w < tail_cut * w(0)
};

/// Shoot the ground state by bisection on the height w(0) in (b, cap*b].
/// Heights below the ground-state height rebound (w' turns nonnegative while
/// w > 0); heights above produce a sign crossing.  The returned profile is
/// the deepest non-crossing trajectory, cut where the rebound contaminates
/// the tail, with the decay law fitted over [fit_lo, fit_hi].
RadialProfile shoot_ground_state(const Nonlinearity& model, int N, const ShootParams& p = {});

/// Independent verification path: damped Newton on the finite-difference
/// two-point boundary value problem with w'(0) = 0, w(r_max) = 0.  Returns
/// node values on the uniform grid with n_nodes intervals.  The initial
/// guess, when given, must have n_nodes + 1 entries; otherwise a bump guess
/// built from the potential's zero-energy height is used.
std::vector<double> relax_ground_state(const Nonlinearity& model, int N, double r_max,
                                       int n_nodes,
                                       const std::vector<double>& initial_guess = {});

/// Decay-law fit over [lo, hi]: amplitude, value-law quality and
/// derivative-law quality (max relative deviations).
struct DecayFit {
    double sigma = 0.0;
    double quality = 0.0;
    double slope_quality = 0.0;
    int samples = 0;
};
DecayFit fit_decay_constants(int N, double lambda, double dr, const std::vector<double>& w,
                             const std::vector<double>& wp, double lo, double hi);

/// Action level  I(w) = omega_N * int [ (w'^2 + lambda w^2)/2 - F(w) ] r^(N-1) dr.
double limit_energy(const RadialProfile& prof, const Nonlinearity& model);

/// omega_N * int (w'^2 + lambda w^2) r^(N-1) dr.
double radial_norm_sq(const RadialProfile& prof);

/// L2 mass  omega_N * int w^2 r^(N-1) dr.
double radial_mass(const RadialProfile& prof);

/// Relative Nehari residual  |  ||w||^2 - int f(w) w  | / ||w||^2.
double radial_nehari_residual(const RadialProfile& prof, const Nonlinearity& model);

/// Nehari time of the scaled profile c*w on the radial quadrature: the tau
/// solving  ||c w||^2 = int f(tau c w) c w / tau.
double radial_nehari_time(const RadialProfile& prof, const Nonlinearity& model, double c);

/// Action of the scaled profile c*w.
double radial_action_scaled(const RadialProfile& prof, const Nonlinearity& model, double c);

/// Relative defect of the scaling identity
///   (N-2)/2 ||grad w||^2 + N/2 lambda ||w||_2^2 = N int F(w),
/// used as an independent certificate on the computed profile.
double pohozaev_residual(const RadialProfile& prof, const Nonlinearity& model);

}  // namespace exlink
