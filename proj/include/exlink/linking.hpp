#pragma once

#include <array>
#include <vector>

#include "exlink/grid.hpp"
#include "exlink/nonlinearity.hpp"
#include "exlink/radial.hpp"

namespace exlink {

/// Parameters of the two-bump surface: base direction x0 (unit), separation
/// scale R, cutoff scale rho, and the sample sets — t over [0, 1] and y over
/// a sphere around x0 (radius 2 by default), so bump centers sweep the circle
/// of radius 2R around R x0.
struct LinkingConfig {
    std::array<double, 3> x0{1.0, 0.0, 0.0};
    double R = 12.0;
    double rho = 1.0;
    std::vector<double> t_samples;
    std::vector<std::array<double, 3>> y_samples;
};

LinkingConfig default_linking_config(int dim, double R, double rho, int y_count = 16,
                                     int t_count = 21, double separation = 2.0);
void validate_linking_config(const LinkingConfig& cfg, int dim);

/// Box that holds every surface sample of scale R with decay margin:
/// centers reach (1 + separation) R along +x0 and separation R transversally.
void scan_box(int dim, double R, std::array<double, 3>& lo, std::array<double, 3>& hi,
              double separation = 2.0);

/// Obstacle-cutoff bump  xi(x) w(|x - center|) sampled on the grid.
/// The center must keep a 5/sqrt(lambda) decay margin to every box face.
Field bump(const RadialProfile& prof, const Grid& grid, const std::array<double, 3>& center);

/// Interaction scale  int f(w(.-R x0)) w(.-R y)  by tensor Simpson
/// quadrature on the profile (tail-extended, no grid truncation).  Both
/// orderings of the lemma's equal pair are computed; value is their mean and
/// mismatch their absolute difference.
struct EpsilonEstimate {
    double value = 0.0;
    double mismatch = 0.0;
};
EpsilonEstimate epsilon_R(const RadialProfile& prof, double R, const std::array<double, 3>& x0,
                          const std::array<double, 3>& y, const Nonlinearity& model,
                          double box_half_width = 96.0);

/// The three pairwise integrals controlling the two-bump expansions:
/// int f(tau1 w1) tau2 w2, its mirror, and the lambda-weighted H1 cross
/// product of the two translates.
struct InteractionRecord {
    double f_first_second = 0.0;
    double f_second_first = 0.0;
    double cross_inner = 0.0;
};
InteractionRecord interaction_integrals(const RadialProfile& prof, double R,
                                        const std::array<double, 3>& x0,
                                        const std::array<double, 3>& y, double tau1, double tau2,
                                        const Nonlinearity& model);

/// ||xi w(.-c) - w(.-c)||^2 in the lambda-weighted H1 norm, integrated over
/// the cutoff collar only (the integrand vanishes beyond 2 rho).
double bump_substitution_defect(const RadialProfile& prof, const Nonlinearity& model, double rho,
                                double center_distance);

/// I(xi w(.-c)) - I(w): the action shift caused by the obstacle cutoff,
/// integrated as a localized difference (no large-term cancellation).
double bump_energy_shift(const RadialProfile& prof, const Nonlinearity& model, double rho,
                         double center_distance);

/// Positive overlap integral  int w^2a(z) w^2a(z - 2R e1) dz  bounding the
/// potential-splitting defect, with a the saturation-growth exponent.
double potential_splitting_slack(const RadialProfile& prof, double alpha, double R);

/// One surface sample:  Pi_N( t bump(Ry) + (1-t) bump(Rx0) ).  The t = 0
/// sample is independent of y.  A failed projection is reported as
/// NotProjectable with the separation scale named.
Field psi(const LinkingConfig& cfg, const std::array<double, 3>& y, double t,
          const RadialProfile& prof, const Grid& grid, const Nonlinearity& model,
          double* tau_out = nullptr);

struct ScanRow {
    int y_index = 0;
    double t = 0.0;
    double tau = 0.0;     // constraint time of the unprojected sample
    double energy = 0.0;  // I at the projected sample
    double beta_x = 0.0, beta_y = 0.0, beta_z = 0.0;
};

/// One certified inequality: both operands, and the verdict lhs < rhs.
struct Inequality {
    double lhs = 0.0, rhs = 0.0;
    bool ok = false;
};

struct LinkingScan {
    std::vector<ScanRow> rows;  // y-major, t within
    double sup_boundary = 0.0;  // max energy over the t = 1 rim
    double inf_witness = 0.0;   // min energy over the slice witnesses
    double max_energy = 0.0;    // max over all samples
    double two_m = 0.0;         // twice the limit level
    double tau_bound = 0.0;     // L: max constraint time over the scan
    double single_bump_level = 0.0;  // same-grid uncut bump reference
    double epsilon = 0.0, epsilon_mismatch = 0.0;
    double cap_worst = 0.0;  // worst |beta - R y| over the rim
    std::vector<double> witness_energies;
    Inequality cap;     // rim centroids pinned to R y: worst < 2h
    Inequality supinf;  // rim max < witness min
    Inequality window;  // surface max < 2m
};

/// Full geometry certificate: tabulates the surface, the rim, the witness
/// family, and the three inequalities.  Cells are independent; threads > 1
/// distributes y-columns, with a deterministic ordered reduction.
LinkingScan geometry_scan(const LinkingConfig& cfg, const RadialProfile& prof, const Grid& grid,
                          const Nonlinearity& model, int threads = 1);

}  // namespace exlink
