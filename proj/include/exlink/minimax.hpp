#pragma once

#include <array>
#include <utility>
#include <vector>

#include "exlink/grid.hpp"
#include "exlink/linking.hpp"
#include "exlink/nonlinearity.hpp"
#include "exlink/radial.hpp"

namespace exlink {

enum class DescentStatus { Converged, Exhausted, Escaped };

/// State of a constrained descent run.  The field is always post-projection,
/// so the constraint residual is at solve tolerance after every accepted
/// step, and the energy is non-increasing along accepted steps (recentering
/// translations, when enabled, may pay a bounded energy toll: they trade
/// descent for staying on the centroid-zero slice).
struct DescentState {
    Field u;
    double energy = 0.0;
    double residual = 0.0;  // free-gradient norm in the lambda-weighted H1 metric
    std::vector<double> energy_trace;
    std::vector<double> residual_trace;
    std::vector<double> tau_trace;   // constraint-scaling factor per record
    std::vector<double> step_trace;  // accepted line-search step (0 at entry)
    std::vector<std::array<double, 3>> beta_trace;
    int iter = 0;
    DescentStatus status = DescentStatus::Exhausted;
};

/// Palais-Smale style diagnostics of an iterate trace.
struct PSDiagnostics {
    std::vector<double> norm_trace;  // ||u_k|| in the H1 metric
    double norm_max = 0.0;
    std::vector<double> drift;  // |beta(u_k)|
    bool splitting_suspected = false;
    bool window_ok = false;  // final energy inside (m + delta, 2m - delta)
    // Best single translated-profile fit of the final iterate:
    // center = centroid, amplitude by least squares; residual relative.
    double fit_amplitude = 0.0;
    double fit_residual = 1.0;
    std::array<double, 3> fit_center{};
};

struct DescentOptions {
    int budget = 500;
    double tol = 1e-6;         // stop when the free-gradient norm falls below
    double tol_rel = 0.0;      // > 0: also stop at tol_rel * ||u|| (the larger wins)
    double cg_tol = 1e-9;      // inner linear-solve tolerance
    bool recenter = false;     // pull the centroid back to the origin cell
    double m_ref = 0.0;        // single-bump level; > 0 arms escape detection
    double escape_band = 9e-3; // |energy - m_ref| gate for the escape verdict
    int drift_window = 20;     // trailing iterations of sustained drift
    double drift_total = 0.1;  // required trailing drift distance (one cell)
    double window_delta_rel = 1e-2;  // delta = rel * m for the energy window
};

/// Projected-gradient descent on the natural constraint: u <- P(u - a g)
/// with the Riesz gradient g, Barzilai-Borwein step seeding and Armijo
/// backtracking (c = 1e-4, factor 0.5, initial step 1).  Terminates on
/// residual <= tol (Converged), budget (Exhausted), or a sustained
/// outward centroid drift at the single-bump energy level (Escaped).
/// Throws ConstraintLost (iterate attached) if re-projection fails.
std::pair<DescentState, PSDiagnostics> nehari_descent(const Grid& grid,
                                                      const Nonlinearity& model,
                                                      const RadialProfile& prof, const Field& u0,
                                                      const DescentOptions& opts = {});

/// Trace analysis alone: centroid drift, translated-profile subtraction,
/// boundedness, and the energy window.  Needs at least 20 snapshots.
PSDiagnostics splitting_monitor(const Grid& grid, const Nonlinearity& model,
                                const RadialProfile& prof, const std::vector<Field>& snapshots,
                                double window_delta_rel = 1e-2);

/// The same analysis rebuilt from a recorded run: centroid and energy traces
/// from the iteration log plus the final field.  Runs shorter than 20
/// records cannot support a splitting verdict and report false.
PSDiagnostics diagnose_trace(const Grid& grid, const Nonlinearity& model,
                             const RadialProfile& prof,
                             const std::vector<std::array<double, 3>>& beta_trace,
                             const std::vector<double>& energy_trace, const Field& final_u,
                             double window_delta_rel = 1e-2);

enum class MinimaxStatus { Converged, Exhausted, Rejected };

struct MinimaxReport {
    MinimaxStatus status = MinimaxStatus::Exhausted;
    double energy = 0.0;       // level of the returned candidate ("d_upper")
    double surface_max = 0.0;  // max over the sampled surface after sweeps
    double sup_boundary = 0.0; // rim level (held fixed)
    double inf_witness = 0.0;  // min witness level incl. slice members found
    std::array<double, 2> window{};  // (m, 2m)
    double window_delta = 0.0;
    double positivity_min = 0.0;  // min of the candidate over interior nodes
    double residual = 0.0;        // free-gradient norm at the candidate
    double norm = 0.0;            // ||u|| in the H1 metric
    double beta_abs = 0.0;        // |centroid| of the candidate
    int iterations = 0;
    // Focused-refinement traces (one record per descent iteration), for logs.
    std::vector<double> energy_trace;
    std::vector<double> residual_trace;
    std::vector<double> tau_trace;
    std::vector<double> step_trace;
    std::vector<std::array<double, 3>> beta_trace;
};

struct MinimaxOptions {
    int sweeps = 1;          // bounded passes over all interior samples
    int sweep_steps = 2;     // descent steps per sample and pass
    int budget = 800;        // focused-refinement iteration cap
    double tol_rel = 1e-5;   // residual target relative to ||u||
    double cg_tol = 1e-9;
    double seed = 0.0;       // optional asymmetric kick (saddle instability probe)
    double window_delta_rel = 1e-2;
    int threads = 1;
};

/// Linking minimax by boundary-fixed surface descent: interior samples take
/// bounded descent sweeps (rim samples stay fixed), then the max-energy
/// sample is refined by centroid-recentered descent within the slice until
/// the free residual meets tol.  The candidate level is an upper bound for
/// the true minimax level.  Throws GeometryBreach if the candidate level
/// falls to the rim level (the linking separation failed numerically).
std::pair<Field, MinimaxReport> linking_minimax(const LinkingConfig& cfg,
                                                const RadialProfile& prof, const Grid& grid,
                                                const Nonlinearity& model,
                                                const MinimaxOptions& opts = {});

/// Lattice translation by whole cells: out(x) = u(x - shift*h), reading
/// outside the box or non-interior sources as zero.
Field lattice_translate(const Grid& grid, const Field& u, const std::array<long, 3>& shift);

}  // namespace exlink
