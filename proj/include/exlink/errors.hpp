#pragma once

#include <stdexcept>
#include <string>
#include <vector>

/// Error taxonomy for the exterior-domain solver.  Every failure mode that a
/// caller can reasonably handle gets its own type; the CLI maps them onto
/// process exit codes (see tools/exlink.cpp).
namespace exlink {

/// Base class so callers can catch the whole family at once.
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Configuration / input errors (bad key=value file, inconsistent settings).
struct ConfigError : SolverError {
    using SolverError::SolverError;
};

/// f(t) = lambda*t has no positive root (model outside the admissible window).
struct NoCrossing : SolverError {
    using SolverError::SolverError;
};

/// Shooting bisection could not bracket the ground-state height.
struct ShootingBracketFailure : SolverError {
    using SolverError::SolverError;
};

/// ODE integration failed (step underflow, NaN, ...).
struct IntegrationFailure : SolverError {
    using SolverError::SolverError;
};

/// Decay-law fit window unusable (too few samples / outside integrated range).
struct FitWindowError : SolverError {
    using SolverError::SolverError;
};

/// Fields from incompatible grids were combined.
struct GridMismatch : SolverError {
    using SolverError::SolverError;
};

/// Iterative solver made no progress within budget.
struct SolverStall : SolverError {
    using SolverError::SolverError;
};

/// Field not projectable onto the Nehari manifold (G(u) >= 0 or u+ = 0).
struct NotProjectable : SolverError {
    using SolverError::SolverError;
};

/// Bump center too close to the truncated box boundary.
struct BumpTruncated : SolverError {
    using SolverError::SolverError;
};

/// Nehari constraint lost during descent (re-projection failed).  Carries
/// the offending iterate so callers can inspect where the ray left the
/// admissible cone.
struct ConstraintLost : SolverError {
    using SolverError::SolverError;
    ConstraintLost(const std::string& msg, std::vector<double> offending)
        : SolverError(msg), iterate(std::move(offending)) {}
    std::vector<double> iterate;
};

/// Linking geometry violated numerically (minimax level below sampled inf_S,
/// or scan verdicts failed where they are a precondition).
struct GeometryBreach : SolverError {
    using SolverError::SolverError;
};

/// Barycenter undefined (|u| averages identically zero).
struct UndefinedBarycenter : SolverError {
    using SolverError::SolverError;
};

}  // namespace exlink
