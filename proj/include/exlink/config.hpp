#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace exlink {

/// Problem scale: dimension, model constants, obstacle radius, box truncation
/// radius, and mesh width.  These six keys are required in every config file.
struct ProblemSection {
    int N = 2;
    double lambda = 1.0;
    double s = 0.5;
    double rho = 1.0;
    double R_out = 40.0;
    double h = 0.1;
};

/// Linking-surface controls: base direction, the separation scales to scan,
/// sample counts, and the sphere radius around the base direction.
struct LinkingSection {
    std::array<double, 3> x0{1.0, 0.0, 0.0};
    std::vector<double> R_list{8.0, 12.0, 16.0};
    int t_samples = 11;
    int y_samples = 8;
    double separation = 2.0;
};

/// Solver controls.  `mode` selects the solve pipeline: "link" runs the
/// two-bump minimax, "minimize" runs plain constrained descent from a single
/// bump (the non-attainment diagnostic).
struct SolverSection {
    double tol = 1e-5;
    int budget = 600;
    std::uint64_t seed = 0;
    std::string mode = "link";
};

struct OutputSection {
    std::string directory = "out";
    std::vector<std::string> formats{"json", "csv"};
};

struct RunConfig {
    ProblemSection problem;
    LinkingSection linking;
    SolverSection solver;
    OutputSection output;
};

/// Parse the line-oriented `section.key = value` format.  `#` starts a
/// comment; blank lines are skipped; keys may not repeat.  Errors carry the
/// 1-based line number.  Missing required keys are reported by their dotted
/// names.  The parsed config is cross-validated (see validate_config).
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

/// Cross-field validation shared by every entry point: the saturation bound
/// s lambda < 1, the obstacle clearance rho < R_out / 4, the mesh bound
/// h <= 0.25, positive scales, sane sample counts.  Throws ConfigError naming
/// the offending dotted key.
void validate_config(const RunConfig& cfg);

/// Canonical serialization: every key exactly once, fixed order, full
/// precision.  parse_config(dump_config(c)) reproduces c exactly.
std::string dump_config(const RunConfig& cfg);

/// FNV-1a digest of the canonical serialization; embedded in every output
/// file so results can be traced to the exact configuration.
std::uint64_t config_hash(const RunConfig& cfg);

}  // namespace exlink
