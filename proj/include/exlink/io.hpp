#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "exlink/grid.hpp"
#include "exlink/linking.hpp"
#include "exlink/minimax.hpp"

namespace exlink {

/// One line of a descent run log.
struct IterRecord {
    int iter = 0;
    double energy = 0.0;
    double residual = 0.0;
    double tau = 0.0;
    std::array<double, 3> beta{};
    double step = 0.0;
};

std::string hash_string(std::uint64_t h);  // "0x" + 16 lowercase hex digits

const char* to_string(DescentStatus s);
const char* to_string(MinimaxStatus s);

/// Field snapshot: first line a JSON header {N, h, rho, box_lo, box_hi,
/// mask_hash, config_hash}, then the node values row-major (extent(0) values
/// per line), full round-trip precision.  The reader validates the header
/// against the grid and throws GridMismatch on any disagreement.
void write_field_snapshot(const std::string& path, const Grid& grid, const Field& u,
                          std::uint64_t config_hash);
Field read_field_snapshot(const std::string& path, const Grid& grid);

/// Rebuilds the discretization recorded in a snapshot header and verifies it
/// against the stored mask digest.
Grid read_snapshot_grid(const std::string& path);

/// Plot-ready CSV: a "# config_hash=..." comment, a column header, then one
/// row x,y[,z],value per interior node.
void write_field_csv(const std::string& path, const Grid& grid, const Field& u,
                     std::uint64_t config_hash);

/// Run log: a JSON header line {"config_hash": ...}, then one JSON object
/// per iteration {iter, energy, residual, tau, beta, step}.
void write_run_log(const std::string& path, const std::vector<IterRecord>& records,
                   std::uint64_t config_hash);
std::vector<IterRecord> read_run_log(const std::string& path,
                                     std::uint64_t* config_hash = nullptr);

std::vector<IterRecord> descent_records(const DescentState& st);
/// The focused-refinement trace of a minimax run (the polish that follows it
/// reports through the final candidate, not extra records).
std::vector<IterRecord> refinement_records(const MinimaxReport& rep);

/// Scan table CSV with the fixed schema y_index,t,tau,I_omega,beta_x,beta_y.
void write_scan_csv(const std::string& path, const LinkingScan& scan,
                    std::uint64_t config_hash);
std::vector<ScanRow> read_scan_csv(const std::string& path,
                                   std::uint64_t* config_hash = nullptr);

/// Verdict block {sup_dQ, inf_S_sampled, max_Q, two_m, inequalities: {cap,
/// supinf, window}} plus the recorded auxiliaries.
nlohmann::json scan_verdict(const LinkingScan& scan, double R);

nlohmann::json solve_report(const MinimaxReport& rep);
nlohmann::json descent_report(const DescentState& st, const PSDiagnostics& diag,
                              const std::array<double, 2>& window, double positivity_min);
nlohmann::json diagnostics_report(const PSDiagnostics& diag);

/// Writes pretty-printed JSON with "config_hash" injected at the top level.
void write_json(const std::string& path, nlohmann::json j, std::uint64_t config_hash);
nlohmann::json read_json(const std::string& path);

}  // namespace exlink
