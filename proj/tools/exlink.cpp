// Batch front-end for the exterior-domain variational solver: subcommands
// over a key=value config, deterministic JSON/CSV artifacts, and exit codes
// distinct per failure class (0 ok, 2 config, 3 numerical, 4 geometry
// breach, 5 not projectable).
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "exlink/barycenter.hpp"
#include "exlink/config.hpp"
#include "exlink/energy.hpp"
#include "exlink/errors.hpp"
#include "exlink/io.hpp"
#include "exlink/linking.hpp"
#include "exlink/minimax.hpp"
#include "exlink/nehari.hpp"
#include "exlink/nonlinearity.hpp"
#include "exlink/radial.hpp"

namespace fs = std::filesystem;
using namespace exlink;

namespace {

struct Session {
    RunConfig cfg;
    std::uint64_t hash = 0;
    fs::path out;
    int threads = 1;
};

bool wants_csv(const RunConfig& cfg) {
    for (const auto& f : cfg.output.formats)
        if (f == "csv") return true;
    return false;
}

Session open_session(const std::string& config_path, const std::string& out_override,
                     bool seed_set, std::uint64_t seed, int threads) {
    Session s;
    s.cfg = load_config(config_path);
    if (!out_override.empty()) s.cfg.output.directory = out_override;
    if (seed_set) s.cfg.solver.seed = seed;
    if (threads < 1) throw ConfigError("--threads must be at least 1");
    s.threads = threads;
    s.hash = config_hash(s.cfg);
    s.out = s.cfg.output.directory;
    fs::create_directories(s.out);
    std::ofstream copy(s.out / "config.txt");
    if (!copy) throw ConfigError("cannot write " + (s.out / "config.txt").string());
    copy << dump_config(s.cfg);
    return s;
}

std::array<double, 3> scaled(double c, const std::array<double, 3>& v) {
    return {c * v[0], c * v[1], c * v[2]};
}

/// y-sphere samples around the configured base direction: the planar ring,
/// or the golden-angle spiral in an orthonormal frame at x0.
LinkingConfig make_linking(const RunConfig& cfg, double R) {
    const int dim = cfg.problem.N;
    const auto& l = cfg.linking;
    LinkingConfig lc;
    lc.x0 = l.x0;
    lc.R = R;
    lc.rho = cfg.problem.rho;
    lc.t_samples.resize(l.t_samples);
    for (int i = 0; i < l.t_samples; ++i)
        lc.t_samples[i] = double(i) / double(l.t_samples - 1);
    lc.t_samples.front() = 0.0;
    lc.t_samples.back() = 1.0;

    const double sep = l.separation;
    std::array<double, 3> e1{}, e2{};
    if (dim == 2) {
        e1 = l.x0;
        e2 = {-l.x0[1], l.x0[0], 0.0};
    } else {
        e1 = l.x0;
        // Any vector not parallel to x0 seeds the frame.
        std::array<double, 3> seed_v = std::abs(l.x0[0]) < 0.9
                                           ? std::array<double, 3>{1.0, 0.0, 0.0}
                                           : std::array<double, 3>{0.0, 1.0, 0.0};
        double dot = 0.0;
        for (int d = 0; d < 3; ++d) dot += seed_v[d] * e1[d];
        double nrm = 0.0;
        for (int d = 0; d < 3; ++d) {
            e2[d] = seed_v[d] - dot * e1[d];
            nrm += e2[d] * e2[d];
        }
        nrm = std::sqrt(nrm);
        for (int d = 0; d < 3; ++d) e2[d] /= nrm;
    }
    if (dim == 2) {
        for (int k = 0; k < l.y_samples; ++k) {
            const double phi = 2.0 * M_PI * k / l.y_samples;
            std::array<double, 3> y{};
            for (int d = 0; d < 3; ++d)
                y[d] = l.x0[d] + sep * (std::cos(phi) * e1[d] + std::sin(phi) * e2[d]);
            lc.y_samples.push_back(y);
        }
    } else {
        std::array<double, 3> e3{e1[1] * e2[2] - e1[2] * e2[1], e1[2] * e2[0] - e1[0] * e2[2],
                                 e1[0] * e2[1] - e1[1] * e2[0]};
        const double golden = M_PI * (3.0 - std::sqrt(5.0));
        for (int k = 0; k < l.y_samples; ++k) {
            const double z = -1.0 + 2.0 * (k + 0.5) / l.y_samples;
            const double rad = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double phi = golden * k;
            std::array<double, 3> y{};
            for (int d = 0; d < 3; ++d)
                y[d] = l.x0[d] + sep * (rad * std::cos(phi) * e2[d] +
                                        rad * std::sin(phi) * e3[d] + z * e1[d]);
            lc.y_samples.push_back(y);
        }
    }
    validate_linking_config(lc, dim);
    return lc;
}

bool axis_aligned(const std::array<double, 3>& x0) {
    return x0[0] == 1.0 && x0[1] == 0.0 && x0[2] == 0.0;
}

Grid linking_grid(const RunConfig& cfg, double R) {
    std::array<double, 3> lo{}, hi{};
    if (axis_aligned(cfg.linking.x0)) {
        scan_box(cfg.problem.N, R, lo, hi, cfg.linking.separation);
    } else {
        // A rotated base direction needs the rotation-invariant hull.
        const double half = R * (1.0 + cfg.linking.separation) + 8.0;
        for (int d = 0; d < cfg.problem.N; ++d) {
            lo[d] = -half;
            hi[d] = half;
        }
    }
    return Grid(cfg.problem.N, cfg.problem.h, lo, hi, cfg.problem.rho);
}

Grid problem_grid(const RunConfig& cfg) {
    std::array<double, 3> lo{}, hi{};
    for (int d = 0; d < cfg.problem.N; ++d) {
        lo[d] = -cfg.problem.R_out;
        hi[d] = cfg.problem.R_out;
    }
    return Grid(cfg.problem.N, cfg.problem.h, lo, hi, cfg.problem.rho);
}

std::string r_label(double R) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", R);
    return buf;
}

int cmd_audit(const Session& s) {
    SaturableModel model(s.cfg.problem.lambda, s.cfg.problem.s);
    const AuditReport rep = audit_hypotheses(model, model.growth());
    nlohmann::json j;
    j["all_pass"] = rep.all_pass();
    j["checks"] = nlohmann::json::array();
    for (const auto& c : rep.checks) {
        nlohmann::json cj;
        cj["name"] = c.name;
        cj["pass"] = c.pass;
        cj["witness_t"] = c.witness_t;
        cj["detail"] = c.detail;
        j["checks"].push_back(cj);
        std::printf("%-18s %s  %s\n", c.name.c_str(), c.pass ? "pass" : "FAIL",
                    c.detail.c_str());
    }
    write_json((s.out / "audit.json").string(), j, s.hash);
    return rep.all_pass() ? 0 : 1;
}

int cmd_ground_state(const Session& s) {
    SaturableModel model(s.cfg.problem.lambda, s.cfg.problem.s);
    const RadialProfile prof = shoot_ground_state(model, s.cfg.problem.N);

    if (wants_csv(s.cfg)) {
        std::ofstream csv(s.out / "profile.csv");
        if (!csv) throw ConfigError("cannot write profile.csv");
        csv << "# config_hash=" << hash_string(s.hash) << "\n";
        csv << "r,w,w_prime\n";
        csv.precision(17);
        for (std::size_t i = 0; i < prof.w.size(); ++i)
            csv << i * prof.dr << ',' << prof.w[i] << ',' << prof.wp[i] << '\n';
    }

    nlohmann::json j;
    j["N"] = prof.N;
    j["lambda"] = prof.lambda;
    j["s"] = prof.s;
    j["m"] = prof.m;
    j["sigma"] = prof.sigma;
    j["b"] = prof.b;
    j["w0"] = prof.w0;
    j["r_max"] = prof.r_max;
    j["r_tail"] = prof.r_tail;
    j["fit_quality"] = prof.fit_quality;
    j["slope_quality"] = prof.slope_quality;
    write_json((s.out / "profile.json").string(), j, s.hash);
    std::printf("m = %.12g\nsigma = %.12g\nb = %.12g\n", prof.m, prof.sigma, prof.b);
    return 0;
}

int cmd_project(const Session& s) {
    SaturableModel model(s.cfg.problem.lambda, s.cfg.problem.s);
    const RadialProfile prof = shoot_ground_state(model, s.cfg.problem.N);
    nlohmann::json rows = nlohmann::json::array();
    std::ofstream csv;
    if (wants_csv(s.cfg)) {
        csv.open(s.out / "project.csv");
        if (!csv) throw ConfigError("cannot write project.csv");
        csv << "# config_hash=" << hash_string(s.hash) << "\n";
        csv << "R,time_map,energy,beta_x,beta_y\n";
        csv.precision(17);
    }
    for (double R : s.cfg.linking.R_list) {
        std::array<double, 3> lo{}, hi{};
        for (int d = 0; d < s.cfg.problem.N; ++d) {
            lo[d] = -(R + 9.0);
            hi[d] = R + 9.0;
        }
        Grid grid(s.cfg.problem.N, s.cfg.problem.h, lo, hi, s.cfg.problem.rho);
        const Field u = bump(prof, grid, scaled(R, s.cfg.linking.x0));
        const double tmap = nehari_time(grid, model, u);
        const Field v = nehari_project(grid, model, u);
        const double energy = action(grid, model, v);
        const auto beta = barycenter(grid, v).beta;
        nlohmann::json r;
        r["R"] = R;
        r["time_map"] = tmap;
        r["energy"] = energy;
        r["beta"] = {beta[0], beta[1], beta[2]};
        rows.push_back(r);
        if (csv.is_open())
            csv << R << ',' << tmap << ',' << energy << ',' << beta[0] << ',' << beta[1] << '\n';
        std::printf("R = %-4g  time map = %.8f  energy = %.8f  |beta - R x0| = %.3g\n", R, tmap,
                    energy,
                    std::hypot(beta[0] - R * s.cfg.linking.x0[0],
                               beta[1] - R * s.cfg.linking.x0[1]));
    }
    nlohmann::json j;
    j["rows"] = rows;
    write_json((s.out / "project.json").string(), j, s.hash);
    return 0;
}

int cmd_link_scan(const Session& s) {
    SaturableModel model(s.cfg.problem.lambda, s.cfg.problem.s);
    const RadialProfile prof = shoot_ground_state(model, s.cfg.problem.N);
    for (double R : s.cfg.linking.R_list) {
        const Grid grid = linking_grid(s.cfg, R);
        const LinkingConfig lc = make_linking(s.cfg, R);
        const LinkingScan scan = geometry_scan(lc, prof, grid, model, s.threads);
        const std::string label = r_label(R);
        if (wants_csv(s.cfg))
            write_scan_csv((s.out / ("scan_R" + label + ".csv")).string(), scan, s.hash);
        write_json((s.out / ("verdict_R" + label + ".json")).string(), scan_verdict(scan, R),
                   s.hash);
        std::printf(
            "R = %-4g  sup_dQ = %.6f  inf_S = %.6f  max_Q = %.6f  2m = %.6f  "
            "cap %s  supinf %s  window %s\n",
            R, scan.sup_boundary, scan.inf_witness, scan.max_energy, scan.two_m,
            scan.cap.ok ? "ok" : "VIOLATED", scan.supinf.ok ? "ok" : "VIOLATED",
            scan.window.ok ? "ok" : "VIOLATED");
    }
    return 0;
}

int cmd_solve(const Session& s) {
    SaturableModel model(s.cfg.problem.lambda, s.cfg.problem.s);
    const RadialProfile prof = shoot_ground_state(model, s.cfg.problem.N);

    if (s.cfg.solver.mode == "minimize") {
        const Grid grid = problem_grid(s.cfg);
        const Field u0 = bump(prof, grid, scaled(4.0, s.cfg.linking.x0));
        DescentOptions opts;
        opts.budget = s.cfg.solver.budget;
        opts.tol = 0.0;
        opts.tol_rel = s.cfg.solver.tol;
        opts.recenter = false;
        opts.m_ref = prof.m;
        auto [st, diag] = nehari_descent(grid, model, prof, u0, opts);
        double pmin = std::numeric_limits<double>::infinity();
        for (std::size_t idx : grid.interior()) pmin = std::min(pmin, st.u[idx]);
        write_run_log((s.out / "run.log").string(), descent_records(st), s.hash);
        write_field_snapshot((s.out / "solution.field").string(), grid, st.u, s.hash);
        if (wants_csv(s.cfg))
            write_field_csv((s.out / "solution.csv").string(), grid, st.u, s.hash);
        write_json((s.out / "report.json").string(),
                   descent_report(st, diag, {prof.m, 2.0 * prof.m}, pmin), s.hash);
        std::printf("status = %s\nenergy = %.10f\nresidual = %.3e\nsplitting_suspected = %s\n",
                    to_string(st.status), st.energy, st.residual,
                    diag.splitting_suspected ? "true" : "false");
        return 0;
    }

    const double R = s.cfg.linking.R_list.back();
    const Grid grid = linking_grid(s.cfg, R);
    const LinkingConfig lc = make_linking(s.cfg, R);
    MinimaxOptions opts;
    opts.budget = s.cfg.solver.budget;
    opts.tol_rel = s.cfg.solver.tol;
    opts.threads = s.threads;
    auto [u, rep] = linking_minimax(lc, prof, grid, model, opts);
    write_run_log((s.out / "run.log").string(), refinement_records(rep), s.hash);
    write_field_snapshot((s.out / "solution.field").string(), grid, u, s.hash);
    if (wants_csv(s.cfg)) write_field_csv((s.out / "solution.csv").string(), grid, u, s.hash);
    write_json((s.out / "report.json").string(), solve_report(rep), s.hash);
    const bool window_ok = rep.energy > rep.window[0] && rep.energy < rep.window[1];
    std::printf(
        "status = %s\nenergy = %.10f\nwindow = (%.6f, %.6f)  inside = %s\n"
        "residual = %.3e\npositivity_min = %.3e\n",
        to_string(rep.status), rep.energy, rep.window[0], rep.window[1],
        window_ok ? "true" : "false", rep.residual, rep.positivity_min);
    return rep.status == MinimaxStatus::Converged ? 0 : 3;
}

int cmd_diagnose(const std::string& run_dir, const std::string& config_override) {
    const fs::path dir = run_dir;
    const std::string cfg_path =
        config_override.empty() ? (dir / "config.txt").string() : config_override;
    RunConfig cfg = load_config(cfg_path);
    const std::uint64_t hash = config_hash(cfg);

    std::uint64_t log_hash = 0;
    const auto records = read_run_log((dir / "run.log").string(), &log_hash);
    if (log_hash != hash)
        throw ConfigError("run log provenance does not match " + cfg_path + ": " +
                          hash_string(log_hash) + " vs " + hash_string(hash));

    const Grid grid = read_snapshot_grid((dir / "solution.field").string());
    const Field final_u = read_field_snapshot((dir / "solution.field").string(), grid);

    SaturableModel model(cfg.problem.lambda, cfg.problem.s);
    const RadialProfile prof = shoot_ground_state(model, cfg.problem.N);

    std::vector<std::array<double, 3>> betas;
    std::vector<double> energies;
    betas.reserve(records.size());
    energies.reserve(records.size());
    for (const auto& r : records) {
        betas.push_back(r.beta);
        energies.push_back(r.energy);
    }
    const PSDiagnostics diag = diagnose_trace(grid, model, prof, betas, energies, final_u);
    write_json((dir / "diagnostics.json").string(), diagnostics_report(diag), hash);
    std::printf(
        "records = %zu\nsplitting_suspected = %s\nwindow_ok = %s\n"
        "fit_residual = %.4f\ndrift_total = %.4f\n",
        records.size(), diag.splitting_suspected ? "true" : "false",
        diag.window_ok ? "true" : "false", diag.fit_residual,
        diag.drift.back() - diag.drift.front());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exterior-domain variational solver"};
    app.require_subcommand(1);

    std::string config_path, out_override, run_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 1;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "configuration file")->required();
        sub->add_option("--out", out_override, "output directory (overrides config)");
        sub->add_option("--seed", seed, "seed recorded in the provenance hash")
            ->each([&](const std::string&) { seed_set = true; });
        sub->add_option("--threads", threads, "worker threads for scans and sweeps");
    };

    CLI::App* audit = app.add_subcommand("audit", "check the nonlinearity hypotheses");
    CLI::App* ground = app.add_subcommand("ground-state", "solve the radial limit problem");
    CLI::App* project = app.add_subcommand("project", "constraint-project single bumps");
    CLI::App* scan = app.add_subcommand("link-scan", "certify the linking geometry");
    CLI::App* solve = app.add_subcommand("solve", "run the configured solve pipeline");
    for (CLI::App* sub : {audit, ground, project, scan, solve}) add_common(sub);

    CLI::App* diagnose = app.add_subcommand("diagnose", "summarize a recorded run");
    diagnose->add_option("run_dir", run_dir, "directory written by solve")->required();
    diagnose->add_option("--config", config_path, "config override (default: run_dir/config.txt)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (diagnose->parsed()) return cmd_diagnose(run_dir, config_path);
        const Session s = open_session(config_path, out_override, seed_set, seed, threads);
        if (audit->parsed()) return cmd_audit(s);
        if (ground->parsed()) return cmd_ground_state(s);
        if (project->parsed()) return cmd_project(s);
        if (scan->parsed()) return cmd_link_scan(s);
        if (solve->parsed()) return cmd_solve(s);
        std::fprintf(stderr, "error: no subcommand\n");
        return 2;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const GeometryBreach& e) {
        std::fprintf(stderr, "geometry breach: %s\n", e.what());
        return 4;
    } catch (const NotProjectable& e) {
        std::fprintf(stderr, "not projectable: %s\n", e.what());
        return 5;
    } catch (const SolverError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    }
}
