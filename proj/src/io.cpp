#include "exlink/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "exlink/errors.hpp"

namespace exlink {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open " + path + " for writing");
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path + " for reading");
    return in;
}

nlohmann::json parse_line(const std::string& path, int line, const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) {
        std::ostringstream os;
        os << path << " line " << line << ": malformed JSON";
        throw ConfigError(os.str());
    }
    return j;
}

}  // namespace

std::string hash_string(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(h));
    return buf;
}

const char* to_string(DescentStatus s) {
    switch (s) {
        case DescentStatus::Converged: return "Converged";
        case DescentStatus::Exhausted: return "Exhausted";
        case DescentStatus::Escaped: return "Escaped";
    }
    return "Unknown";
}

const char* to_string(MinimaxStatus s) {
    switch (s) {
        case MinimaxStatus::Converged: return "Converged";
        case MinimaxStatus::Exhausted: return "Exhausted";
        case MinimaxStatus::Rejected: return "Rejected";
    }
    return "Unknown";
}

void write_field_snapshot(const std::string& path, const Grid& grid, const Field& u,
                          std::uint64_t config_hash) {
    if (u.size() != grid.node_count())
        throw GridMismatch("snapshot field does not match the grid node count");
    nlohmann::json header;
    header["N"] = grid.dim();
    header["h"] = grid.spacing();
    header["rho"] = grid.obstacle_radius();
    nlohmann::json lo = nlohmann::json::array(), hi = nlohmann::json::array();
    for (int d = 0; d < grid.dim(); ++d) {
        lo.push_back(grid.lo_index(d) * grid.spacing());
        hi.push_back((grid.lo_index(d) + static_cast<long>(grid.extent(d)) - 1) * grid.spacing());
    }
    header["box_lo"] = lo;
    header["box_hi"] = hi;
    header["mask_hash"] = hash_string(grid.mask_hash());
    header["config_hash"] = hash_string(config_hash);

    auto out = open_out(path);
    out << header.dump() << "\n";
    const std::size_t row = grid.extent(0);
    for (std::size_t idx = 0; idx < u.size(); ++idx) {
        out << fmt(u[idx]);
        out << ((idx + 1) % row == 0 ? '\n' : ' ');
    }
}

Field read_field_snapshot(const std::string& path, const Grid& grid) {
    auto in = open_in(path);
    std::string first;
    if (!std::getline(in, first)) throw ConfigError(path + ": empty snapshot file");
    const nlohmann::json header = parse_line(path, 1, first);
    if (header.value("N", -1) != grid.dim())
        throw GridMismatch(path + ": snapshot dimension does not match the grid");
    if (std::abs(header.value("h", 0.0) - grid.spacing()) > 1e-12)
        throw GridMismatch(path + ": snapshot mesh width does not match the grid");
    if (std::abs(header.value("rho", -1.0) - grid.obstacle_radius()) > 1e-12)
        throw GridMismatch(path + ": snapshot obstacle radius does not match the grid");
    if (header.value("mask_hash", "") != hash_string(grid.mask_hash()))
        throw GridMismatch(path + ": snapshot mask hash does not match the grid");
    Field u = grid.zeros();
    for (std::size_t idx = 0; idx < u.size(); ++idx)
        if (!(in >> u[idx]))
            throw ConfigError(path + ": snapshot ended after " + std::to_string(idx) +
                              " of " + std::to_string(u.size()) + " values");
    double extra;
    if (in >> extra) throw ConfigError(path + ": snapshot has more values than grid nodes");
    return u;
}

Grid read_snapshot_grid(const std::string& path) {
    auto in = open_in(path);
    std::string first;
    if (!std::getline(in, first)) throw ConfigError(path + ": empty snapshot file");
    const nlohmann::json header = parse_line(path, 1, first);
    int N = 0;
    double h = 0.0, rho = 0.0;
    std::array<double, 3> lo{}, hi{};
    try {
        N = header.at("N").get<int>();
        h = header.at("h").get<double>();
        rho = header.at("rho").get<double>();
        const auto& jlo = header.at("box_lo");
        const auto& jhi = header.at("box_hi");
        if (static_cast<int>(jlo.size()) != N || static_cast<int>(jhi.size()) != N)
            throw ConfigError(path + ": snapshot box arrays do not match the dimension");
        for (int d = 0; d < N; ++d) {
            lo[d] = jlo[d].get<double>();
            hi[d] = jhi[d].get<double>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": snapshot header: " + e.what());
    }
    Grid grid(N, h, lo, hi, rho);
    if (header.value("mask_hash", "") != hash_string(grid.mask_hash()))
        throw GridMismatch(path + ": rebuilt grid disagrees with the stored mask hash");
    return grid;
}

void write_field_csv(const std::string& path, const Grid& grid, const Field& u,
                     std::uint64_t config_hash) {
    if (u.size() != grid.node_count())
        throw GridMismatch("snapshot field does not match the grid node count");
    auto out = open_out(path);
    out << "# config_hash=" << hash_string(config_hash) << "\n";
    out << (grid.dim() == 2 ? "x,y,value\n" : "x,y,z,value\n");
    for (std::size_t idx : grid.interior()) {
        const auto x = grid.coords(idx);
        out << fmt(x[0]) << ',' << fmt(x[1]);
        if (grid.dim() == 3) out << ',' << fmt(x[2]);
        out << ',' << fmt(u[idx]) << '\n';
    }
}

void write_run_log(const std::string& path, const std::vector<IterRecord>& records,
                   std::uint64_t config_hash) {
    auto out = open_out(path);
    nlohmann::json header;
    header["config_hash"] = hash_string(config_hash);
    out << header.dump() << "\n";
    for (const IterRecord& r : records) {
        nlohmann::json j;
        j["iter"] = r.iter;
        j["energy"] = r.energy;
        j["residual"] = r.residual;
        j["tau"] = r.tau;
        j["beta"] = {r.beta[0], r.beta[1], r.beta[2]};
        j["step"] = r.step;
        out << j.dump() << "\n";
    }
}

std::vector<IterRecord> read_run_log(const std::string& path, std::uint64_t* config_hash) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(path + ": empty run log");
    const nlohmann::json header = parse_line(path, 1, line);
    if (!header.contains("config_hash"))
        throw ConfigError(path + ": run log header lacks config_hash");
    if (config_hash) {
        const std::string hs = header["config_hash"].get<std::string>();
        *config_hash = std::stoull(hs, nullptr, 16);
    }
    std::vector<IterRecord> records;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const nlohmann::json j = parse_line(path, lineno, line);
        IterRecord r;
        try {
            r.iter = j.at("iter").get<int>();
            r.energy = j.at("energy").get<double>();
            r.residual = j.at("residual").get<double>();
            r.tau = j.at("tau").get<double>();
            r.step = j.at("step").get<double>();
            const auto& b = j.at("beta");
            for (std::size_t d = 0; d < 3 && d < b.size(); ++d) r.beta[d] = b[d].get<double>();
        } catch (const nlohmann::json::exception& e) {
            std::ostringstream os;
            os << path << " line " << lineno << ": " << e.what();
            throw ConfigError(os.str());
        }
        records.push_back(r);
    }
    return records;
}

namespace {

std::vector<IterRecord> zip_records(const std::vector<double>& energy,
                                    const std::vector<double>& residual,
                                    const std::vector<double>& tau,
                                    const std::vector<double>& step,
                                    const std::vector<std::array<double, 3>>& beta) {
    const std::size_t n = energy.size();
    if (residual.size() != n || tau.size() != n || step.size() != n || beta.size() != n)
        throw SolverError("inconsistent descent trace lengths");
    std::vector<IterRecord> records(n);
    for (std::size_t k = 0; k < n; ++k) {
        records[k].iter = static_cast<int>(k);
        records[k].energy = energy[k];
        records[k].residual = residual[k];
        records[k].tau = tau[k];
        records[k].step = step[k];
        records[k].beta = beta[k];
    }
    return records;
}

nlohmann::json inequality_json(const Inequality& q) {
    nlohmann::json j;
    j["lhs"] = q.lhs;
    j["rhs"] = q.rhs;
    j["ok"] = q.ok;
    return j;
}

}  // namespace

std::vector<IterRecord> descent_records(const DescentState& st) {
    return zip_records(st.energy_trace, st.residual_trace, st.tau_trace, st.step_trace,
                       st.beta_trace);
}

std::vector<IterRecord> refinement_records(const MinimaxReport& rep) {
    return zip_records(rep.energy_trace, rep.residual_trace, rep.tau_trace, rep.step_trace,
                       rep.beta_trace);
}

void write_scan_csv(const std::string& path, const LinkingScan& scan,
                    std::uint64_t config_hash) {
    auto out = open_out(path);
    out << "# config_hash=" << hash_string(config_hash) << "\n";
    out << "y_index,t,tau,I_omega,beta_x,beta_y\n";
    for (const ScanRow& r : scan.rows)
        out << r.y_index << ',' << fmt(r.t) << ',' << fmt(r.tau) << ',' << fmt(r.energy) << ','
            << fmt(r.beta_x) << ',' << fmt(r.beta_y) << '\n';
}

std::vector<ScanRow> read_scan_csv(const std::string& path, std::uint64_t* config_hash) {
    auto in = open_in(path);
    std::string line;
    int lineno = 0;
    std::vector<ScanRow> rows;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            const std::string tag = "# config_hash=";
            if (config_hash && line.rfind(tag, 0) == 0)
                *config_hash = std::stoull(line.substr(tag.size()), nullptr, 16);
            continue;
        }
        if (!saw_header) {
            if (line != "y_index,t,tau,I_omega,beta_x,beta_y")
                throw ConfigError(path + ": unexpected scan CSV header '" + line + "'");
            saw_header = true;
            continue;
        }
        ScanRow r;
        char comma;
        std::istringstream is(line);
        if (!(is >> r.y_index >> comma >> r.t >> comma >> r.tau >> comma >> r.energy >> comma >>
              r.beta_x >> comma >> r.beta_y)) {
            std::ostringstream os;
            os << path << " line " << lineno << ": malformed scan row '" << line << "'";
            throw ConfigError(os.str());
        }
        rows.push_back(r);
    }
    if (!saw_header) throw ConfigError(path + ": scan CSV has no header row");
    return rows;
}

nlohmann::json scan_verdict(const LinkingScan& scan, double R) {
    nlohmann::json j;
    j["R"] = R;
    j["sup_dQ"] = scan.sup_boundary;
    j["inf_S_sampled"] = scan.inf_witness;
    j["max_Q"] = scan.max_energy;
    j["two_m"] = scan.two_m;
    j["tau_bound"] = scan.tau_bound;
    j["single_bump_level"] = scan.single_bump_level;
    j["epsilon"] = scan.epsilon;
    j["epsilon_mismatch"] = scan.epsilon_mismatch;
    j["cap_worst"] = scan.cap_worst;
    j["witness_energies"] = scan.witness_energies;
    j["inequalities"]["cap"] = inequality_json(scan.cap);
    j["inequalities"]["supinf"] = inequality_json(scan.supinf);
    j["inequalities"]["window"] = inequality_json(scan.window);
    return j;
}

nlohmann::json solve_report(const MinimaxReport& rep) {
    nlohmann::json j;
    j["status"] = to_string(rep.status);
    j["energy"] = rep.energy;
    j["window"] = {rep.window[0], rep.window[1]};
    j["window_delta"] = rep.window_delta;
    j["positivity_min"] = rep.positivity_min;
    j["residual"] = rep.residual;
    j["norm"] = rep.norm;
    j["beta_abs"] = rep.beta_abs;
    j["surface_max"] = rep.surface_max;
    j["sup_boundary"] = rep.sup_boundary;
    j["inf_witness"] = rep.inf_witness;
    j["iterations"] = rep.iterations;
    return j;
}

nlohmann::json descent_report(const DescentState& st, const PSDiagnostics& diag,
                              const std::array<double, 2>& window, double positivity_min) {
    nlohmann::json j;
    j["status"] = to_string(st.status);
    j["energy"] = st.energy;
    j["window"] = {window[0], window[1]};
    j["positivity_min"] = positivity_min;
    j["residual"] = st.residual;
    j["iterations"] = st.iter;
    j["diagnostics"] = diagnostics_report(diag);
    return j;
}

nlohmann::json diagnostics_report(const PSDiagnostics& diag) {
    nlohmann::json j;
    j["splitting_suspected"] = diag.splitting_suspected;
    j["window_ok"] = diag.window_ok;
    j["fit_amplitude"] = diag.fit_amplitude;
    j["fit_residual"] = diag.fit_residual;
    j["fit_center"] = {diag.fit_center[0], diag.fit_center[1], diag.fit_center[2]};
    j["norm_max"] = diag.norm_max;
    j["records"] = diag.drift.size();
    if (!diag.drift.empty()) {
        j["drift_start"] = diag.drift.front();
        j["drift_end"] = diag.drift.back();
        j["drift_total"] = diag.drift.back() - diag.drift.front();
    }
    return j;
}

void write_json(const std::string& path, nlohmann::json j, std::uint64_t config_hash) {
    j["config_hash"] = hash_string(config_hash);
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

nlohmann::json read_json(const std::string& path) {
    auto in = open_in(path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError(path + ": malformed JSON");
    return j;
}

}  // namespace exlink
