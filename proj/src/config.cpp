#include "exlink/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "exlink/errors.hpp"

namespace exlink {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

[[noreturn]] void fail(int line, const std::string& msg) {
    std::ostringstream os;
    os << "line " << line << ": " << msg;
    throw ConfigError(os.str());
}

double parse_double(const std::string& key, const std::string& text, int line) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(text, &pos);
        if (pos != text.size()) fail(line, "trailing characters after number for " + key);
        if (!std::isfinite(v)) fail(line, "value for " + key + " must be finite");
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        fail(line, "expected a number for " + key + ", got '" + text + "'");
    }
}

long long parse_int(const std::string& key, const std::string& text, int line) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(text, &pos);
        if (pos != text.size()) fail(line, "trailing characters after integer for " + key);
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        fail(line, "expected an integer for " + key + ", got '" + text + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& text, int line) {
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(text, &pos);
        if (pos != text.size()) fail(line, "trailing characters after integer for " + key);
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        fail(line, "expected an unsigned integer for " + key + ", got '" + text + "'");
    }
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream is(text);
    while (std::getline(is, item, ',')) parts.push_back(trim(item));
    if (!text.empty() && text.back() == ',') parts.emplace_back();
    return parts;
}

std::vector<double> parse_double_list(const std::string& key, const std::string& text, int line) {
    std::vector<double> out;
    for (const auto& p : split_list(text)) {
        if (p.empty()) fail(line, "empty element in list for " + key);
        out.push_back(parse_double(key, p, line));
    }
    if (out.empty()) fail(line, "list for " + key + " must not be empty");
    return out;
}

[[noreturn]] void bad_field(const std::string& key, const std::string& msg) {
    throw ConfigError(key + ": " + msg);
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

template <class T>
std::string join(const std::vector<T>& v, std::string (*fmt)(T)) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += fmt(v[i]);
    }
    return out;
}

}  // namespace

RunConfig parse_config(std::istream& in) {
    RunConfig cfg;
    std::set<std::string> seen;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::size_t hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string text = trim(raw);
        if (text.empty()) continue;
        const std::size_t eq = text.find('=');
        if (eq == std::string::npos) fail(line, "expected 'section.key = value', got '" + text + "'");
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (key.empty()) fail(line, "missing key before '='");
        if (value.empty()) fail(line, "missing value for " + key);
        if (!seen.insert(key).second) fail(line, "duplicate key " + key);

        if (key == "problem.N") {
            cfg.problem.N = static_cast<int>(parse_int(key, value, line));
        } else if (key == "problem.lambda") {
            cfg.problem.lambda = parse_double(key, value, line);
        } else if (key == "problem.s") {
            cfg.problem.s = parse_double(key, value, line);
        } else if (key == "problem.rho") {
            cfg.problem.rho = parse_double(key, value, line);
        } else if (key == "problem.R_out") {
            cfg.problem.R_out = parse_double(key, value, line);
        } else if (key == "problem.h") {
            cfg.problem.h = parse_double(key, value, line);
        } else if (key == "linking.x0") {
            const auto comps = parse_double_list(key, value, line);
            if (comps.size() != 2 && comps.size() != 3)
                fail(line, "linking.x0 needs 2 or 3 components");
            cfg.linking.x0 = {comps[0], comps[1], comps.size() == 3 ? comps[2] : 0.0};
        } else if (key == "linking.R_list") {
            cfg.linking.R_list = parse_double_list(key, value, line);
        } else if (key == "linking.t_samples") {
            cfg.linking.t_samples = static_cast<int>(parse_int(key, value, line));
        } else if (key == "linking.y_samples") {
            cfg.linking.y_samples = static_cast<int>(parse_int(key, value, line));
        } else if (key == "linking.separation") {
            cfg.linking.separation = parse_double(key, value, line);
        } else if (key == "solver.tol") {
            cfg.solver.tol = parse_double(key, value, line);
        } else if (key == "solver.budget") {
            cfg.solver.budget = static_cast<int>(parse_int(key, value, line));
        } else if (key == "solver.seed") {
            cfg.solver.seed = parse_u64(key, value, line);
        } else if (key == "solver.mode") {
            cfg.solver.mode = value;
        } else if (key == "output.directory") {
            cfg.output.directory = value;
        } else if (key == "output.formats") {
            cfg.output.formats.clear();
            for (const auto& p : split_list(value)) {
                if (p.empty()) fail(line, "empty element in list for " + key);
                cfg.output.formats.push_back(p);
            }
        } else {
            fail(line, "unknown key " + key);
        }
    }

    for (const char* req : {"problem.N", "problem.lambda", "problem.s", "problem.rho",
                            "problem.R_out", "problem.h"})
        if (!seen.count(req)) throw ConfigError(std::string("missing required field ") + req);

    validate_config(cfg);
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    return parse_config(in);
}

void validate_config(const RunConfig& cfg) {
    const auto& p = cfg.problem;
    if (p.N != 2 && p.N != 3) bad_field("problem.N", "dimension must be 2 or 3");
    if (!(p.lambda > 0.0)) bad_field("problem.lambda", "must be positive");
    if (!(p.s >= 0.0)) bad_field("problem.s", "must be nonnegative");
    if (!(p.s * p.lambda < 1.0))
        bad_field("problem.s", "saturation limit must clear lambda: s * lambda < 1");
    if (!(p.rho >= 0.0)) bad_field("problem.rho", "must be nonnegative");
    if (!(p.R_out > 0.0)) bad_field("problem.R_out", "must be positive");
    if (!(p.rho < p.R_out / 4.0)) bad_field("problem.rho", "obstacle too large: rho < R_out / 4");
    if (!(p.h > 0.0)) bad_field("problem.h", "must be positive");
    if (!(p.h <= 0.25)) bad_field("problem.h", "mesh too coarse: h <= 0.25");

    const auto& l = cfg.linking;
    double x0n = 0.0;
    for (int d = 0; d < 3; ++d) x0n += l.x0[d] * l.x0[d];
    if (std::abs(std::sqrt(x0n) - 1.0) > 1e-9) bad_field("linking.x0", "must be unit length");
    if (p.N == 2 && l.x0[2] != 0.0)
        bad_field("linking.x0", "third component must vanish in dimension 2");
    if (l.R_list.empty()) bad_field("linking.R_list", "must not be empty");
    for (double R : l.R_list) {
        if (!(R >= 4.0)) bad_field("linking.R_list", "every scale must be at least 4");
        if (!(R >= 4.0 * p.rho))
            bad_field("linking.R_list", "every scale must clear the obstacle: R >= 4 rho");
    }
    if (l.t_samples < 3) bad_field("linking.t_samples", "need at least 3 (two ends plus interior)");
    if (l.y_samples < 2) bad_field("linking.y_samples", "need at least 2");
    if (!(l.separation >= 1.0 && l.separation <= 4.0))
        bad_field("linking.separation", "must lie in [1, 4]");

    const auto& s = cfg.solver;
    if (!(s.tol > 0.0)) bad_field("solver.tol", "must be positive");
    if (s.budget < 1) bad_field("solver.budget", "must be at least 1");
    if (s.mode != "link" && s.mode != "minimize")
        bad_field("solver.mode", "must be 'link' or 'minimize'");

    const auto& o = cfg.output;
    if (o.directory.empty()) bad_field("output.directory", "must not be empty");
    if (o.formats.empty()) bad_field("output.formats", "must not be empty");
    for (const auto& f : o.formats)
        if (f != "json" && f != "csv") bad_field("output.formats", "unknown format '" + f + "'");
}

std::string dump_config(const RunConfig& cfg) {
    std::ostringstream os;
    os << "problem.N = " << cfg.problem.N << "\n";
    os << "problem.lambda = " << format_double(cfg.problem.lambda) << "\n";
    os << "problem.s = " << format_double(cfg.problem.s) << "\n";
    os << "problem.rho = " << format_double(cfg.problem.rho) << "\n";
    os << "problem.R_out = " << format_double(cfg.problem.R_out) << "\n";
    os << "problem.h = " << format_double(cfg.problem.h) << "\n";
    os << "linking.x0 = " << format_double(cfg.linking.x0[0]) << ", "
       << format_double(cfg.linking.x0[1]) << ", " << format_double(cfg.linking.x0[2]) << "\n";
    os << "linking.R_list = " << join<double>(cfg.linking.R_list, &format_double) << "\n";
    os << "linking.t_samples = " << cfg.linking.t_samples << "\n";
    os << "linking.y_samples = " << cfg.linking.y_samples << "\n";
    os << "linking.separation = " << format_double(cfg.linking.separation) << "\n";
    os << "solver.tol = " << format_double(cfg.solver.tol) << "\n";
    os << "solver.budget = " << cfg.solver.budget << "\n";
    os << "solver.seed = " << cfg.solver.seed << "\n";
    os << "solver.mode = " << cfg.solver.mode << "\n";
    os << "output.directory = " << cfg.output.directory << "\n";
    std::string fmts;
    for (std::size_t i = 0; i < cfg.output.formats.size(); ++i) {
        if (i) fmts += ", ";
        fmts += cfg.output.formats[i];
    }
    os << "output.formats = " << fmts << "\n";
    return os.str();
}

std::uint64_t config_hash(const RunConfig& cfg) {
    const std::string text = dump_config(cfg);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace exlink
