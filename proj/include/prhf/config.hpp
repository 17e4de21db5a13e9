#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "prhf/io.hpp"
#include "prhf/scf.hpp"

namespace prhf {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Full run configuration; all fields carry defaults that `--print-defaults`
/// echoes. Parsed from line-based `section.key = value` text; unknown keys
/// are an error with their line number.
struct RunConfig {
    // physics
    double Z = 2.0;
    int N = 2;
    double alpha = 1.0 / 137.0;
    // grid
    int n = 48;
    double box_length = 12.0;
    // scf
    ScfMode mode = ScfMode::Eigen;
    double mixing = 0.3;
    int max_iter = 60;
    double tol_residual = 1e-6;
    double tol_energy = 1e-8;
    int krylov_dim = 0;
    std::uint64_t scf_seed = 1;
    bool anderson = false;
    // regularity
    Vec3 x0{1.5, 0.0, 0.0};
    double p = 5.0;
    int max_order = 8;
    int j_max = 6;
    // verify
    int trials = 8;
    std::uint64_t verify_seed = 2024;
    double K1 = 2.0, K2 = 10.0, K3 = 10.0, K4 = 10.0;
    double C_star = 8.0;
    // output
    std::string directory = "out";
    bool snapshot = true;

    ScfConfig scf_config() const {
        ScfConfig c;
        c.mode = mode;
        c.mixing = mixing;
        c.max_iter = max_iter;
        c.tol_residual = tol_residual;
        c.tol_energy = tol_energy;
        c.krylov_dim = krylov_dim;
        c.seed = scf_seed;
        c.anderson = anderson;
        return c;
    }
    Physics physics() const { return Physics(alpha, Z, N); }
    Grid3 grid() const { return Grid3(n, box_length); }

    /// Echo in parseable form, deterministic order.
    std::string echo() const {
        std::ostringstream os;
        auto kv = [&](const std::string& k, const std::string& v) { os << k << " = " << v << "\n"; };
        kv("physics.Z", format_num(Z));
        kv("physics.N", std::to_string(N));
        kv("physics.alpha", format_num(alpha));
        kv("grid.n", std::to_string(n));
        kv("grid.box_length", format_num(box_length));
        kv("scf.mode", mode == ScfMode::Eigen ? "eigen" : "fixed_point");
        kv("scf.mixing", format_num(mixing));
        kv("scf.max_iter", std::to_string(max_iter));
        kv("scf.tol_residual", format_num(tol_residual));
        kv("scf.tol_energy", format_num(tol_energy));
        kv("scf.krylov_dim", std::to_string(krylov_dim));
        kv("scf.seed", std::to_string(scf_seed));
        kv("scf.anderson", anderson ? "true" : "false");
        kv("regularity.x0", format_num(x0[0]) + "," + format_num(x0[1]) + "," + format_num(x0[2]));
        kv("regularity.p", format_num(p));
        kv("regularity.max_order", std::to_string(max_order));
        kv("regularity.j_max", std::to_string(j_max));
        kv("verify.trials", std::to_string(trials));
        kv("verify.seed", std::to_string(verify_seed));
        kv("verify.K1", format_num(K1));
        kv("verify.K2", format_num(K2));
        kv("verify.K3", format_num(K3));
        kv("verify.K4", format_num(K4));
        kv("verify.C_star", format_num(C_star));
        kv("output.directory", directory);
        kv("output.snapshot", snapshot ? "true" : "false");
        return os.str();
    }

    static std::string format_num(double v) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

template <class T>
T parse_num(const std::string& v, int line, const std::string& key);

template <>
inline double parse_num<double>(const std::string& v, int line, const std::string& key) {
    size_t pos = 0;
    double r;
    try {
        r = std::stod(v, &pos);
    } catch (...) {
        throw ConfigError("line " + std::to_string(line) + ": value for " + key +
                          " is not a number: '" + v + "'");
    }
    if (pos != v.size())
        throw ConfigError("line " + std::to_string(line) + ": trailing junk in value for " + key);
    return r;
}

template <>
inline int parse_num<int>(const std::string& v, int line, const std::string& key) {
    size_t pos = 0;
    long r;
    try {
        r = std::stol(v, &pos);
    } catch (...) {
        throw ConfigError("line " + std::to_string(line) + ": value for " + key +
                          " is not an integer: '" + v + "'");
    }
    if (pos != v.size())
        throw ConfigError("line " + std::to_string(line) + ": trailing junk in value for " + key);
    return static_cast<int>(r);
}

template <>
inline std::uint64_t parse_num<std::uint64_t>(const std::string& v, int line,
                                              const std::string& key) {
    size_t pos = 0;
    unsigned long long r;
    try {
        r = std::stoull(v, &pos);
    } catch (...) {
        throw ConfigError("line " + std::to_string(line) + ": value for " + key +
                          " is not an unsigned integer: '" + v + "'");
    }
    if (pos != v.size())
        throw ConfigError("line " + std::to_string(line) + ": trailing junk in value for " + key);
    return r;
}

inline bool parse_bool(const std::string& v, int line, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("line " + std::to_string(line) + ": value for " + key +
                      " is not a boolean: '" + v + "'");
}

} // namespace detail

/// Parse `section.key = value` text. Empty lines and '#' comments allowed.
inline RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream is(text);
    std::string raw;
    int line = 0;
    while (std::getline(is, raw)) {
        ++line;
        std::string s = detail::trim(raw);
        if (s.empty() || s[0] == '#') continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line) + ": expected key = value");
        const std::string key = detail::trim(s.substr(0, eq));
        const std::string val = detail::trim(s.substr(eq + 1));
        using detail::parse_num;
        if (key == "physics.Z") cfg.Z = parse_num<double>(val, line, key);
        else if (key == "physics.N") cfg.N = parse_num<int>(val, line, key);
        else if (key == "physics.alpha") cfg.alpha = parse_num<double>(val, line, key);
        else if (key == "grid.n") cfg.n = parse_num<int>(val, line, key);
        else if (key == "grid.box_length") cfg.box_length = parse_num<double>(val, line, key);
        else if (key == "scf.mode") {
            if (val == "eigen") cfg.mode = ScfMode::Eigen;
            else if (val == "fixed_point") cfg.mode = ScfMode::FixedPoint;
            else throw ConfigError("line " + std::to_string(line) +
                                   ": scf.mode must be eigen or fixed_point");
        }
        else if (key == "scf.mixing") cfg.mixing = parse_num<double>(val, line, key);
        else if (key == "scf.max_iter") cfg.max_iter = parse_num<int>(val, line, key);
        else if (key == "scf.tol_residual") cfg.tol_residual = parse_num<double>(val, line, key);
        else if (key == "scf.tol_energy") cfg.tol_energy = parse_num<double>(val, line, key);
        else if (key == "scf.krylov_dim") cfg.krylov_dim = parse_num<int>(val, line, key);
        else if (key == "scf.seed") cfg.scf_seed = parse_num<std::uint64_t>(val, line, key);
        else if (key == "scf.anderson") cfg.anderson = detail::parse_bool(val, line, key);
        else if (key == "regularity.x0") {
            std::istringstream vs(val);
            std::string part;
            int i = 0;
            while (std::getline(vs, part, ',') && i < 3)
                cfg.x0[static_cast<size_t>(i++)] = parse_num<double>(detail::trim(part), line, key);
            if (i != 3)
                throw ConfigError("line " + std::to_string(line) +
                                  ": regularity.x0 needs three comma-separated numbers");
        }
        else if (key == "regularity.p") cfg.p = parse_num<double>(val, line, key);
        else if (key == "regularity.max_order") cfg.max_order = parse_num<int>(val, line, key);
        else if (key == "regularity.j_max") cfg.j_max = parse_num<int>(val, line, key);
        else if (key == "verify.trials") cfg.trials = parse_num<int>(val, line, key);
        else if (key == "verify.seed") cfg.verify_seed = parse_num<std::uint64_t>(val, line, key);
        else if (key == "verify.K1") cfg.K1 = parse_num<double>(val, line, key);
        else if (key == "verify.K2") cfg.K2 = parse_num<double>(val, line, key);
        else if (key == "verify.K3") cfg.K3 = parse_num<double>(val, line, key);
        else if (key == "verify.K4") cfg.K4 = parse_num<double>(val, line, key);
        else if (key == "verify.C_star") cfg.C_star = parse_num<double>(val, line, key);
        else if (key == "output.directory") cfg.directory = val;
        else if (key == "output.snapshot") cfg.snapshot = detail::parse_bool(val, line, key);
        else
            throw ConfigError("line " + std::to_string(line) + ": unknown key '" + key + "'");
    }
    // range validation before any compute starts
    if (cfg.N < 1) throw ConfigError("physics.N must be >= 1");
    if (!(cfg.alpha > 0)) throw ConfigError("physics.alpha must be > 0");
    if (!(cfg.Z > 0)) throw ConfigError("physics.Z must be > 0");
    if (cfg.n < 8 || cfg.n % 2) throw ConfigError("grid.n must be even and >= 8");
    if (!(cfg.box_length > 0)) throw ConfigError("grid.box_length must be > 0");
    if (!(cfg.tol_residual > 0)) throw ConfigError("scf.tol_residual must be > 0");
    if (!(cfg.mixing > 0) || cfg.mixing > 1) throw ConfigError("scf.mixing must lie in (0,1]");
    if (cfg.krylov_dim != 0 && cfg.krylov_dim < cfg.N + 2)
        throw ConfigError("scf.krylov_dim must be >= N + 2 (or 0 for auto)");
    if (cfg.p < 5) throw ConfigError("regularity.p must be >= 5");
    if (cfg.max_order > 10) throw ConfigError("regularity.max_order must be <= 10");
    if (cfg.j_max > 8) throw ConfigError("regularity.j_max must be <= 8");
    if (cfg.trials < 1) throw ConfigError("verify.trials must be >= 1");
    return cfg;
}

inline RunConfig parse_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("parse_config: cannot open " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config_text(ss.str());
}

} // namespace prhf
