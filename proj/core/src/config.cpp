#include "cwbnlw/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cwbnlw {

const char* kVersionString = "cwbnlw 0.1.0";

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : data) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

RunMode parse_mode(const std::string& s) {
    if (s == "solve") return RunMode::solve;
    if (s == "scan") return RunMode::scan;
    if (s == "separation") return RunMode::separation;
    if (s == "diophantine") return RunMode::diophantine;
    if (s == "coupling") return RunMode::coupling;
    if (s == "audit") return RunMode::audit;
    throw Error("config_error", "unknown mode: " + s);
}

std::string mode_name(RunMode m) {
    switch (m) {
        case RunMode::solve: return "solve";
        case RunMode::scan: return "scan";
        case RunMode::separation: return "separation";
        case RunMode::diophantine: return "diophantine";
        case RunMode::coupling: return "coupling";
        case RunMode::audit: return "audit";
    }
    return "?";
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

ConfigFile ConfigFile::parse_text(const std::string& text, const std::string& origin) {
    ConfigFile out;
    out.text_ = text;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw Error("config_error",
                            origin + ":" + std::to_string(lineno) + ": unterminated section");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw Error("config_error",
                            origin + ":" + std::to_string(lineno) + ": empty section name");
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error("config_error",
                        origin + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw Error("config_error", origin + ":" + std::to_string(lineno) + ": empty key");
        std::string full = section.empty() ? key : section + "." + key;
        if (out.values_.count(full))
            throw Error("config_error",
                        origin + ":" + std::to_string(lineno) + ": duplicate key " + full);
        out.values_[full] = value;
    }
    return out;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("config_error", "cannot open config file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_text(ss.str(), path);
}

bool ConfigFile::has(const std::string& key) const { return values_.count(key) > 0; }

std::string ConfigFile::get_str(const std::string& key, const std::string& fallback) const {
    touched_[key] = true;
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double ConfigFile::get_num(const std::string& key, double fallback) const {
    touched_[key] = true;
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    char* end = nullptr;
    double v = std::strtod(it->second.c_str(), &end);
    if (end == it->second.c_str() || *end != '\0')
        throw Error("config_error", "field " + key + ": not a number: " + it->second);
    return v;
}

std::int64_t ConfigFile::get_int(const std::string& key, std::int64_t fallback) const {
    double v = get_num(key, static_cast<double>(fallback));
    auto r = static_cast<std::int64_t>(v);
    if (static_cast<double>(r) != v)
        throw Error("config_error", "field " + key + ": expected an integer");
    return r;
}

bool ConfigFile::get_bool(const std::string& key, bool fallback) const {
    touched_[key] = true;
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw Error("config_error", "field " + key + ": expected true/false");
}

std::vector<double> ConfigFile::get_list(const std::string& key,
                                         std::vector<double> fallback) const {
    touched_[key] = true;
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    std::istringstream ss(it->second);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) continue;
        char* end = nullptr;
        double v = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str() || *end != '\0')
            throw Error("config_error", "field " + key + ": not a number: " + tok);
        out.push_back(v);
    }
    if (out.empty()) throw Error("config_error", "field " + key + ": empty list");
    return out;
}

std::vector<int> ConfigFile::get_int_list(const std::string& key, std::vector<int> fallback) const {
    std::vector<double> fb(fallback.begin(), fallback.end());
    auto vs = get_list(key, fb);
    std::vector<int> out;
    for (double v : vs) {
        int r = static_cast<int>(v);
        if (static_cast<double>(r) != v)
            throw Error("config_error", "field " + key + ": expected integers");
        out.push_back(r);
    }
    return out;
}

std::vector<std::string> ConfigFile::unused_keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_)
        if (!touched_.count(k)) out.push_back(k);
    return out;
}

RunConfig RunConfig::load(const ConfigFile& f, RunMode mode) {
    RunConfig cfg;
    cfg.mode = mode;
    cfg.config_hash = hash_hex(fnv1a64(f.text()));
    cfg.allow_nonpaper_constants = f.get_bool("output.allow_nonpaper_constants", false);

    auto constraint = [&cfg](bool ok, const std::string& msg) {
        if (ok) return;
        if (cfg.allow_nonpaper_constants)
            cfg.warnings.push_back(msg);
        else
            throw Error("config_error", msg + " (set output.allow_nonpaper_constants to override)");
    };

    int d = static_cast<int>(f.get_int("problem.d", 1));
    std::vector<int> m0 = f.get_int_list("problem.m0", {1});
    double rho = f.get_num("problem.rho", std::sqrt(2.0));
    double alpha = f.get_num("problem.alpha", 0.05);
    double eps = f.get_num("problem.eps", 1e-3);
    try {
        cfg.problem = ProblemParams::make(d, m0, rho, alpha, eps);
    } catch (const std::exception& e) {
        throw Error("config_error", std::string("problem section: ") + e.what());
    }

    cfg.schedule.M = static_cast<int>(f.get_int("schedule.M", 4));
    cfg.schedule.c = f.get_num("schedule.c", 0.04);
    cfg.schedule.C1 = f.get_num("schedule.C1", 3.0);
    cfg.schedule.C2 = f.get_num("schedule.C2", 2.5);
    cfg.schedule.j0 = static_cast<int>(f.get_int("schedule.j0", 1));
    cfg.schedule.j_max = static_cast<int>(f.get_int("schedule.j_max", 3));
    cfg.schedule.residual_floor = f.get_num("schedule.residual_floor", 1e-13);
    constraint(cfg.schedule.M >= 2, "schedule: M must be >= 2");
    constraint(cfg.schedule.c > 0.0 && cfg.schedule.c < cfg.schedule.c_limit(),
               "schedule: need 0 < c < log(17/16)/log M");
    constraint(cfg.schedule.C1 > cfg.schedule.C2 && cfg.schedule.C2 > 2.0,
               "schedule: need C1 > C2 > 2");
    constraint(cfg.schedule.j0 >= 0 && cfg.schedule.j_max >= cfg.schedule.j0,
               "schedule: need 0 <= j0 <= j_max");

    cfg.p0 = f.get_num("solve.p0", 1.5);
    constraint(cfg.p0 >= 1.0 && cfg.p0 <= 2.0, "solve: p0 must lie in [1,2]");
    cfg.q.outer_tol = f.get_num("solve.outer_tol", 1e-12);
    cfg.q.outer_max = static_cast<int>(f.get_int("solve.outer_max", 50));
    cfg.q.damping = f.get_num("solve.q_damping", 1.0);

    cfg.p.field.support_cap = static_cast<int>(f.get_int("tolerances.support_cap", 1 << 14));
    cfg.p.field.fft_threshold =
        static_cast<std::size_t>(f.get_int("tolerances.fft_threshold", 512));
    cfg.p.cond_cap = f.get_num("tolerances.cond_cap", 1e14);
    cfg.p.max_basis = static_cast<int>(f.get_int("tolerances.max_basis", 5000));
    cfg.q.field = cfg.p.field;
    cfg.decay_slack = f.get_num("tolerances.decay_slack", 0.9);
    cfg.rho_condition_gamma = f.get_num("tolerances.rho_gamma", 0.01);

    cfg.scan.p0_samples = static_cast<int>(f.get_int("scan.p0_samples", 64));
    cfg.scan.eps_grid = f.get_list("scan.eps_grid", {1e-3, 5e-4, 1e-4});
    cfg.scan.j_max = static_cast<int>(f.get_int("scan.j_max", 2));
    constraint(cfg.scan.p0_samples >= 1, "scan: p0_samples >= 1");

    cfg.separation.N = static_cast<int>(f.get_int("separation.N", 256));
    cfg.separation.d = static_cast<int>(f.get_int("separation.d", 2));
    cfg.separation.n_lambda_samples =
        static_cast<int>(f.get_int("separation.n_lambda_samples", 20));
    cfg.separation.lambda_min = f.get_num("separation.lambda_min", 1.0);
    cfg.separation.lambda_max = f.get_num("separation.lambda_max", 2.0);
    cfg.separation.B_factor = f.get_num("separation.B_factor", 2.0);
    cfg.separation.Bprime_factor = f.get_num("separation.Bprime_factor", 4.0);
    cfg.separation.alpha = f.get_num("separation.alpha", cfg.problem.alpha);
    cfg.separation.chain_budget = f.get_int("separation.chain_budget", 1'000'000);
    cfg.separation.chain_search_radius =
        static_cast<int>(f.get_int("separation.chain_search_radius", 64));
    cfg.separation.gdc_gamma = f.get_num("separation.gdc_gamma", 1e-4);
    cfg.separation.gdc_tau = f.get_num("separation.gdc_tau", 4.0);
    cfg.separation.gdc_degree = static_cast<int>(f.get_int("separation.gdc_degree", 5));
    cfg.separation.gdc_coeff_bound = f.get_int("separation.gdc_coeff_bound", 10);
    cfg.separation.C_double_prime = f.get_num("separation.C_double_prime", 2.0);

    cfg.diophantine.gamma_grid = f.get_list("diophantine.gamma_grid", {1e-2, 1e-3, 1e-4});
    cfg.diophantine.tau = f.get_num("diophantine.tau", 10.0);
    cfg.diophantine.degree = static_cast<int>(f.get_int("diophantine.degree", 2));
    cfg.diophantine.coeff_bound = f.get_int("diophantine.coeff_bound", 8);
    cfg.diophantine.samples = f.get_int("diophantine.samples", 100'000);
    cfg.diophantine.interval_lo = f.get_num("diophantine.interval_lo", 0.0);
    cfg.diophantine.interval_hi = f.get_num("diophantine.interval_hi", 1.0);
    cfg.diophantine.rho_n_max = f.get_int("diophantine.rho_n_max", 10'000);
    cfg.diophantine.rho_gamma = f.get_num("diophantine.rho_gamma", 0.01);

    cfg.coupling.instances = static_cast<int>(f.get_int("coupling.instances", 100));
    cfg.coupling.lemma = f.get_str("coupling.lemma", "both");
    cfg.coupling.c1_length = static_cast<int>(f.get_int("coupling.c1_length", 200));
    cfg.coupling.c2_radius = static_cast<int>(f.get_int("coupling.c2_radius", 10));
    constraint(cfg.coupling.lemma == "both" || cfg.coupling.lemma == "c1" ||
                   cfg.coupling.lemma == "c2",
               "coupling: lemma must be c1, c2 or both");

    cfg.out_dir = f.get_str("output.dir", "out");
    cfg.seed = static_cast<std::uint64_t>(f.get_int("output.seed", 12345));
    cfg.threads = static_cast<int>(f.get_int("output.threads", 1));

    auto unused = f.unused_keys();
    if (!unused.empty()) {
        std::string all;
        for (const auto& k : unused) all += (all.empty() ? "" : ", ") + k;
        throw Error("config_error", "unknown config keys: " + all);
    }
    return cfg;
}

}  // namespace cwbnlw
