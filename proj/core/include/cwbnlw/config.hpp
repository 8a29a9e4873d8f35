#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cwbnlw/p_solver.hpp"
#include "cwbnlw/problem.hpp"
#include "cwbnlw/q_solver.hpp"

namespace cwbnlw {

enum class RunMode { solve, scan, separation, diophantine, coupling, audit };

RunMode parse_mode(const std::string& s);
std::string mode_name(RunMode m);

/// Flat "[section]" / "key = value" configuration text. Unknown keys are
/// rejected so typos surface as exit-2 diagnostics with line numbers.
class ConfigFile {
public:
    static ConfigFile parse_text(const std::string& text, const std::string& origin = "<string>");
    static ConfigFile parse_file(const std::string& path);

    bool has(const std::string& key) const;
    std::string get_str(const std::string& key, const std::string& fallback) const;
    double get_num(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_list(const std::string& key, std::vector<double> fallback) const;
    std::vector<int> get_int_list(const std::string& key, std::vector<int> fallback) const;

    const std::string& text() const { return text_; }
    std::vector<std::string> unused_keys() const;

private:
    std::string text_;
    std::map<std::string, std::string> values_;
    mutable std::map<std::string, bool> touched_;
};

struct ScanConfig {
    int p0_samples = 64;
    std::vector<double> eps_grid = {1e-3, 5e-4, 1e-4};
    int j_max = 2;
};

struct SeparationConfig {
    int N = 256;
    int d = 2;
    int n_lambda_samples = 20;
    double lambda_min = 1.0;
    double lambda_max = 2.0;
    double B_factor = 2.0;       // B = B_factor N^alpha
    double Bprime_factor = 4.0;  // B' = Bprime_factor N^alpha
    double alpha = 0.05;
    std::int64_t chain_budget = 1'000'000;
    int chain_search_radius = 64;
    double gdc_gamma = 1e-4;
    double gdc_tau = 4.0;
    int gdc_degree = 5;
    std::int64_t gdc_coeff_bound = 10;
    double C_double_prime = 2.0;  // frozen calibration of the chain bound
};

struct DiophantineConfig {
    std::vector<double> gamma_grid = {1e-2, 1e-3, 1e-4};
    double tau = 10.0;
    int degree = 2;
    std::int64_t coeff_bound = 8;
    std::int64_t samples = 100'000;
    double interval_lo = 0.0;
    double interval_hi = 1.0;
    std::int64_t rho_n_max = 10'000;
    double rho_gamma = 0.01;
};

struct CouplingConfig {
    int instances = 100;
    std::string lemma = "both";  // "c1", "c2", "both"
    int c1_length = 200;
    int c2_radius = 10;
};

struct RunConfig {
    RunMode mode = RunMode::solve;
    ProblemParams problem;
    ScaleSchedule schedule;
    double p0 = 1.5;
    QOptions q;
    PSolveOptions p;
    ScanConfig scan;
    SeparationConfig separation;
    DiophantineConfig diophantine;
    CouplingConfig coupling;
    double decay_slack = 0.9;
    double rho_condition_gamma = 0.01;
    std::string out_dir = "out";
    std::uint64_t seed = 12345;
    int threads = 1;
    std::string replay_file;
    bool allow_nonpaper_constants = false;
    std::vector<std::string> warnings;  // recorded in every output artifact
    std::string config_hash;

    /// Parse + validate; throws Error("config_error", ...) with line/field
    /// diagnostics. Constant inequalities (c vs M, C1 > C2 > 2, ...) are
    /// enforced unless allow_nonpaper_constants turns them into warnings.
    static RunConfig load(const ConfigFile& file, RunMode mode);
};

std::uint64_t fnv1a64(const std::string& data);
std::string hash_hex(std::uint64_t h);

extern const char* kVersionString;

}  // namespace cwbnlw
