#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "cwbnlw/config.hpp"
#include "cwbnlw/q_solver.hpp"

namespace cwbnlw {

struct ScanSample {
    double eps = 0.0;
    double p0 = 0.0;
    bool included = false;
    std::string reason;  // exclusion certificate / error kind, empty when included
    double lambda = 0.0;
    double sigma = 0.0;
    int outer_iterations = 0;
    double residual_sup = 0.0;
    double worst_cert_margin = 0.0;  // max l2_norm / l2_bound over the trace
};

struct ScanReport {
    std::vector<ScanSample> samples;
    /// Per eps (in grid order): fraction of excluded p0 samples.
    std::vector<double> eps_grid;
    std::vector<double> excluded_fraction;
    bool trend_nonincreasing = true;  // as eps decreases
};

/// Solve at every p0 of a uniform grid over [1,2], for each eps of the grid
/// (given in decreasing order), and record the excluded fraction per eps.
ScanReport scan_p0(const RunConfig& config);

/// Mode dispatch. Writes the mode's artifacts under config.out_dir and
/// returns the process exit code (0 pass, 1 gating failure, 2 config error).
int run(const RunConfig& config);

/// Deterministic CSV/JSON helpers: every float is rendered with 17
/// significant digits and every artifact starts with the version and the
/// config hash.
std::string format_g17(double v);
void write_artifact_header(std::ostream& os, const RunConfig& config, char comment = '#');

void write_solution_bundle(std::ostream& os, const RunConfig& config, const CoupledResult& r,
                           const ResidualReport& audit);
void write_trace_csv(std::ostream& os, const RunConfig& config,
                     const std::vector<NewtonState>& trace, const ScaleSchedule& schedule);
void write_scan_csv(std::ostream& os, const RunConfig& config, const ScanReport& report);

void write_field_json(std::ostream& os, const FourierField& f);
FourierField read_field_json(std::istream& is);

/// Index-sharded deterministic parallel map: results identical for any
/// thread count.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace cwbnlw
