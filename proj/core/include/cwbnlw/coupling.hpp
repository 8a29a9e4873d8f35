#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace cwbnlw {

/// Sites of a coupling instance live on integer points of Z^dim packed as
/// small vectors; distances are l^1 throughout.
using CouplingSite = std::vector<int>;

int coupling_dist(const CouplingSite& a, const CouplingSite& b);

/// A matrix over a finite site set together with the cover (lemma 1) or the
/// cluster list (lemma 2) and every constant the hypotheses mention. The
/// generator and the hypothesis audit are deliberately separate code paths.
struct CouplingInstance {
    std::string lemma;  // "c1" or "c2"
    int dim = 1;
    std::vector<CouplingSite> sites;
    Eigen::MatrixXd matrix;

    // Lemma C.1: cover by index windows, plus constants.
    std::vector<std::vector<int>> cover;
    double B = 0.0;
    double K = 0.0;
    double C = 0.0;
    double C_prime = 0.0;
    double c = 0.0;

    // Lemma C.2: clusters by index, plus constants.
    std::vector<std::vector<int>> clusters;
    double eps1 = 0.0, eps2 = 0.0, eps3 = 0.0;
    double eps = 0.0;       // ||S|| bound
    double rho_diag = 0.0;  // diagonal lower bound off the clusters
    double M = 0.0;

    std::uint64_t seed = 0;
};

struct HypothesisReport {
    bool pass = true;
    std::vector<std::string> failures;
};

/// Re-check every stated hypothesis of the targeted lemma from the stored
/// matrix and constants (independent of how the instance was built).
HypothesisReport audit_hypotheses(const CouplingInstance& inst);

struct ConclusionReport {
    bool pass = true;
    double worst_entry_margin = 0.0;   // max |entry| / bound over checked pairs
    double worst_decay_margin = 0.0;
    std::int64_t decay_pairs_checked = 0;
    double norm_value = 0.0;
    double norm_bound = 0.0;
    std::vector<std::string> failures;
};

struct C1Params {
    int length = 200;       // 1-D interval of sites
    double K = 20.0;
    double c = 0.3;
    double C = 2.0;
    double C_prime = 3.0;
    double B = 0.0;         // 0: largest admissible under log B < K^c / 100
    double coupling_scale = 0.05;
    int max_attempts = 100;
};

/// Random instance satisfying the Lemma C.1 hypotheses: prescribed entry
/// decay, diagonal shifted until every window block inverse obeys the B and
/// K-tail bounds. Throws "instance_generation_failed" after max_attempts.
CouplingInstance gen_c1_instance(std::uint64_t seed, const C1Params& p = {});

ConclusionReport verify_c1(const CouplingInstance& inst);

struct C2Params {
    int dim = 2;            // lattice dimension d+1 of the site patch
    int radius = 10;        // l^1 radius of the site patch
    double M = 400.0;
    double eps1 = 0.095, eps2 = 0.06, eps3 = 0.03;
    double eps = 1e-3;
    double rho_diag = 1.0;
    double C = 3.0;
    int n_clusters = 2;
    double cluster_diag = 0.05;
    int max_attempts = 100;
};

CouplingInstance gen_c2_instance(std::uint64_t seed, const C2Params& p = {});

ConclusionReport verify_c2(const CouplingInstance& inst);

/// Replay files: full JSON dump of an instance, sufficient to rerun both
/// the audit and the conclusion check.
void write_replay(std::ostream& os, const CouplingInstance& inst);
CouplingInstance read_replay(std::istream& is);

}  // namespace cwbnlw
