#pragma once

#include <cstdint>
#include <vector>

#include "cwbnlw/operator.hpp"
#include "cwbnlw/problem.hpp"

namespace cwbnlw {

/// A connected component Omega_beta of the singular set under hops of
/// l^1 length < gap.
struct SingularCluster {
    std::vector<LatticeIndex> sites;
    int diameter = 0;      // max pairwise l^1 distance
    int min_abs_n = 0;
    int min_one_norm = 0;  // distance of the cluster from the origin
    int id = 0;
};

/// All sites with |xi|_1 <= N and |-n^2 lambda^2 + |m|^2| < B, enumerated
/// per temporal mode over the spatial annulus |m|^2 in (n^2 lambda^2 - B,
/// n^2 lambda^2 + B).
std::vector<LatticeIndex> singular_sites(double lambda, int N, double B, int d);

/// Connected components of the graph joining sites at l^1 distance < gap.
/// Components are pairwise separated by >= gap and their union is the input.
std::vector<SingularCluster> cluster_decompose(const std::vector<LatticeIndex>& sites, double gap);

struct ChainReport {
    int k_max = 0;
    std::vector<LatticeIndex> chain;
    bool exact = true;       // false when the DFS budget was exhausted
    bool gdc_pass = true;    // hypothesis check on lambda'
    std::int64_t nodes_visited = 0;
};

struct ChainOptions {
    double sigma = 0.0;       // shift in the singularity inequality
    int search_radius = 64;   // temporal extent of the enumerated region
    std::int64_t dfs_budget = 1'000'000;
    /// gDC budget for the hypothesis check on lambda': |P| > B^{-C'} over
    /// polynomials of the given degree and coefficient size.
    int gdc_degree = 5;
    std::int64_t gdc_coeff_bound = 10;
    double gdc_Cprime = 4.0;
};

/// Longest chain of distinct sites xi_j with |(lambda' n_j + sigma)^2 -
/// |m_j|^2| < B, consecutive l^1 distance < B and at most B' elements per
/// spatial mode m, found by bounded DFS. Results under the budget are exact
/// maxima for the enumerated region; otherwise a flagged lower bound.
ChainReport max_chain_length(double lambda_prime, double B, double B_prime, int d,
                             const ChainOptions& opt = {});

struct EigenVariation {
    std::vector<double> finite_difference;   // (E(l+delta) - E(l-delta)) / 2 delta
    std::vector<double> first_order;         // <psi_s, dT~/dlambda psi_s>
    double max_rel_mismatch = 0.0;
    double min_abs_derivative = 0.0;
    bool degenerate = false;                 // eigenvalue gap below resolution
};

/// Eigenvalue variation of a cluster operator: centered differences at
/// lambda +- delta against first-order perturbation values with the frozen-u
/// diagonal derivative diag(-2 n^2 lambda / <m>^alpha).
EigenVariation cluster_eigen_variation(const FourierField& u_j, double lambda,
                                       const ProblemParams& params, const SiteBasis& cluster_basis,
                                       double delta, const AssembleOptions& opt = {});

/// The N^{alpha/2}-neighborhood of a cluster within |xi|_1 <= N, avoiding S.
SiteBasis cluster_neighborhood(const SingularCluster& cluster, double radius, int N,
                               const ResonantSet& S);

}  // namespace cwbnlw
