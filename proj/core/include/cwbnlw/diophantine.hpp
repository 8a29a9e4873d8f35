#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cwbnlw/problem.hpp"

namespace cwbnlw {

/// Generalized Diophantine condition gDC_{b~, degree, gamma, tau}:
/// |P(x)| > gamma (sum |a_k|)^-tau for every nonzero integer-coefficient
/// polynomial of degree <= `degree` with |a|_1 <= coeff_bound.
struct GdcSpec {
    int b_tilde = 1;
    int degree = 4;
    double gamma = 1e-3;
    double tau = 10.0;
    /// The M of gDC_M; 0 means "no bound" (only meaningful with a budget).
    std::int64_t coeff_bound = 20;

    void validate() const;
};

struct RhoWitness {
    bool pass = true;
    std::int64_t n = 0;
    std::int64_t k = 0;
    double value = 0.0;   // |n rho - k|
    double scaled = 0.0;  // |n rho - k| |n|^{2d}
};

/// Exhaustive check of |n rho - k| > gamma |n|^{-2d} for 1 <= |n| <= n_max,
/// k the nearest integer. Returns the minimizing witness of the scaled gap.
RhoWitness check_rho_condition(double rho, double gamma, std::int64_t n_max, int d);

struct GdcWitness {
    bool pass = true;
    bool exhaustive = true;          // false when the budget truncated the scan
    std::vector<std::int64_t> coeffs;  // flat coefficient vector of the worst P
    std::vector<int> exponents;        // per-variable exponents (b_tilde > 1)
    double value = 0.0;                // |P(x)|
    double threshold = 0.0;            // gamma (sum|a|)^-tau
    double ratio = 0.0;                // value / threshold; worst = smallest
};

/// Enumerate integer coefficient vectors with |a|_1 <= coeff_bound (scalar
/// case: dense polynomials of degree <= spec.degree; vector case: monomials
/// of total degree <= spec.degree) and check the gDC inequality at x.
/// `budget` caps the number of polynomials visited; exceeding it yields a
/// partial result flagged non-exhaustive.
GdcWitness check_gdc_poly(const std::vector<double>& x, const GdcSpec& spec,
                          std::int64_t budget = 50'000'000);

/// min over admissible P of |P(x)| (sum|a|)^tau. The excluded set at level
/// gamma is exactly {x : q(x) <= gamma}, which makes the Monte Carlo scan
/// below monotone in gamma by construction.
double gdc_quality(const std::vector<double>& x, const GdcSpec& spec,
                   std::int64_t budget = 50'000'000);

struct MeasureEstimate {
    double gamma = 0.0;
    double fraction = 0.0;      // Monte Carlo excluded fraction
    double envelope = 0.0;      // gamma^{1/(b~ degree)}
    double implied_C = 0.0;     // fraction / envelope
    std::int64_t samples = 0;
};

/// Monte Carlo estimate of the excluded fraction on `interval` for each
/// gamma in the grid, sharing one quality scan per sample point.
std::vector<MeasureEstimate> excluded_measure_estimate(const GdcSpec& spec,
                                                       const std::vector<double>& gammas,
                                                       double lo, double hi,
                                                       std::int64_t samples, std::uint64_t seed);

/// Measure of {t in [lo, hi] : |P(t)| < eps} by adaptive subdivision with
/// interval bounds, accurate to `tol`. Coefficients in increasing degree.
double sublevel_measure_bruteforce(const std::vector<std::int64_t>& poly, double eps, double lo,
                                   double hi, double tol = 1e-7);

}  // namespace cwbnlw
