#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "cwbnlw/fourier_field.hpp"
#include "cwbnlw/lattice.hpp"

namespace cwbnlw {

/// Error with a stable machine-readable kind string ("support_exceeded",
/// "certificate_failed", "outside_perturbative_regime", ...).
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& detail)
        : std::runtime_error(detail.empty() ? kind : kind + ": " + detail),
          kind_(std::move(kind)) {}
    explicit Error(std::string kind) : Error(std::move(kind), "") {}
    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

struct ProblemParams {
    int d = 1;
    std::vector<int> m0 = {1};
    double rho = std::sqrt(2.0);
    double alpha = 0.05;
    double eps = 1e-3;
    /// lambda0 = sqrt(|m0|^2 + rho), stored once so lambda0^2 - |m0|^2 - rho
    /// is exactly zero and never drifts.
    double lambda0 = 0.0;

    static ProblemParams make(int d, std::vector<int> m0, double rho, double alpha, double eps);

    std::int64_t m0_norm2() const {
        std::int64_t s = 0;
        for (int v : m0) s += static_cast<std::int64_t>(v) * v;
        return s;
    }

    LatticeIndex m0_site() const { return LatticeIndex(std::span<const int>(m0), 1); }

    /// <m0>^alpha
    double m0_symbol() const {
        return std::pow(std::sqrt(static_cast<double>(m0_norm2()) + 1.0), alpha);
    }

    /// mu_m^2 = |m|^2 + rho
    double mu2(const LatticeIndex& xi) const {
        return static_cast<double>(xi.spatial_norm2()) + rho;
    }

    /// Linear symbol -(n lambda)^2 + mu_m^2 at frequency lambda.
    double linear_symbol(const LatticeIndex& xi, double lambda) const {
        double nl = xi.n() * lambda;
        return -nl * nl + mu2(xi);
    }
};

/// The resonant set S = {(m, n) : |m| = |m0|, n = +-1} together with the
/// count b of spatial modes on the sphere |m| = |m0| and the list of
/// representatives (m, 1) used to index the Q-variables.
struct ResonantSet {
    SiteSet sites;
    int b = 0;
    /// All (m, 1) with |m| = |m0|, sorted; splus.front() is not necessarily m0.
    std::vector<LatticeIndex> splus;
    /// Positions in splus: index of (m0, 1) and of the remaining modes.
    int m0_pos = 0;
    std::vector<int> other_pos;

    bool contains(const LatticeIndex& xi) const { return sites.count(xi) > 0; }
};

ResonantSet resonant_set(const ProblemParams& params);

/// Q-variables: the amplitude p0 at m0 and p_m at the remaining resonant
/// modes, ordered as ResonantSet::other_pos.
struct Amplitudes {
    double p0 = 1.0;
    std::vector<double> pm;
};

/// u0 = p0 cos(m0 x + theta) + sum p_m cos(m x + theta): coefficients p/2 on
/// the corresponding pairs of S.
FourierField build_seed_field(const ProblemParams& params, const ResonantSet& S,
                              const Amplitudes& amp);

}  // namespace cwbnlw
