#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "cwbnlw/fourier_field.hpp"
#include "cwbnlw/problem.hpp"

namespace cwbnlw {

/// Ordered list of non-resonant sites, closed under xi -> -xi, with an
/// inverse site -> row map. Rows are sorted lexicographically so every
/// assembled matrix has a reproducible layout.
class SiteBasis {
public:
    SiteBasis() = default;

    /// All sites with |xi|_1 < N, excluding S.
    static SiteBasis ball(const ProblemParams& params, const ResonantSet& S, int N);

    /// Explicit site list (used for cluster operators); sites must avoid S.
    static SiteBasis from_sites(std::vector<LatticeIndex> sites);

    int size() const { return static_cast<int>(sites_.size()); }
    const LatticeIndex& site(int i) const { return sites_[i]; }
    const std::vector<LatticeIndex>& sites() const { return sites_; }

    std::optional<int> index_of(const LatticeIndex& xi) const {
        auto it = index_.find(xi);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

private:
    std::vector<LatticeIndex> sites_;
    std::unordered_map<LatticeIndex, int, LatticeIndexHash> index_;
};

enum class OperatorKind { T, T_tilde };

/// Dense realization of T_{j,N} = R_P (D + eps^2 Lambda S_phi) R_P or of its
/// self-adjoint variant T~_{j,N} = R_P (D~ + eps^2 S_phi) R_P over a finite
/// site basis, phi = 3 u_j^2.
struct TruncatedOperator {
    SiteBasis basis;
    Eigen::MatrixXd entries;
    OperatorKind kind = OperatorKind::T_tilde;
    ProblemParams params;
    double lambda = 0.0;
    int N = 0;
    FourierField phi;  // 3 u_j^2

    int size() const { return basis.size(); }
};

/// Pass/fail record for the two inversion conditions at scale N: the l^2
/// bound ||T~^-1|| < exp((log N)^C2) and the off-diagonal decay
/// |T~^-1(xi,xi')| < e^{-|xi-xi'|_1^c / 2} for |xi-xi'|_1 > sqrt(N).
struct InverseCertificate {
    double l2_norm = 0.0;
    double l2_bound = 0.0;
    bool offdiag_ok = true;
    double worst_ratio = 0.0;  // max |entry| / bound over checked pairs
    int N = 0;
    double c = 0.0;
    double C2 = 0.0;

    bool pass() const { return l2_norm < l2_bound && offdiag_ok; }
};

struct AssembleOptions {
    FieldOptions field;
};

/// Assemble T or T~ at frequency lambda from the current approximation u_j.
/// Requires N >= 2 and a nonempty basis.
TruncatedOperator assemble(const FourierField& u_j, double lambda, const ProblemParams& params,
                           const ResonantSet& S, int N, OperatorKind kind,
                           const AssembleOptions& opt = {});

/// Same matrix on an explicit site set (cluster restriction).
TruncatedOperator assemble_on_sites(const FourierField& u_j, double lambda,
                                    const ProblemParams& params, const SiteBasis& basis,
                                    OperatorKind kind, const AssembleOptions& opt = {});

struct CertifiedInverse {
    Eigen::MatrixXd inverse;
    InverseCertificate cert;
};

/// Dense pivoted factorization of T~ plus the certificate checks. Never
/// throws on a failed certificate; a numerically singular matrix yields
/// l2_norm = +inf.
CertifiedInverse invert_with_certificate(const TruncatedOperator& op, double C2, double c,
                                         double cond_cap = 1e14);

struct NeumannReport {
    int terms = 0;
    bool converged = true;
    double min_abs_diag = 0.0;
    double diag_bound = 0.0;      // (gamma/2) N^{-2 C3 - alpha}
    double smallness = 0.0;       // eps^2 N^{4 C3 + 2 alpha + 2 d}
    double norm_value = 0.0;
    double norm_bound = 0.0;      // (4/gamma) N^{2 C3 + alpha}
    bool norm_ok = false;
    double worst_decay_ratio = 0.0;
    bool decay_ok = false;        // vs e^{-slack |xi-xi'|_1^c}
};

struct NeumannOptions {
    double term_floor = 1e-16;
    int max_terms = 200;
    double decay_slack = 0.9;
    double c = 0.04;
};

/// Perturbative inverse by the geometric series around the diagonal,
/// valid when |D~| > (gamma/2) N^{-2C3-alpha} (C3 = 2d) and
/// eps^2 N^{4C3+2alpha+2d} < 1/2; throws "outside_perturbative_regime"
/// otherwise. The report records the l^2 bound and entrywise decay checks.
std::pair<Eigen::MatrixXd, NeumannReport> neumann_invert(const TruncatedOperator& op, double gamma,
                                                         const NeumannOptions& opt = {});

/// For each l^1 separation s, the maximum |M(i,j)| over pairs at that
/// separation. Entry 0 of the result is the diagonal maximum.
std::vector<double> offdiag_decay_profile(const Eigen::MatrixXd& M, const SiteBasis& basis);

/// Largest singular value via power iteration on M M^T (tolerance 1e-10).
double operator_norm_2(const Eigen::MatrixXd& M, double tol = 1e-10, int max_iter = 1000);

/// Apply the untruncated operator of `kind` to a field: diagonal symbol plus
/// eps^2 (Lambda) S_phi acting by convolution, restricted off S.
FourierField apply_operator(const FourierField& phi, double lambda, const ProblemParams& params,
                            const ResonantSet& S, const FourierField& f, OperatorKind kind,
                            const FieldOptions& opt = {});

/// Row-major binary dump: magic "CWBOPDMP", version, kind, N, size, then
/// size*size doubles. `kind` 0 = T, 1 = T_tilde, 2 = inverse.
void dump_matrix(std::ostream& os, const Eigen::MatrixXd& M, int kind, int N);
Eigen::MatrixXd load_matrix(std::istream& is, int* kind = nullptr, int* N = nullptr);

}  // namespace cwbnlw
