#include "cwbnlw/operator.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>

namespace cwbnlw {

SiteBasis SiteBasis::ball(const ProblemParams& params, const ResonantSet& S, int N) {
    if (N < 2) throw std::invalid_argument("SiteBasis::ball: N must be >= 2");
    std::vector<LatticeIndex> sites;
    const int d = params.d;
    std::vector<int> m(d, 0);
    std::function<void(int, int)> walk = [&](int axis, int budget) {
        if (axis == d) {
            for (int n = -budget; n <= budget; ++n) {
                LatticeIndex xi(std::span<const int>(m.data(), static_cast<std::size_t>(d)), n);
                if (!S.contains(xi)) sites.push_back(xi);
            }
            return;
        }
        for (int v = -budget; v <= budget; ++v) {
            m[axis] = v;
            walk(axis + 1, budget - std::abs(v));
        }
        m[axis] = 0;
    };
    walk(0, N - 1);
    return from_sites(std::move(sites));
}

SiteBasis SiteBasis::from_sites(std::vector<LatticeIndex> sites) {
    std::sort(sites.begin(), sites.end());
    sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
    SiteBasis b;
    b.sites_ = std::move(sites);
    b.index_.reserve(b.sites_.size());
    for (int i = 0; i < static_cast<int>(b.sites_.size()); ++i) b.index_[b.sites_[i]] = i;
    return b;
}

namespace {

TruncatedOperator fill_operator(const FourierField& u_j, double lambda,
                                const ProblemParams& params, SiteBasis basis, int N,
                                OperatorKind kind, const AssembleOptions& opt) {
    if (basis.size() == 0) throw Error("empty_basis", "operator over an empty site set");
    TruncatedOperator op;
    op.kind = kind;
    op.params = params;
    op.lambda = lambda;
    op.N = N;

    // phi = 3 u_j^2; the Toeplitz part is phi^(xi - xi').
    FourierField usq = convolve(u_j, u_j, opt.field);
    FourierField phi(params.d);
    for (const auto& xi : usq.canonical_sites()) phi.set_pair(xi, 3.0 * usq.at(xi));
    op.phi = std::move(phi);

    const int n = basis.size();
    const double e2 = params.eps * params.eps;
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i) {
        const LatticeIndex& xi = basis.site(i);
        const double sym = fractional_symbol(xi, params.alpha);
        const double diag = params.linear_symbol(xi, lambda);
        for (int j = 0; j < n; ++j) {
            double toeplitz = op.phi.at(xi - basis.site(j));
            double v;
            if (kind == OperatorKind::T)
                v = e2 * sym * toeplitz;
            else
                v = e2 * toeplitz;
            if (i == j) v += (kind == OperatorKind::T) ? diag : diag / sym;
            A(i, j) = v;
        }
    }
    op.entries = std::move(A);
    op.basis = std::move(basis);
    return op;
}

}  // namespace

TruncatedOperator assemble(const FourierField& u_j, double lambda, const ProblemParams& params,
                           const ResonantSet& S, int N, OperatorKind kind,
                           const AssembleOptions& opt) {
    return fill_operator(u_j, lambda, params, SiteBasis::ball(params, S, N), N, kind, opt);
}

TruncatedOperator assemble_on_sites(const FourierField& u_j, double lambda,
                                    const ProblemParams& params, const SiteBasis& basis,
                                    OperatorKind kind, const AssembleOptions& opt) {
    int N = 2;
    for (const auto& xi : basis.sites()) N = std::max(N, xi.one_norm() + 1);
    return fill_operator(u_j, lambda, params, basis, N, kind, opt);
}

double operator_norm_2(const Eigen::MatrixXd& M, double tol, int max_iter) {
    const int n = static_cast<int>(M.cols());
    if (n == 0) return 0.0;
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = 1.0 + 0.5 * static_cast<double>(i) / (n + 1.0);
    v.normalize();
    double sigma = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        Eigen::VectorXd w = M * v;
        double s = w.norm();
        if (s == 0.0) return 0.0;
        Eigen::VectorXd u = M.transpose() * w;
        double nu = u.norm();
        if (nu == 0.0) return s;
        v = u / nu;
        if (std::abs(s - sigma) <= tol * std::max(1.0, s)) return s;
        sigma = s;
    }
    return sigma;
}

CertifiedInverse invert_with_certificate(const TruncatedOperator& op, double C2, double c,
                                         double cond_cap) {
    const int n = op.size();
    CertifiedInverse out;
    out.cert.N = op.N;
    out.cert.c = c;
    out.cert.C2 = C2;
    out.cert.l2_bound = std::exp(std::pow(std::log(static_cast<double>(op.N)), C2));

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(op.entries);
    double rc = lu.rcond();
    if (!(rc > 1.0 / cond_cap)) {
        out.inverse = Eigen::MatrixXd::Zero(n, n);
        out.cert.l2_norm = std::numeric_limits<double>::infinity();
        out.cert.offdiag_ok = false;
        out.cert.worst_ratio = std::numeric_limits<double>::infinity();
        return out;
    }
    out.inverse = lu.inverse();
    out.cert.l2_norm = operator_norm_2(out.inverse);

    const double sep_min = std::sqrt(static_cast<double>(op.N));
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            int sep = one_dist(op.basis.site(i), op.basis.site(j));
            if (sep <= sep_min) continue;
            double bound = std::exp(-0.5 * std::pow(static_cast<double>(sep), c));
            worst = std::max(worst, std::abs(out.inverse(i, j)) / bound);
        }
    out.cert.worst_ratio = worst;
    out.cert.offdiag_ok = worst < 1.0;
    return out;
}

std::pair<Eigen::MatrixXd, NeumannReport> neumann_invert(const TruncatedOperator& op, double gamma,
                                                         const NeumannOptions& opt) {
    if (op.kind != OperatorKind::T_tilde)
        throw std::invalid_argument("neumann_invert: requires the self-adjoint variant");
    const int n = op.size();
    const ProblemParams& P = op.params;
    const double C3 = 2.0 * P.d;
    const double N = static_cast<double>(op.N);
    NeumannReport rep;
    rep.diag_bound = 0.5 * gamma * std::pow(N, -2.0 * C3 - P.alpha);
    rep.smallness = P.eps * P.eps * std::pow(N, 4.0 * C3 + 2.0 * P.alpha + 2.0 * P.d);

    Eigen::VectorXd diag(n);
    double min_abs = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const LatticeIndex& xi = op.basis.site(i);
        diag(i) = P.linear_symbol(xi, op.lambda) / fractional_symbol(xi, P.alpha);
        min_abs = std::min(min_abs, std::abs(diag(i)));
    }
    rep.min_abs_diag = min_abs;
    if (!(min_abs > rep.diag_bound))
        throw Error("outside_perturbative_regime",
                    "diagonal lower bound fails: " + std::to_string(min_abs) + " <= " +
                        std::to_string(rep.diag_bound));
    if (!(rep.smallness < 0.5))
        throw Error("outside_perturbative_regime",
                    "eps^2 N^{4C3+2alpha+2d} = " + std::to_string(rep.smallness) + " >= 1/2");

    Eigen::MatrixXd S(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) S(i, j) = op.phi.at(op.basis.site(i) - op.basis.site(j));
    Eigen::VectorXd dinv = diag.cwiseInverse();
    const double e2 = P.eps * P.eps;

    Eigen::MatrixXd X = dinv.asDiagonal();
    Eigen::MatrixXd term = X;
    rep.converged = false;
    for (int k = 1; k <= opt.max_terms; ++k) {
        term = -e2 * (dinv.asDiagonal() * (S * term));
        X += term;
        rep.terms = k;
        if (term.norm() < opt.term_floor) {
            rep.converged = true;
            break;
        }
    }

    rep.norm_value = operator_norm_2(X);
    rep.norm_bound = (4.0 / gamma) * std::pow(N, 2.0 * C3 + P.alpha);
    rep.norm_ok = rep.norm_value < rep.norm_bound;

    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            int sep = one_dist(op.basis.site(i), op.basis.site(j));
            double bound = std::exp(-opt.decay_slack * std::pow(static_cast<double>(sep), opt.c));
            worst = std::max(worst, std::abs(X(i, j)) / bound);
        }
    rep.worst_decay_ratio = worst;
    rep.decay_ok = worst < 1.0;
    return {std::move(X), rep};
}

std::vector<double> offdiag_decay_profile(const Eigen::MatrixXd& M, const SiteBasis& basis) {
    const int n = basis.size();
    int max_sep = 0;
    for (int i = 0; i < n; ++i)
        max_sep = std::max(max_sep, one_dist(basis.site(0), basis.site(i)));
    // Conservative upper bound on the diameter; grown on demand below.
    std::vector<double> prof(static_cast<std::size_t>(2 * max_sep + 1), 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            int sep = one_dist(basis.site(i), basis.site(j));
            if (sep >= static_cast<int>(prof.size())) prof.resize(sep + 1, 0.0);
            prof[sep] = std::max(prof[sep], std::abs(M(i, j)));
        }
    while (prof.size() > 1 && prof.back() == 0.0) prof.pop_back();
    return prof;
}

FourierField apply_operator(const FourierField& phi, double lambda, const ProblemParams& params,
                            const ResonantSet& S, const FourierField& f, OperatorKind kind,
                            const FieldOptions& opt) {
    FourierField fp = project_P(f, S.sites);
    FourierField conv = phi.empty() ? FourierField(params.d) : convolve(phi, fp, opt);
    const double e2 = params.eps * params.eps;
    FourierField out(params.d);
    auto emit = [&](const LatticeIndex& xi) {
        if (!xi.is_canonical() || S.contains(xi) || S.contains(-xi)) return;
        double sym = fractional_symbol(xi, params.alpha);
        double diag = params.linear_symbol(xi, lambda);
        double v;
        if (kind == OperatorKind::T)
            v = diag * fp.at(xi) + e2 * sym * conv.at(xi);
        else
            v = diag / sym * fp.at(xi) + e2 * conv.at(xi);
        if (v != 0.0) out.set_pair(xi, v);
    };
    for (const auto& xi : fp.canonical_sites()) emit(xi);
    for (const auto& xi : conv.canonical_sites())
        if (fp.at(xi) == 0.0) emit(xi);
    return out;
}

namespace {
constexpr char kDumpMagic[8] = {'C', 'W', 'B', 'O', 'P', 'D', 'M', 'P'};
}

void dump_matrix(std::ostream& os, const Eigen::MatrixXd& M, int kind, int N) {
    os.write(kDumpMagic, 8);
    std::int32_t header[4] = {1, static_cast<std::int32_t>(kind), static_cast<std::int32_t>(N),
                              static_cast<std::int32_t>(M.rows())};
    os.write(reinterpret_cast<const char*>(header), sizeof(header));
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            double v = M(i, j);
            os.write(reinterpret_cast<const char*>(&v), sizeof(v));
        }
}

Eigen::MatrixXd load_matrix(std::istream& is, int* kind, int* N) {
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kDumpMagic, 8) != 0)
        throw Error("bad_dump", "matrix dump magic mismatch");
    std::int32_t header[4];
    is.read(reinterpret_cast<char*>(header), sizeof(header));
    if (!is || header[0] != 1) throw Error("bad_dump", "unsupported dump version");
    if (kind) *kind = header[1];
    if (N) *N = header[2];
    const int n = header[3];
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double v;
            is.read(reinterpret_cast<char*>(&v), sizeof(v));
            M(i, j) = v;
        }
    if (!is) throw Error("bad_dump", "truncated matrix dump");
    return M;
}

}  // namespace cwbnlw
