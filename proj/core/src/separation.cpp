#include "cwbnlw/separation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "cwbnlw/diophantine.hpp"

namespace cwbnlw {

namespace {

/// Spatial modes m with |m|^2 in (lo, hi) and |m|_1 <= l1_budget.
void annulus_modes(int d, double lo, double hi, int l1_budget,
                   const std::function<void(std::span<const int>)>& emit) {
    if (hi <= 0.0 && !(lo < 0.0)) return;
    std::vector<int> m(d, 0);
    std::function<void(int, double, double, int)> walk = [&](int axis, double rlo, double rhi,
                                                             int budget) {
        if (axis == d - 1) {
            int cap = std::min(budget, static_cast<int>(std::floor(std::sqrt(std::max(rhi, 0.0)))));
            for (int v = -cap; v <= cap; ++v) {
                double sq = static_cast<double>(v) * v;
                if (sq > rlo && sq < rhi) {
                    m[axis] = v;
                    emit(std::span<const int>(m.data(), static_cast<std::size_t>(d)));
                }
            }
            m[axis] = 0;
            return;
        }
        int cap = std::min(budget, static_cast<int>(std::floor(std::sqrt(std::max(rhi, 0.0)))));
        for (int v = -cap; v <= cap; ++v) {
            double sq = static_cast<double>(v) * v;
            m[axis] = v;
            walk(axis + 1, rlo - sq, rhi - sq, budget - std::abs(v));
        }
        m[axis] = 0;
    };
    walk(0, lo, hi, l1_budget);
}

double euclid2(const LatticeIndex& a, const LatticeIndex& b) {
    LatticeIndex d = a - b;
    std::int64_t s = d.spatial_norm2() + static_cast<std::int64_t>(d.n()) * d.n();
    return static_cast<double>(s);
}

}  // namespace

std::vector<LatticeIndex> singular_sites(double lambda, int N, double B, int d) {
    if (N < 1 || !(B > 0.0)) throw std::invalid_argument("singular_sites: need N >= 1, B > 0");
    std::vector<LatticeIndex> out;
    for (int n = -N; n <= N; ++n) {
        double target = static_cast<double>(n) * n * lambda * lambda;
        int budget = N - std::abs(n);
        if (budget < 0) continue;
        annulus_modes(d, target - B, target + B, budget, [&](std::span<const int> m) {
            out.emplace_back(m, n);
        });
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<SingularCluster> cluster_decompose(const std::vector<LatticeIndex>& sites,
                                               double gap) {
    if (!(gap > 0.0)) throw std::invalid_argument("cluster_decompose: gap > 0");
    const int n = static_cast<int>(sites.size());
    std::vector<int> parent(n);
    for (int i = 0; i < n; ++i) parent[i] = i;
    std::function<int(int)> find = [&](int i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (static_cast<double>(one_dist(sites[i], sites[j])) < gap) {
                int a = find(i), b = find(j);
                if (a != b) parent[std::max(a, b)] = std::min(a, b);
            }

    std::unordered_map<int, std::vector<int>> groups;
    for (int i = 0; i < n; ++i) groups[find(i)].push_back(i);
    std::vector<int> roots;
    for (auto& [r, g] : groups) roots.push_back(r);
    std::sort(roots.begin(), roots.end());

    std::vector<SingularCluster> out;
    out.reserve(roots.size());
    int id = 0;
    for (int r : roots) {
        SingularCluster c;
        c.id = id++;
        c.min_abs_n = std::numeric_limits<int>::max();
        c.min_one_norm = std::numeric_limits<int>::max();
        for (int i : groups[r]) {
            c.sites.push_back(sites[i]);
            c.min_abs_n = std::min(c.min_abs_n, std::abs(sites[i].n()));
            c.min_one_norm = std::min(c.min_one_norm, sites[i].one_norm());
        }
        for (std::size_t a = 0; a < c.sites.size(); ++a)
            for (std::size_t b = a + 1; b < c.sites.size(); ++b)
                c.diameter = std::max(c.diameter, one_dist(c.sites[a], c.sites[b]));
        out.push_back(std::move(c));
    }
    return out;
}

ChainReport max_chain_length(double lambda_prime, double B, double B_prime, int d,
                             const ChainOptions& opt) {
    ChainReport rep;

    GdcSpec spec;
    spec.b_tilde = 1;
    spec.degree = opt.gdc_degree;
    spec.coeff_bound = opt.gdc_coeff_bound;
    spec.gamma = std::pow(B, -opt.gdc_Cprime);
    spec.tau = 0.0;
    rep.gdc_pass = check_gdc_poly({lambda_prime}, spec).pass;

    // Candidate sites: |(lambda' n + sigma)^2 - |m|^2| < B within the search
    // region, hops measured in the Euclidean metric of the lemma.
    std::vector<LatticeIndex> sites;
    for (int n = -opt.search_radius; n <= opt.search_radius; ++n) {
        double base = lambda_prime * n + opt.sigma;
        double target = base * base;
        int budget = static_cast<int>(std::ceil(std::sqrt(d * (target + B)))) + 1;
        annulus_modes(d, target - B, target + B, budget, [&](std::span<const int> m) {
            sites.emplace_back(m, n);
        });
    }
    std::sort(sites.begin(), sites.end());
    sites.erase(std::unique(sites.begin(), sites.end()), sites.end());

    const int ns = static_cast<int>(sites.size());
    const double B2 = B * B;
    std::vector<std::vector<int>> adj(ns);
    for (int i = 0; i < ns; ++i)
        for (int j = i + 1; j < ns; ++j)
            if (euclid2(sites[i], sites[j]) < B2) {
                adj[i].push_back(j);
                adj[j].push_back(i);
            }

    // Per-spatial-mode multiplicity cap from the lemma hypothesis. The cap is
    // taken non-strict (count <= B') so B' = 1 still admits single-site
    // chains; the resulting family is a superset of the lemma's, which only
    // strengthens the k < (BB')^{C''} check.
    auto spatial_key = [&](int i) {
        LatticeIndex xi = sites[i];
        return std::vector<int>(xi.m().begin(), xi.m().end());
    };
    std::map<std::vector<int>, int> mult;
    std::vector<char> used(ns, 0);
    std::vector<int> path, best;
    std::int64_t visited = 0;
    bool exhausted = false;

    std::function<void(int)> dfs = [&](int i) {
        if (exhausted) return;
        if (++visited > opt.dfs_budget) {
            exhausted = true;
            return;
        }
        used[i] = 1;
        auto key = spatial_key(i);
        ++mult[key];
        path.push_back(i);
        if (path.size() > best.size()) best = path;
        for (int j : adj[i]) {
            if (used[j]) continue;
            if (static_cast<double>(mult[spatial_key(j)] + 1) > B_prime) continue;
            dfs(j);
            if (exhausted) break;
        }
        path.pop_back();
        --mult[key];
        used[i] = 0;
    };
    if (B_prime >= 1.0)
        for (int i = 0; i < ns && !exhausted; ++i) dfs(i);

    rep.exact = !exhausted;
    rep.nodes_visited = visited;
    rep.k_max = static_cast<int>(best.size());
    rep.chain.reserve(best.size());
    for (int i : best) rep.chain.push_back(sites[i]);
    return rep;
}

SiteBasis cluster_neighborhood(const SingularCluster& cluster, double radius, int N,
                               const ResonantSet& S) {
    const int r = static_cast<int>(std::floor(radius));
    SiteSet acc;
    for (const auto& site : cluster.sites) {
        const int d = site.dim();
        std::vector<int> off(d + 1, 0);
        std::function<void(int, int)> walk = [&](int axis, int budget) {
            if (axis == d + 1) {
                std::vector<int> m(d);
                for (int k = 0; k < d; ++k) m[k] = site.m(k) + off[k];
                LatticeIndex xi(std::span<const int>(m.data(), static_cast<std::size_t>(d)),
                                site.n() + off[d]);
                if (xi.one_norm() <= N && !S.contains(xi)) acc.insert(xi);
                return;
            }
            for (int v = -budget; v <= budget; ++v) {
                off[axis] = v;
                walk(axis + 1, budget - std::abs(v));
            }
            off[axis] = 0;
        };
        walk(0, r);
    }
    std::vector<LatticeIndex> sites(acc.begin(), acc.end());
    return SiteBasis::from_sites(std::move(sites));
}

EigenVariation cluster_eigen_variation(const FourierField& u_j, double lambda,
                                       const ProblemParams& params, const SiteBasis& cluster_basis,
                                       double delta, const AssembleOptions& opt) {
    auto spectrum = [&](double l) {
        TruncatedOperator op = assemble_on_sites(u_j, l, params, cluster_basis,
                                                 OperatorKind::T_tilde, opt);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.entries);
        if (es.info() != Eigen::Success) throw Error("eigen_failure", "cluster eigensolve failed");
        return es;
    };
    auto mid = spectrum(lambda);
    auto plus = spectrum(lambda + delta);
    auto minus = spectrum(lambda - delta);

    const int n = cluster_basis.size();
    EigenVariation out;
    out.finite_difference.resize(n);
    out.first_order.resize(n);

    double scale = std::max(1.0, mid.eigenvalues().cwiseAbs().maxCoeff());
    for (int s = 0; s + 1 < n; ++s)
        if (mid.eigenvalues()(s + 1) - mid.eigenvalues()(s) < 1e-8 * scale) out.degenerate = true;

    out.min_abs_derivative = std::numeric_limits<double>::infinity();
    for (int s = 0; s < n; ++s) {
        double fd = (plus.eigenvalues()(s) - minus.eigenvalues()(s)) / (2.0 * delta);
        out.finite_difference[s] = fd;
        double fo = 0.0;
        for (int i = 0; i < n; ++i) {
            const LatticeIndex& xi = cluster_basis.site(i);
            double diag_deriv = -2.0 * static_cast<double>(xi.n()) * xi.n() * lambda /
                                fractional_symbol(xi, params.alpha);
            double psi = mid.eigenvectors()(i, s);
            fo += psi * psi * diag_deriv;
        }
        out.first_order[s] = fo;
        out.min_abs_derivative = std::min(out.min_abs_derivative, std::abs(fd));
        if (!out.degenerate) {
            double mism = std::abs(fd - fo) / std::max({std::abs(fd), std::abs(fo), 1e-300});
            out.max_rel_mismatch = std::max(out.max_rel_mismatch, mism);
        }
    }
    return out;
}

}  // namespace cwbnlw
