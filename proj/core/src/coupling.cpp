#include "cwbnlw/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "cwbnlw/operator.hpp"
#include "cwbnlw/problem.hpp"

namespace cwbnlw {

int coupling_dist(const CouplingSite& a, const CouplingSite& b) {
    int s = 0;
    for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
    return s;
}

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double set_dist(const std::vector<CouplingSite>& sites, const std::vector<int>& A,
                const std::vector<int>& B) {
    int best = std::numeric_limits<int>::max();
    for (int a : A)
        for (int b : B) best = std::min(best, coupling_dist(sites[a], sites[b]));
    return static_cast<double>(best);
}

int set_diam(const std::vector<CouplingSite>& sites, const std::vector<int>& A) {
    int d = 0;
    for (std::size_t i = 0; i < A.size(); ++i)
        for (std::size_t j = i + 1; j < A.size(); ++j)
            d = std::max(d, coupling_dist(sites[A[i]], sites[A[j]]));
    return d;
}

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& M, const std::vector<int>& idx) {
    Eigen::MatrixXd out(idx.size(), idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < idx.size(); ++j) out(i, j) = M(idx[i], idx[j]);
    return out;
}

bool invert_block(const Eigen::MatrixXd& A, Eigen::MatrixXd& inv) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    if (!(lu.rcond() > 1e-14)) return false;
    inv = lu.inverse();
    return true;
}

std::vector<CouplingSite> lattice_ball(int dim, int radius) {
    std::vector<CouplingSite> out;
    std::vector<int> c(dim, 0);
    std::function<void(int, int)> walk = [&](int axis, int budget) {
        if (axis == dim) {
            out.push_back(c);
            return;
        }
        for (int v = -budget; v <= budget; ++v) {
            c[axis] = v;
            walk(axis + 1, budget - std::abs(v));
        }
        c[axis] = 0;
    };
    walk(0, radius);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

CouplingInstance gen_c1_instance(std::uint64_t seed, const C1Params& p) {
    const double Kc = std::pow(p.K, p.c);
    double B = p.B;
    if (B == 0.0) B = std::exp(Kc / 100.0) * 0.98;
    if (!(std::log(B) < Kc / 100.0))
        throw Error("precondition_violated", "gen_c1_instance: log B >= K^c / 100");

    const int L = p.length;
    const int iK = static_cast<int>(p.K);
    const int W = std::max(2 * iK + 2, static_cast<int>(p.C_prime * p.K) - 1);
    if (W >= L) throw std::invalid_argument("gen_c1_instance: window exceeds interval");

    std::mt19937_64 rng(seed);
    CouplingInstance inst;
    inst.lemma = "c1";
    inst.dim = 1;
    inst.seed = seed;
    inst.B = B;
    inst.K = p.K;
    inst.C = p.C;
    inst.C_prime = p.C_prime;
    inst.c = p.c;
    inst.sites.reserve(L);
    for (int i = 0; i < L; ++i) inst.sites.push_back({i});

    // Overlapping windows with stride W - 2K so every K-ball sits in one.
    const int stride = W - 2 * iK;
    for (int s = 0;; s += stride) {
        int lo = std::min(s, L - W);
        std::vector<int> win(W);
        for (int i = 0; i < W; ++i) win[i] = lo + i;
        inst.cover.push_back(std::move(win));
        if (lo == L - W) break;
    }

    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(L, L);
    for (int i = 0; i < L; ++i)
        for (int j = i + 1; j < L; ++j) {
            double mag = p.coupling_scale * (0.2 + 0.79 * uniform01(rng)) *
                         std::exp(-std::pow(static_cast<double>(j - i), p.c));
            double v = (uniform01(rng) < 0.5 ? -1.0 : 1.0) * mag;
            S(i, j) = S(j, i) = v;
        }
    Eigen::VectorXd sign(L), wob(L);
    for (int i = 0; i < L; ++i) {
        sign(i) = uniform01(rng) < 0.5 ? -1.0 : 1.0;
        wob(i) = 1.0 + 0.2 * uniform01(rng);
    }

    const double tail_bound = std::pow(p.K, -p.C);
    double shift = 1.0;
    for (int attempt = 0; attempt < p.max_attempts; ++attempt, shift *= 2.0) {
        Eigen::MatrixXd T = S;
        for (int i = 0; i < L; ++i) T(i, i) = sign(i) * shift * wob(i);
        bool ok = true;
        for (const auto& win : inst.cover) {
            Eigen::MatrixXd inv;
            if (!invert_block(submatrix(T, win), inv)) {
                ok = false;
                break;
            }
            for (std::size_t a = 0; a < win.size() && ok; ++a)
                for (std::size_t b = 0; b < win.size(); ++b) {
                    double e = std::abs(inv(a, b));
                    if (e >= 0.95 * B) {
                        ok = false;
                        break;
                    }
                    if (std::abs(win[a] - win[b]) > p.K / 100.0 && e >= 0.95 * tail_bound) {
                        ok = false;
                        break;
                    }
                }
            if (!ok) break;
        }
        if (ok) {
            inst.matrix = std::move(T);
            return inst;
        }
    }
    throw Error("instance_generation_failed", "gen_c1_instance: no admissible diagonal shift");
}

CouplingInstance gen_c2_instance(std::uint64_t seed, const C2Params& p) {
    std::mt19937_64 rng(seed);
    auto sites = lattice_ball(p.dim, p.radius);
    const int n = static_cast<int>(sites.size());
    const double diam_cap = std::pow(p.M, p.eps1);
    const double dist_floor = std::pow(p.M, p.eps2);

    for (int attempt = 0; attempt < p.max_attempts; ++attempt) {
        CouplingInstance inst;
        inst.lemma = "c2";
        inst.dim = p.dim;
        inst.seed = seed;
        inst.sites = sites;
        inst.eps1 = p.eps1;
        inst.eps2 = p.eps2;
        inst.eps3 = p.eps3;
        inst.eps = p.eps;
        inst.rho_diag = p.rho_diag;
        inst.M = p.M;
        inst.C = p.C;
        inst.c = 0.3;

        // Clusters: singletons (or adjacent pairs when the diameter cap
        // allows) placed with rejection until pairwise far.
        std::vector<int> taken;
        for (int k = 0; k < p.n_clusters; ++k) {
            for (int tries = 0; tries < 200; ++tries) {
                int cand = static_cast<int>(uniform01(rng) * n);
                cand = std::min(cand, n - 1);
                std::vector<int> cluster = {cand};
                if (diam_cap > 1.0 && uniform01(rng) < 0.5) {
                    for (int j = 0; j < n; ++j)
                        if (coupling_dist(sites[cand], sites[j]) == 1) {
                            cluster.push_back(j);
                            break;
                        }
                }
                bool far = true;
                for (const auto& other : inst.clusters)
                    if (set_dist(sites, cluster, other) <= dist_floor + 1.0) far = false;
                if (far) {
                    std::sort(cluster.begin(), cluster.end());
                    inst.clusters.push_back(std::move(cluster));
                    break;
                }
            }
        }
        if (static_cast<int>(inst.clusters.size()) != p.n_clusters) continue;
        for (const auto& cl : inst.clusters) taken.insert(taken.end(), cl.begin(), cl.end());

        Eigen::MatrixXd Sm = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                double mag = (0.1 + 0.8 * uniform01(rng)) *
                             std::exp(-std::pow(static_cast<double>(
                                                    coupling_dist(sites[i], sites[j])),
                                                inst.c));
                Sm(i, j) = Sm(j, i) = (uniform01(rng) < 0.5 ? -1.0 : 1.0) * mag;
            }
        double s_norm = operator_norm_2(Sm);
        double scale = 0.9 * p.eps / std::max(s_norm, 1.0);
        Sm *= scale;

        Eigen::MatrixXd T = Sm;
        for (int i = 0; i < n; ++i) {
            bool on_cluster = std::find(taken.begin(), taken.end(), i) != taken.end();
            double mag = on_cluster ? p.cluster_diag * (1.0 + uniform01(rng))
                                    : p.rho_diag * (1.1 + uniform01(rng));
            T(i, i) = (uniform01(rng) < 0.5 ? -1.0 : 1.0) * mag;
        }
        inst.matrix = std::move(T);
        if (audit_hypotheses(inst).pass) return inst;
    }
    throw Error("instance_generation_failed", "gen_c2_instance: hypotheses not met");
}

HypothesisReport audit_hypotheses(const CouplingInstance& inst) {
    HypothesisReport rep;
    auto fail = [&rep](const std::string& s) {
        rep.pass = false;
        rep.failures.push_back(s);
    };
    const int n = static_cast<int>(inst.sites.size());
    if (inst.matrix.rows() != n || inst.matrix.cols() != n) {
        fail("matrix/site size mismatch");
        return rep;
    }

    if (inst.lemma == "c1") {
        if (!(std::log(inst.B) < std::pow(inst.K, inst.c) / 100.0))
            fail("relation log B < K^c/100 fails");
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                double bound =
                    std::exp(-std::pow(static_cast<double>(
                                           coupling_dist(inst.sites[i], inst.sites[j])),
                                       inst.c));
                if (!(std::abs(inst.matrix(i, j)) < bound)) {
                    fail("off-diagonal decay of T fails");
                    i = n;
                    break;
                }
            }
        for (const auto& win : inst.cover)
            if (set_diam(inst.sites, win) >= inst.C_prime * inst.K) {
                fail("cover window diameter >= C' K");
                break;
            }
        // Every K-ball around a site must sit inside one cover window.
        for (int i = 0; i < n; ++i) {
            std::vector<int> ball;
            for (int j = 0; j < n; ++j)
                if (coupling_dist(inst.sites[i], inst.sites[j]) <= inst.K) ball.push_back(j);
            bool covered = false;
            for (const auto& win : inst.cover) {
                if (std::includes(win.begin(), win.end(), ball.begin(), ball.end())) {
                    covered = true;
                    break;
                }
            }
            if (!covered) {
                fail("K-ball not contained in any cover window");
                break;
            }
        }
        const double tail = std::pow(inst.K, -inst.C);
        for (const auto& win : inst.cover) {
            Eigen::MatrixXd inv;
            if (!invert_block(submatrix(inst.matrix, win), inv)) {
                fail("cover block numerically singular");
                break;
            }
            for (std::size_t a = 0; a < win.size(); ++a)
                for (std::size_t b = 0; b < win.size(); ++b) {
                    double e = std::abs(inv(a, b));
                    if (!(e < inst.B)) fail("block inverse entry >= B");
                    double sep = static_cast<double>(
                        coupling_dist(inst.sites[win[a]], inst.sites[win[b]]));
                    if (sep > inst.K / 100.0 && !(e < tail)) fail("block inverse K-tail fails");
                    if (!rep.pass) return rep;
                }
        }
        return rep;
    }

    if (inst.lemma == "c2") {
        if (!(inst.eps1 < 0.1 && inst.eps1 > inst.eps2 && inst.eps2 > inst.eps3 && inst.eps3 > 0))
            fail("need 1/10 > eps1 > eps2 > eps3 > 0");
        const double diam_cap = std::pow(inst.M, inst.eps1);
        const double dist_floor = std::pow(inst.M, inst.eps2);
        for (const auto& cl : inst.clusters)
            if (!(set_diam(inst.sites, cl) < diam_cap)) fail("cluster diameter >= M^eps1");
        for (std::size_t a = 0; a < inst.clusters.size(); ++a)
            for (std::size_t b = a + 1; b < inst.clusters.size(); ++b)
                if (!(set_dist(inst.sites, inst.clusters[a], inst.clusters[b]) > dist_floor))
                    fail("cluster pair distance <= M^eps2");

        Eigen::MatrixXd S = inst.matrix;
        for (int i = 0; i < n; ++i) S(i, i) = 0.0;
        if (!(operator_norm_2(S) < inst.eps)) fail("||S|| >= eps");
        for (int i = 0; i < n && rep.pass; ++i)
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                double bound = inst.eps * std::exp(-std::pow(static_cast<double>(coupling_dist(
                                                                 inst.sites[i], inst.sites[j])),
                                                             inst.c));
                if (!(std::abs(S(i, j)) < bound)) {
                    fail("entrywise decay of S fails");
                    break;
                }
            }
        if (!(inst.rho_diag > 20.0 * inst.eps)) fail("rho is not >> eps (need rho > 20 eps)");

        std::vector<char> on_cluster(n, 0);
        for (const auto& cl : inst.clusters)
            for (int i : cl) on_cluster[i] = 1;
        for (int i = 0; i < n; ++i)
            if (!on_cluster[i] && !(std::abs(inst.matrix(i, i)) > inst.rho_diag)) {
                fail("off-cluster diagonal <= rho");
                break;
            }

        const double nb_radius = std::pow(inst.M, inst.eps3);
        const double norm_cap = std::pow(inst.M, inst.C);
        for (const auto& cl : inst.clusters) {
            std::vector<int> nb;
            for (int i = 0; i < n; ++i) {
                for (int j : cl)
                    if (coupling_dist(inst.sites[i], inst.sites[j]) <= nb_radius) {
                        nb.push_back(i);
                        break;
                    }
            }
            Eigen::MatrixXd inv;
            if (!invert_block(submatrix(inst.matrix, nb), inv)) {
                fail("cluster neighborhood block singular");
                break;
            }
            if (!(operator_norm_2(inv) < norm_cap)) {
                fail("cluster neighborhood inverse norm >= M^C");
                break;
            }
        }
        return rep;
    }

    fail("unknown lemma tag: " + inst.lemma);
    return rep;
}

ConclusionReport verify_c1(const CouplingInstance& inst) {
    ConclusionReport rep;
    const int n = static_cast<int>(inst.sites.size());
    Eigen::MatrixXd inv;
    if (!invert_block(inst.matrix, inv)) {
        rep.pass = false;
        rep.failures.push_back("T_Omega numerically singular");
        return rep;
    }
    const double entry_bound = 2.0 * inst.B;
    const double sep_threshold =
        std::pow(100.0 * inst.C_prime * inst.K, 1.0 / (1.0 - inst.c));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double e = std::abs(inv(i, j));
            rep.worst_entry_margin = std::max(rep.worst_entry_margin, e / entry_bound);
            double sep = static_cast<double>(coupling_dist(inst.sites[i], inst.sites[j]));
            if (sep > sep_threshold) {
                ++rep.decay_pairs_checked;
                double bound = std::exp(-0.5 * std::pow(sep, inst.c));
                rep.worst_decay_margin = std::max(rep.worst_decay_margin, e / bound);
            }
        }
    if (rep.worst_entry_margin >= 1.0) {
        rep.pass = false;
        rep.failures.push_back("|T_Omega^-1| >= 2B somewhere");
    }
    if (rep.worst_decay_margin >= 1.0) {
        rep.pass = false;
        rep.failures.push_back("decay conclusion fails beyond the separation threshold");
    }
    return rep;
}

ConclusionReport verify_c2(const CouplingInstance& inst) {
    ConclusionReport rep;
    const int n = static_cast<int>(inst.sites.size());
    Eigen::MatrixXd inv;
    if (!invert_block(inst.matrix, inv)) {
        rep.pass = false;
        rep.failures.push_back("T|Omega numerically singular");
        return rep;
    }
    rep.norm_value = operator_norm_2(inv);
    rep.norm_bound = std::pow(inst.M, inst.C + 1.0) / inst.rho_diag;
    if (!(rep.norm_value < rep.norm_bound)) {
        rep.pass = false;
        rep.failures.push_back("||(T|Omega)^-1|| >= rho^-1 M^{C+1}");
    }
    const double sep_threshold = std::pow(inst.M, 2.0 * inst.eps1);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double sep = static_cast<double>(coupling_dist(inst.sites[i], inst.sites[j]));
            if (sep <= sep_threshold) continue;
            ++rep.decay_pairs_checked;
            double bound = std::exp(-0.1 * std::pow(sep, inst.c));
            rep.worst_decay_margin = std::max(rep.worst_decay_margin, std::abs(inv(i, j)) / bound);
        }
    if (rep.worst_decay_margin >= 1.0) {
        rep.pass = false;
        rep.failures.push_back("decay conclusion fails beyond M^{2 eps1}");
    }
    return rep;
}

namespace {

void write_doubles(std::ostream& os, const Eigen::MatrixXd& M) {
    os << "[";
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        if (i) os << ",";
        os << "[";
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            if (j) os << ",";
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", M(i, j));
            os << buf;
        }
        os << "]";
    }
    os << "]";
}

void write_int_lists(std::ostream& os, const std::vector<std::vector<int>>& lists) {
    os << "[";
    for (std::size_t i = 0; i < lists.size(); ++i) {
        if (i) os << ",";
        os << "[";
        for (std::size_t j = 0; j < lists[i].size(); ++j) {
            if (j) os << ",";
            os << lists[i][j];
        }
        os << "]";
    }
    os << "]";
}

void write_num(std::ostream& os, const char* key, double v, bool comma = true) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << "\"" << key << "\":" << buf << (comma ? "," : "");
}

}  // namespace

void write_replay(std::ostream& os, const CouplingInstance& inst) {
    os << "{\"lemma\":\"" << inst.lemma << "\",\"dim\":" << inst.dim
       << ",\"seed\":" << inst.seed << ",";
    write_num(os, "B", inst.B);
    write_num(os, "K", inst.K);
    write_num(os, "C", inst.C);
    write_num(os, "C_prime", inst.C_prime);
    write_num(os, "c", inst.c);
    write_num(os, "eps1", inst.eps1);
    write_num(os, "eps2", inst.eps2);
    write_num(os, "eps3", inst.eps3);
    write_num(os, "eps", inst.eps);
    write_num(os, "rho_diag", inst.rho_diag);
    write_num(os, "M", inst.M);
    os << "\"sites\":";
    write_int_lists(os, inst.sites);
    os << ",\"cover\":";
    write_int_lists(os, inst.cover);
    os << ",\"clusters\":";
    write_int_lists(os, inst.clusters);
    os << ",\"matrix\":";
    write_doubles(os, inst.matrix);
    os << "}\n";
}

CouplingInstance read_replay(std::istream& is) {
    nlohmann::json j;
    try {
        is >> j;
    } catch (const std::exception& e) {
        throw Error("bad_replay", e.what());
    }
    CouplingInstance inst;
    inst.lemma = j.at("lemma").get<std::string>();
    inst.dim = j.at("dim").get<int>();
    inst.seed = j.at("seed").get<std::uint64_t>();
    inst.B = j.at("B").get<double>();
    inst.K = j.at("K").get<double>();
    inst.C = j.at("C").get<double>();
    inst.C_prime = j.at("C_prime").get<double>();
    inst.c = j.at("c").get<double>();
    inst.eps1 = j.at("eps1").get<double>();
    inst.eps2 = j.at("eps2").get<double>();
    inst.eps3 = j.at("eps3").get<double>();
    inst.eps = j.at("eps").get<double>();
    inst.rho_diag = j.at("rho_diag").get<double>();
    inst.M = j.at("M").get<double>();
    for (const auto& s : j.at("sites")) inst.sites.push_back(s.get<CouplingSite>());
    for (const auto& s : j.at("cover")) inst.cover.push_back(s.get<std::vector<int>>());
    for (const auto& s : j.at("clusters")) inst.clusters.push_back(s.get<std::vector<int>>());
    auto rows = j.at("matrix");
    const int n = static_cast<int>(rows.size());
    inst.matrix.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) inst.matrix(i, k) = rows[i][k].get<double>();
    return inst;
}

}  // namespace cwbnlw
