#include "cwbnlw/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cwbnlw/coupling.hpp"
#include "cwbnlw/diophantine.hpp"
#include "cwbnlw/separation.hpp"

namespace cwbnlw {

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_artifact_header(std::ostream& os, const RunConfig& config, char comment) {
    os << comment << " " << kVersionString << "\n";
    os << comment << " config_hash=" << config.config_hash << "\n";
    os << comment << " mode=" << mode_name(config.mode) << "\n";
    for (const auto& w : config.warnings) os << comment << " warning: " << w << "\n";
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    if (threads <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    auto worker = [&] {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= n) return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    int nt = std::min(threads, n);
    pool.reserve(nt);
    for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

void write_field_json(std::ostream& os, const FourierField& f) {
    os << "{\"d\":" << f.dim() << ",\"support_radius\":" << f.support_radius() << ",\"coeffs\":[";
    bool first = true;
    for (const auto& xi : f.canonical_sites()) {
        if (!first) os << ",";
        first = false;
        os << "{\"m\":[";
        for (int k = 0; k < xi.dim(); ++k) {
            if (k) os << ",";
            os << xi.m(k);
        }
        os << "],\"n\":" << xi.n() << ",\"value\":" << format_g17(f.at(xi)) << "}";
    }
    os << "]}";
}

FourierField read_field_json(std::istream& is) {
    nlohmann::json j;
    is >> j;
    FourierField f(j.at("d").get<int>());
    for (const auto& rec : j.at("coeffs")) {
        std::vector<int> m = rec.at("m").get<std::vector<int>>();
        LatticeIndex xi(std::span<const int>(m.data(), m.size()), rec.at("n").get<int>());
        f.set_pair(xi, rec.at("value").get<double>());
    }
    return f;
}

void write_solution_bundle(std::ostream& os, const RunConfig& config, const CoupledResult& r,
                           const ResidualReport& audit) {
    os << "{\"version\":\"" << kVersionString << "\",\"config_hash\":\"" << config.config_hash
       << "\",";
    os << "\"problem\":{\"d\":" << config.problem.d << ",\"m0\":[";
    for (std::size_t k = 0; k < config.problem.m0.size(); ++k) {
        if (k) os << ",";
        os << config.problem.m0[k];
    }
    os << "],\"rho\":" << format_g17(config.problem.rho)
       << ",\"alpha\":" << format_g17(config.problem.alpha)
       << ",\"eps\":" << format_g17(config.problem.eps)
       << ",\"lambda0\":" << format_g17(config.problem.lambda0) << "},";
    os << "\"status\":\""
       << (r.status == CoupledStatus::converged
               ? "converged"
               : (r.status == CoupledStatus::excluded_parameter ? "excluded" : "no_convergence"))
       << "\",";
    if (!r.exclusion_reason.empty()) os << "\"exclusion_reason\":\"" << r.exclusion_reason << "\",";
    os << "\"lambda\":" << format_g17(r.q.lambda) << ",\"sigma\":" << format_g17(r.q.sigma)
       << ",\"p0\":" << format_g17(r.q.p0) << ",\"p_m\":[";
    for (std::size_t i = 0; i < r.q.pm.size(); ++i) {
        if (i) os << ",";
        os << format_g17(r.q.pm[i]);
    }
    os << "],\"outer_iterations\":" << r.outer_iterations << ",";
    os << "\"residual_report\":{\"sup\":" << format_g17(audit.sup)
       << ",\"l2\":" << format_g17(audit.l2) << ",\"N_audit\":" << audit.N_audit
       << ",\"gevrey_tail_off_S\":" << format_g17(audit.gevrey_tail_off_S)
       << ",\"gevrey_c\":" << format_g17(audit.gevrey_c) << "},";
    os << "\"field\":";
    write_field_json(os, r.u);
    os << "}\n";
}

void write_trace_csv(std::ostream& os, const RunConfig& config,
                     const std::vector<NewtonState>& trace, const ScaleSchedule& schedule) {
    write_artifact_header(os, config);
    os << "j,N_j,residual_norm,l2_norm_of_inverse,certificate_pass,support_size\n";
    for (const auto& st : trace) {
        const InverseCertificate* cert =
            st.certificate_history.empty() ? nullptr : &st.certificate_history.back();
        os << st.j << "," << schedule.N_of(st.j) << "," << format_g17(st.residual_norm) << ",";
        os << (cert ? format_g17(cert->l2_norm) : "nan") << ",";
        os << (cert ? (cert->pass() ? "1" : "0") : "") << "," << st.v.size() << "\n";
    }
}

void write_scan_csv(std::ostream& os, const RunConfig& config, const ScanReport& report) {
    write_artifact_header(os, config);
    os << "eps,p0,included,reason,lambda,sigma,outer_iterations,residual_sup,worst_cert_margin\n";
    for (const auto& s : report.samples) {
        os << format_g17(s.eps) << "," << format_g17(s.p0) << "," << (s.included ? 1 : 0) << ","
           << s.reason << "," << format_g17(s.lambda) << "," << format_g17(s.sigma) << ","
           << s.outer_iterations << "," << format_g17(s.residual_sup) << ","
           << format_g17(s.worst_cert_margin) << "\n";
    }
    os << "# excluded_fraction_per_eps:";
    for (std::size_t i = 0; i < report.eps_grid.size(); ++i)
        os << " " << format_g17(report.eps_grid[i]) << "=" << format_g17(report.excluded_fraction[i]);
    os << "\n# trend_nonincreasing=" << (report.trend_nonincreasing ? 1 : 0) << "\n";
}

ScanReport scan_p0(const RunConfig& config) {
    ScanReport report;
    report.eps_grid = config.scan.eps_grid;
    std::sort(report.eps_grid.rbegin(), report.eps_grid.rend());  // decreasing eps

    const int ns = config.scan.p0_samples;
    ScaleSchedule sched = config.schedule;
    sched.j_max = config.scan.j_max;

    for (double eps : report.eps_grid) {
        ProblemParams prob = config.problem;
        prob.eps = eps;
        ResonantSet S = resonant_set(prob);
        std::vector<ScanSample> row(ns);
        parallel_for(ns, config.threads, [&](int i) {
            double p0 = ns == 1 ? 1.5 : 1.0 + static_cast<double>(i) / (ns - 1);
            ScanSample& s = row[i];
            s.eps = eps;
            s.p0 = p0;
            CoupledResult r = solve_coupled(p0, prob, S, sched, config.q, config.p);
            s.included = r.status == CoupledStatus::converged;
            s.reason = s.included ? "" : (r.exclusion_reason.empty()
                                              ? (r.status == CoupledStatus::no_outer_convergence
                                                     ? "no_outer_convergence"
                                                     : "excluded")
                                              : r.exclusion_reason);
            s.lambda = r.q.lambda;
            s.sigma = r.q.sigma;
            s.outer_iterations = r.outer_iterations;
            double margin = 0.0;
            for (const auto& st : r.p_trace)
                for (const auto& cert : st.certificate_history)
                    margin = std::max(margin, cert.l2_norm / cert.l2_bound);
            s.worst_cert_margin = margin;
            if (s.included) {
                ResidualReport audit =
                    verify_solution(r.u, r.q.lambda, prob, S, 3 * r.u.support_radius(),
                                    sched.c, config.q.field);
                s.residual_sup = audit.sup;
            }
        });
        int excluded = 0;
        for (const auto& s : row)
            if (!s.included) ++excluded;
        report.excluded_fraction.push_back(static_cast<double>(excluded) / ns);
        report.samples.insert(report.samples.end(), row.begin(), row.end());
    }
    for (std::size_t i = 1; i < report.excluded_fraction.size(); ++i)
        if (report.excluded_fraction[i] > report.excluded_fraction[i - 1] + 1e-15)
            report.trend_nonincreasing = false;
    return report;
}

namespace {

namespace fs = std::filesystem;

std::ofstream open_out(const RunConfig& config, const std::string& name) {
    fs::create_directories(config.out_dir);
    std::ofstream f(fs::path(config.out_dir) / name);
    if (!f) throw Error("io_error", "cannot write " + name + " under " + config.out_dir);
    return f;
}

int run_solve(const RunConfig& config, bool full_audit) {
    ResonantSet S = resonant_set(config.problem);
    CoupledResult r =
        solve_coupled(config.p0, config.problem, S, config.schedule, config.q, config.p);
    ResidualReport audit;
    bool gates_ok = r.status == CoupledStatus::converged;
    if (gates_ok) {
        audit = verify_solution(r.u, r.q.lambda, config.problem, S, 3 * r.u.support_radius(),
                                config.schedule.c, config.q.field);
        gates_ok = audit.sup < 1e-10;
    }
    {
        auto f = open_out(config, "solution.json");
        write_solution_bundle(f, config, r, audit);
    }
    {
        auto f = open_out(config, "trace.csv");
        write_trace_csv(f, config, r.p_trace, config.schedule);
    }
    std::cout << "solve: status="
              << (r.status == CoupledStatus::converged ? "converged" : "not converged")
              << " lambda=" << format_g17(r.q.lambda) << " residual_sup=" << format_g17(audit.sup)
              << "\n";

    if (full_audit && gates_ok) {
        Amplitudes amp{r.q.p0, r.q.pm};
        auto f = open_out(config, "audit.json");
        f << "{\"version\":\"" << kVersionString << "\",\"config_hash\":\"" << config.config_hash
          << "\",\"tail_checks\":[";
        bool tails_ok = true, first = true;
        for (std::size_t i = 0; i + 1 < r.p_trace.size(); ++i) {
            if (!r.p_trace[i + 1].accepted || r.p_trace[i + 1].j != r.p_trace[i].j + 1) continue;
            TailSplitReport tsr =
                tail_split_check(r.p_trace[i], r.p_trace[i + 1], amp, r.q.lambda, config.schedule,
                                 config.problem, S, 10.0, config.q.field);
            tails_ok = tails_ok && tsr.piece1_ok && tsr.piece2_ok;
            if (!first) f << ",";
            first = false;
            f << "{\"j\":" << r.p_trace[i + 1].j << ",\"piece1\":" << format_g17(tsr.piece1)
              << ",\"piece2\":" << format_g17(tsr.piece2) << ",\"bound\":" << format_g17(tsr.bound)
              << "}";
        }
        DerivativeProbe probe =
            derivative_probe(amp, r.q.lambda, r.u, config.problem, S, 1e-6, config.q.field);
        f << "],\"derivative_probe\":{\"dlambda\":" << format_g17(probe.dlambda)
          << ",\"dp0\":" << format_g17(probe.dp0) << "},\"tails_ok\":" << (tails_ok ? 1 : 0)
          << "}\n";
        gates_ok = gates_ok && tails_ok;
    }
    return gates_ok ? 0 : 1;
}

int run_scan(const RunConfig& config) {
    ScanReport rep = scan_p0(config);
    auto f = open_out(config, "scan.csv");
    write_scan_csv(f, config, rep);
    std::cout << "scan: excluded fractions";
    for (std::size_t i = 0; i < rep.eps_grid.size(); ++i)
        std::cout << " eps=" << rep.eps_grid[i] << ":" << rep.excluded_fraction[i];
    std::cout << " trend_ok=" << rep.trend_nonincreasing << "\n";
    return rep.trend_nonincreasing ? 0 : 1;
}

int run_separation(const RunConfig& config) {
    const SeparationConfig& sc = config.separation;
    const double Na = std::pow(static_cast<double>(sc.N), sc.alpha);
    const double B = sc.B_factor * Na;
    const double Bp = sc.Bprime_factor * Na;
    const double chain_cap = std::pow(B * Bp, sc.C_double_prime);

    GdcSpec gdc;
    gdc.degree = sc.gdc_degree;
    gdc.coeff_bound = sc.gdc_coeff_bound;
    gdc.gamma = sc.gdc_gamma;
    gdc.tau = sc.gdc_tau;

    std::mt19937_64 rng(config.seed);
    auto uniform = [&rng](double a, double b) {
        return a + (b - a) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    };

    bool ok = true;
    auto fj = open_out(config, "clusters.json");
    fj << "{\"version\":\"" << kVersionString << "\",\"config_hash\":\"" << config.config_hash
       << "\"}\n";
    auto fc = open_out(config, "chains.csv");
    write_artifact_header(fc, config);
    fc << "lambda,B,B_prime,k_max,exact,gdc_pass,cap,within_cap\n";

    int accepted = 0;
    int attempts = 0;
    while (accepted < sc.n_lambda_samples && attempts < 50 * sc.n_lambda_samples) {
        ++attempts;
        double lambda = uniform(sc.lambda_min, sc.lambda_max);
        if (!check_gdc_poly({lambda}, gdc).pass) continue;
        ++accepted;

        auto sites = singular_sites(lambda, sc.N, B, sc.d);
        auto clusters = cluster_decompose(sites, B);
        std::size_t total = 0;
        for (const auto& cl : clusters) total += cl.sites.size();
        bool partition_ok = total == sites.size();
        // Pairwise separation audit (exact integer l^1 arithmetic).
        bool sep_ok = true;
        for (std::size_t a = 0; a < clusters.size() && sep_ok; ++a)
            for (std::size_t b = a + 1; b < clusters.size() && sep_ok; ++b)
                for (const auto& xa : clusters[a].sites) {
                    for (const auto& xb : clusters[b].sites)
                        if (static_cast<double>(one_dist(xa, xb)) < B) {
                            sep_ok = false;
                            break;
                        }
                    if (!sep_ok) break;
                }

        ChainOptions copt;
        copt.search_radius = sc.chain_search_radius;
        copt.dfs_budget = sc.chain_budget;
        copt.gdc_degree = sc.gdc_degree;
        copt.gdc_coeff_bound = sc.gdc_coeff_bound;
        ChainReport chain = max_chain_length(lambda, B, Bp, sc.d, copt);
        bool within = chain.k_max <= chain_cap;
        ok = ok && partition_ok && sep_ok && within;

        fj << "{\"lambda\":" << format_g17(lambda) << ",\"sites\":" << sites.size()
           << ",\"clusters\":[";
        for (std::size_t i = 0; i < clusters.size(); ++i) {
            if (i) fj << ",";
            fj << "{\"size\":" << clusters[i].sites.size()
               << ",\"diameter\":" << clusters[i].diameter
               << ",\"min_abs_n\":" << clusters[i].min_abs_n << "}";
        }
        fj << "],\"partition_ok\":" << partition_ok << ",\"separation_ok\":" << sep_ok << "}\n";
        fc << format_g17(lambda) << "," << format_g17(B) << "," << format_g17(Bp) << ","
           << chain.k_max << "," << chain.exact << "," << chain.gdc_pass << ","
           << format_g17(chain_cap) << "," << within << "\n";
    }
    if (accepted < sc.n_lambda_samples) ok = false;

    // Control case: lambda = 1 defeats the gDC hypothesis and the chain
    // bound, demonstrating its necessity.
    ChainOptions copt;
    copt.search_radius = sc.chain_search_radius;
    copt.dfs_budget = sc.chain_budget;
    ChainReport control = max_chain_length(1.0, B, Bp, sc.d, copt);
    bool control_violates = static_cast<double>(control.k_max) > chain_cap;
    fc << format_g17(1.0) << "," << format_g17(B) << "," << format_g17(Bp) << ","
       << control.k_max << "," << control.exact << "," << control.gdc_pass << ","
       << format_g17(chain_cap) << "," << !control_violates << "\n";
    ok = ok && control_violates && !control.gdc_pass;

    std::cout << "separation: " << accepted << " gDC samples, gates " << (ok ? "pass" : "FAIL")
              << " (control chain " << control.k_max << " vs cap " << chain_cap << ")\n";
    return ok ? 0 : 1;
}

int run_diophantine(const RunConfig& config) {
    const DiophantineConfig& dc = config.diophantine;
    RhoWitness rho = check_rho_condition(config.problem.rho, dc.rho_gamma, dc.rho_n_max,
                                         config.problem.d);

    GdcSpec spec;
    spec.degree = dc.degree;
    spec.tau = dc.tau;
    spec.coeff_bound = dc.coeff_bound;
    spec.gamma = dc.gamma_grid.front();
    auto estimates = excluded_measure_estimate(spec, dc.gamma_grid, dc.interval_lo, dc.interval_hi,
                                               dc.samples, config.seed);

    auto f = open_out(config, "diophantine.csv");
    write_artifact_header(f, config);
    f << "gamma,tau,degree,coeff_bound,samples,excluded_fraction,envelope\n";
    for (const auto& e : estimates)
        f << format_g17(e.gamma) << "," << format_g17(dc.tau) << "," << dc.degree << ","
          << dc.coeff_bound << "," << e.samples << "," << format_g17(e.fraction) << ","
          << format_g17(e.envelope) << "\n";
    f << "# rho_witness: n=" << rho.n << " k=" << rho.k << " scaled=" << format_g17(rho.scaled)
      << " pass=" << rho.pass << "\n";

    // Fitted log-slope of fraction vs gamma (least squares over positive
    // fractions) against the 1/(b~ degree) envelope.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int pts = 0;
    for (const auto& e : estimates) {
        if (e.fraction <= 0.0) continue;
        double x = std::log(e.gamma), y = std::log(e.fraction);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++pts;
    }
    double slope = pts >= 2 ? (pts * sxy - sx * sy) / (pts * sxx - sx * sx) : 0.0;
    double target = 1.0 / (static_cast<double>(spec.b_tilde) * spec.degree) - 0.1;
    bool slope_ok = pts >= 2 && slope >= target;

    double sub_err = 0.0;
    for (int k : {1, 2, 4}) {
        std::vector<std::int64_t> poly(static_cast<std::size_t>(k) + 1, 0);
        poly[static_cast<std::size_t>(k)] = 1;
        double eps_lvl = 0.01;
        double measured = sublevel_measure_bruteforce(poly, eps_lvl, -1.0, 1.0);
        double closed = 2.0 * std::pow(eps_lvl, 1.0 / k);
        sub_err = std::max(sub_err, std::abs(measured - closed));
    }
    bool sub_ok = sub_err <= 1e-6;
    f << "# slope=" << format_g17(slope) << " target=" << format_g17(target)
      << " slope_ok=" << slope_ok << "\n";
    f << "# sublevel_max_err=" << format_g17(sub_err) << " sub_ok=" << sub_ok << "\n";

    bool ok = rho.pass && slope_ok && sub_ok;
    std::cout << "diophantine: slope=" << slope << " (target " << target
              << ") sublevel_err=" << sub_err << " rho_pass=" << rho.pass << " -> "
              << (ok ? "pass" : "FAIL") << "\n";
    return ok ? 0 : 1;
}

int run_coupling(const RunConfig& config) {
    if (!config.replay_file.empty()) {
        std::ifstream in(config.replay_file);
        if (!in) throw Error("io_error", "cannot open replay file " + config.replay_file);
        CouplingInstance inst = read_replay(in);
        HypothesisReport hyp = audit_hypotheses(inst);
        if (!hyp.pass) {
            std::cout << "coupling replay: hypothesis audit FAILED:";
            for (const auto& s : hyp.failures) std::cout << " [" << s << "]";
            std::cout << "\n";
            return 1;
        }
        ConclusionReport rep = inst.lemma == "c1" ? verify_c1(inst) : verify_c2(inst);
        std::cout << "coupling replay: lemma=" << inst.lemma
                  << " conclusions=" << (rep.pass ? "pass" : "VIOLATED") << "\n";
        return rep.pass ? 0 : 1;
    }

    const CouplingConfig& cc = config.coupling;
    int violations = 0, hyp_failures = 0;
    auto f = open_out(config, "coupling.csv");
    write_artifact_header(f, config);
    f << "lemma,seed,hypotheses_pass,conclusions_pass,entry_margin,decay_margin,decay_pairs\n";

    auto run_one = [&](const std::string& lemma, std::uint64_t seed) {
        CouplingInstance inst;
        if (lemma == "c1") {
            C1Params p;
            p.length = cc.c1_length;
            inst = gen_c1_instance(seed, p);
        } else {
            C2Params p;
            p.radius = cc.c2_radius;
            inst = gen_c2_instance(seed, p);
        }
        HypothesisReport hyp = audit_hypotheses(inst);
        ConclusionReport rep;
        if (hyp.pass) {
            rep = inst.lemma == "c1" ? verify_c1(inst) : verify_c2(inst);
            if (!rep.pass) {
                ++violations;
                auto vf = open_out(config, "violation_" + lemma + "_" + std::to_string(seed) +
                                               ".json");
                write_replay(vf, inst);
            }
        } else {
            ++hyp_failures;
        }
        f << lemma << "," << seed << "," << hyp.pass << "," << rep.pass << ","
          << format_g17(rep.worst_entry_margin) << "," << format_g17(rep.worst_decay_margin) << ","
          << rep.decay_pairs_checked << "\n";
    };

    for (int i = 0; i < cc.instances; ++i) {
        std::uint64_t seed = config.seed + static_cast<std::uint64_t>(i);
        if (cc.lemma != "c2") run_one("c1", seed);
        if (cc.lemma != "c1") run_one("c2", seed);
    }
    f << "# violations=" << violations << " hypothesis_failures=" << hyp_failures << "\n";
    std::cout << "coupling: " << violations << " conclusion violations, " << hyp_failures
              << " hypothesis failures\n";
    return violations == 0 ? 0 : 1;
}

}  // namespace

int run(const RunConfig& config) {
    switch (config.mode) {
        case RunMode::solve: return run_solve(config, false);
        case RunMode::audit: return run_solve(config, true);
        case RunMode::scan: return run_scan(config);
        case RunMode::separation: return run_separation(config);
        case RunMode::diophantine: return run_diophantine(config);
        case RunMode::coupling: return run_coupling(config);
    }
    return 2;
}

}  // namespace cwbnlw
