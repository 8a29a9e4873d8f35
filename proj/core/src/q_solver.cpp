#include "cwbnlw/q_solver.hpp"

#include <cmath>
#include <stdexcept>

namespace cwbnlw {

double sigma_from_lambda(double lambda, const ProblemParams& params) {
    double num = -lambda * lambda + static_cast<double>(params.m0_norm2()) + params.rho;
    if (params.eps == 0.0) return 0.0;
    return num / (params.eps * params.eps);
}

double lambda_from_sigma(double sigma, const ProblemParams& params) {
    double l2 = static_cast<double>(params.m0_norm2()) + params.rho -
                sigma * params.eps * params.eps;
    if (!(l2 > 0.0)) throw Error("frequency_collapse", "lambda^2 = " + std::to_string(l2));
    return std::sqrt(l2);
}

std::vector<double> resonant_cubic_coefficients(const ProblemParams& params, const ResonantSet& S,
                                                const Amplitudes& amp, const FieldOptions& opt) {
    FourierField u0 = build_seed_field(params, S, amp);
    FourierField cube = pointwise_cube(u0, opt);
    std::vector<double> out(S.splus.size());
    for (std::size_t i = 0; i < S.splus.size(); ++i) out[i] = cube.at(S.splus[i]);
    return out;
}

std::vector<double> leading_order_coefficients(const ProblemParams& params, const ResonantSet& S,
                                               const Amplitudes& amp) {
    std::vector<double> out(S.splus.size(), 0.0);
    out[S.m0_pos] = 0.375 * amp.p0 * amp.p0 * amp.p0;
    for (std::size_t i = 0; i < S.other_pos.size(); ++i)
        out[S.other_pos[i]] = 0.75 * amp.p0 * amp.p0 * amp.pm[i];
    return out;
}

QState q_update(const FourierField& u, const QState& state, const ProblemParams& params,
                const ResonantSet& S, const QOptions& opt) {
    if (state.p0 == 0.0) throw std::invalid_argument("q_update: p0 must be nonzero");
    FourierField cube = pointwise_cube(u, opt.field);
    const double sym = params.m0_symbol();

    QState next = state;
    next.sigma = -2.0 * sym * cube.at(S.splus[S.m0_pos]) / state.p0;

    // One damped sweep with the leading-order diagonal sigma + (3/2)<m0>^a p0^2,
    // which stays near (3/4)<m0>^a p0^2 and away from zero.
    const double J = next.sigma + 1.5 * sym * state.p0 * state.p0;
    for (std::size_t i = 0; i < next.pm.size(); ++i) {
        double resid = next.sigma * state.pm[i] + 2.0 * sym * cube.at(S.splus[S.other_pos[i]]);
        next.pm[i] = state.pm[i] - opt.damping * resid / J;
    }
    next.lambda = lambda_from_sigma(next.sigma, params);
    next.iteration = state.iteration + 1;
    return next;
}

CoupledResult solve_coupled(double p0, const ProblemParams& params, const ResonantSet& S,
                            const ScaleSchedule& schedule, const QOptions& qopt,
                            const PSolveOptions& popt) {
    if (!(p0 >= 1.0 && p0 <= 2.0))
        throw std::invalid_argument("solve_coupled: p0 must lie in [1,2]");

    CoupledResult out;
    QState q;
    q.p0 = p0;
    q.pm.assign(S.other_pos.size(), 0.0);
    q.lambda = params.lambda0;
    q.sigma = 0.0;

    auto run_p = [&](const QState& s, PSolveResult& ps) {
        Amplitudes amp{s.p0, s.pm};
        ps = run_p_solver(amp, s.lambda, schedule, params, S, popt);
        return !ps.excluded() && ps.status != PSolveStatus::residual_increase;
    };

    for (int it = 0; it < qopt.outer_max; ++it) {
        PSolveResult ps;
        if (!run_p(q, ps)) {
            out.status = CoupledStatus::excluded_parameter;
            out.q = q;
            out.p_trace = std::move(ps.trace);
            out.exclusion_reason = ps.excluded() ? "certificate_failed" : "residual_increase";
            return out;
        }
        FourierField u0 = build_seed_field(params, S, Amplitudes{q.p0, q.pm});
        FourierField u = u0;
        for (const auto& xi : ps.v.canonical_sites()) u.add_pair(xi, ps.v.at(xi));

        QState next;
        try {
            next = q_update(u, q, params, S, qopt);
        } catch (const Error& e) {
            out.status = CoupledStatus::excluded_parameter;
            out.q = q;
            out.p_trace = std::move(ps.trace);
            out.exclusion_reason = e.kind();
            return out;
        }
        double delta = std::abs(next.lambda - q.lambda);
        for (std::size_t i = 0; i < next.pm.size(); ++i) delta += std::abs(next.pm[i] - q.pm[i]);
        q = next;
        out.lambda_history.push_back(q.lambda);
        out.outer_iterations = it + 1;

        if (delta < qopt.outer_tol) {
            // Final P-solve at the converged Q-variables so the returned pair
            // (u, lambda) is self-consistent.
            PSolveResult fin;
            if (!run_p(q, fin)) {
                out.status = CoupledStatus::excluded_parameter;
                out.q = q;
                out.p_trace = std::move(fin.trace);
                out.exclusion_reason = fin.excluded() ? "certificate_failed" : "residual_increase";
                return out;
            }
            FourierField uf = build_seed_field(params, S, Amplitudes{q.p0, q.pm});
            for (const auto& xi : fin.v.canonical_sites()) uf.add_pair(xi, fin.v.at(xi));
            q.converged = true;
            out.status = CoupledStatus::converged;
            out.q = q;
            out.u = std::move(uf);
            out.p_trace = std::move(fin.trace);
            return out;
        }
    }
    out.status = CoupledStatus::no_outer_convergence;
    out.q = q;
    return out;
}

ResidualReport verify_solution(const FourierField& u, double lambda, const ProblemParams& params,
                               const ResonantSet& S, int N_audit, double gevrey_c,
                               const FieldOptions& opt) {
    FourierField cube = pointwise_cube(u, opt);
    const double e2 = params.eps * params.eps;

    ResidualReport rep;
    rep.N_audit = N_audit;
    rep.gevrey_c = gevrey_c;
    double sum2 = 0.0;
    auto visit = [&](const LatticeIndex& xi) {
        if (xi.one_norm() > N_audit) return;
        double r = params.linear_symbol(xi, lambda) * u.at(xi) +
                   e2 * fractional_symbol(xi, params.alpha) * cube.at(xi);
        double a = std::abs(r);
        rep.sup = std::max(rep.sup, a);
        sum2 += (xi.is_zero() ? 1.0 : 2.0) * r * r;
    };
    for (const auto& xi : u.canonical_sites()) visit(xi);
    for (const auto& xi : cube.canonical_sites())
        if (u.at(xi) == 0.0) visit(xi);
    rep.l2 = std::sqrt(sum2);
    rep.gevrey_tail_off_S = gevrey_weighted_sum(u, gevrey_c, S.sites);
    return rep;
}

}  // namespace cwbnlw
