#include "cwbnlw/p_solver.hpp"

#include <cmath>
#include <stdexcept>

namespace cwbnlw {

double ScaleSchedule::c_limit() const {
    return std::log(17.0 / 16.0) / std::log(static_cast<double>(M));
}

void ScaleSchedule::validate() const {
    if (M < 2) throw std::invalid_argument("schedule: M must be >= 2");
    if (!(c > 0.0 && c < c_limit()))
        throw std::invalid_argument("schedule: need 0 < c < log(17/16)/log M");
    if (!(C1 > C2 && C2 > 2.0)) throw std::invalid_argument("schedule: need C1 > C2 > 2");
    if (j0 < 0 || j_max < j0) throw std::invalid_argument("schedule: need 0 <= j0 <= j_max");
}

int ScaleSchedule::N_of(int j) const {
    double v = std::pow(static_cast<double>(M), j);
    if (v > 1e9) throw std::invalid_argument("schedule: N_j overflows a sane truncation");
    return static_cast<int>(v + 0.5);
}

namespace {

FourierField field_sum(const FourierField& a, const FourierField& b, double scale = 1.0) {
    FourierField out = a;
    for (const auto& xi : b.canonical_sites()) out.add_pair(xi, scale * b.at(xi));
    return out;
}

}  // namespace

FourierField evaluate_G(const Amplitudes& amp, double lambda, const FourierField& v,
                        const ProblemParams& params, const ResonantSet& S,
                        const FieldOptions& opt) {
    FourierField u0 = build_seed_field(params, S, amp);
    FourierField u = field_sum(u0, project_P(v, S.sites));
    FourierField cube = pointwise_cube(u, opt);
    const double e2 = params.eps * params.eps;

    FourierField g(params.d);
    auto emit = [&](const LatticeIndex& xi) {
        if (!xi.is_canonical() || S.contains(xi) || S.contains(-xi)) return;
        double val = params.linear_symbol(xi, lambda) * u.at(xi) +
                     e2 * fractional_symbol(xi, params.alpha) * cube.at(xi);
        if (val != 0.0) g.set_pair(xi, val);
    };
    for (const auto& xi : u.canonical_sites()) emit(xi);
    for (const auto& xi : cube.canonical_sites())
        if (u.at(xi) == 0.0) emit(xi);
    return g;
}

StepResult newton_step(const NewtonState& state, const Amplitudes& amp, double lambda,
                       const ScaleSchedule& schedule, const ProblemParams& params,
                       const ResonantSet& S, const PSolveOptions& opt) {
    StepResult out;
    out.state = state;
    if (!state.accepted) throw Error("certificate_failed", "step from a non-accepted state");

    if (state.residual_norm <= schedule.residual_floor) {
        out.status = StepStatus::converged;
        out.state.j = state.j + 1;
        return out;
    }

    const int N = schedule.N_of(state.j + 1);
    FourierField u0 = build_seed_field(params, S, amp);
    FourierField u_j = field_sum(u0, state.v);

    SiteBasis basis = SiteBasis::ball(params, S, N);
    if (basis.size() > opt.max_basis)
        throw Error("basis_too_large", "scale N = " + std::to_string(N) + " needs " +
                                           std::to_string(basis.size()) + " sites");

    AssembleOptions aopt;
    aopt.field = opt.field;
    TruncatedOperator Tt = assemble_on_sites(u_j, lambda, params, basis, OperatorKind::T_tilde, aopt);
    Tt.N = N;
    CertifiedInverse ci = invert_with_certificate(Tt, schedule.C2, schedule.c, opt.cond_cap);
    out.state.certificate_history.push_back(ci.cert);
    if (!ci.cert.pass()) {
        out.status = StepStatus::certificate_failed;
        out.state.accepted = false;
        return out;
    }

    // w^ = -T_N^{-1} G^ with T^{-1} = T~^{-1} Lambda^{-1}.
    const int n = basis.size();
    Eigen::VectorXd rhs(n);
    for (int i = 0; i < n; ++i) {
        const LatticeIndex& xi = basis.site(i);
        rhs(i) = -state.residual.at(xi) / fractional_symbol(xi, params.alpha);
    }
    Eigen::VectorXd w = ci.inverse * rhs;

    FourierField wf(params.d);
    for (int i = 0; i < n; ++i)
        if (basis.site(i).is_canonical() && w(i) != 0.0) wf.set_pair(basis.site(i), w(i));

    out.state.j = state.j + 1;
    out.state.v = field_sum(state.v, wf);
    if (out.state.v.support_radius() > N) throw std::logic_error("newton_step: support grew past N");
    out.state.residual = evaluate_G(amp, lambda, out.state.v, params, S, opt.field);
    out.state.residual_norm = l2_norm(out.state.residual);

    if (out.state.residual_norm > state.residual_norm) {
        out.status = StepStatus::residual_increase;
        out.state.accepted = false;
        return out;
    }
    out.status = StepStatus::ok;
    return out;
}

PSolveResult run_p_solver(const Amplitudes& amp, double lambda, const ScaleSchedule& schedule,
                          const ProblemParams& params, const ResonantSet& S,
                          const PSolveOptions& opt) {
    PSolveResult out;
    NewtonState state;
    state.j = schedule.j0;
    state.v = FourierField(params.d);
    state.residual = evaluate_G(amp, lambda, state.v, params, S, opt.field);
    state.residual_norm = l2_norm(state.residual);
    out.trace.push_back(state);

    while (state.residual_norm > schedule.residual_floor && state.j < schedule.j_max) {
        StepResult step = newton_step(state, amp, lambda, schedule, params, S, opt);
        state = step.state;
        out.trace.push_back(state);
        if (step.status == StepStatus::certificate_failed) {
            out.status = PSolveStatus::excluded;
            out.v = state.v;
            return out;
        }
        if (step.status == StepStatus::residual_increase) {
            out.status = PSolveStatus::residual_increase;
            out.v = state.v;
            return out;
        }
    }
    out.status = state.residual_norm <= schedule.residual_floor ? PSolveStatus::converged
                                                                : PSolveStatus::reached_j_max;
    out.v = state.v;
    return out;
}

TailSplitReport tail_split_check(const NewtonState& before, const NewtonState& after,
                                 const Amplitudes& amp, double lambda,
                                 const ScaleSchedule& schedule, const ProblemParams& params,
                                 const ResonantSet& S, double slack, const FieldOptions& opt) {
    if (after.j != before.j + 1)
        throw std::invalid_argument("tail_split_check: states are not a single step apart");
    const int N = schedule.N_of(after.j);

    FourierField w = field_sum(after.v, before.v, -1.0);
    FourierField u0 = build_seed_field(params, S, amp);
    FourierField u_before = field_sum(u0, before.v);
    FourierField usq = convolve(u_before, u_before, opt);
    FourierField phi(params.d);
    for (const auto& xi : usq.canonical_sites()) phi.set_pair(xi, 3.0 * usq.at(xi));

    auto outside_ball = [&](const FourierField& f) {
        FourierField out(params.d);
        for (const auto& xi : f.canonical_sites())
            if (xi.one_norm() >= N) out.set_pair(xi, f.at(xi));
        return out;
    };
    auto T_of = [&](const FourierField& x) {
        return apply_operator(phi, lambda, params, S, x, OperatorKind::T, opt);
    };

    FourierField w_low = project_ball(w, N / 2);
    FourierField w_high = field_sum(w, w_low, -1.0);

    TailSplitReport rep;
    rep.piece1 = l2_norm(outside_ball(T_of(w_low)));
    rep.piece2 = l2_norm(outside_ball(T_of(w_high)));
    rep.total = l2_norm(outside_ball(T_of(w)));
    double Nc = std::pow(static_cast<double>(N), schedule.c);
    rep.bound = slack * std::exp(-2.0 * Nc) / 3.0;
    rep.piece1_ok = rep.piece1 <= rep.bound;
    rep.piece2_ok = rep.piece2 <= rep.bound;
    return rep;
}

DerivativeProbe derivative_probe(const Amplitudes& amp, double lambda, const FourierField& v,
                                 const ProblemParams& params, const ResonantSet& S, double h,
                                 const FieldOptions& opt) {
    DerivativeProbe out;
    out.step = h;
    FourierField gp = evaluate_G(amp, lambda + h, v, params, S, opt);
    FourierField gm = evaluate_G(amp, lambda - h, v, params, S, opt);
    out.dlambda = l2_norm(field_sum(gp, gm, -1.0)) / (2.0 * h);

    Amplitudes ap = amp, am = amp;
    ap.p0 += h;
    am.p0 -= h;
    FourierField gp0 = evaluate_G(ap, lambda, v, params, S, opt);
    FourierField gm0 = evaluate_G(am, lambda, v, params, S, opt);
    out.dp0 = l2_norm(field_sum(gp0, gm0, -1.0)) / (2.0 * h);
    return out;
}

}  // namespace cwbnlw
