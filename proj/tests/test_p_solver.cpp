#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cwbnlw/p_solver.hpp"
#include "oracles.hpp"

using namespace cwbnlw;
using namespace cwbnlw::testing;

namespace {

ProblemParams ref_params(double eps) {
    return ProblemParams::make(1, {1}, std::sqrt(2.0), 0.05, eps);
}

ScaleSchedule ref_schedule(int M = 4, int j0 = 1, int j_max = 2) {
    ScaleSchedule s;
    s.M = M;
    s.j0 = j0;
    s.j_max = j_max;
    s.c = 0.04;
    return s;
}

}  // namespace

TEST_CASE("schedule constraints") {
    ScaleSchedule s = ref_schedule();
    CHECK_NOTHROW(s.validate());
    s.c = 0.05;  // above log(17/16)/log 4
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s.c = 0.04;
    s.C2 = 1.5;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("evaluate_G") {
    SUBCASE("eps = 0, v = 0, lambda = lambda0 gives G = 0") {
        auto params = ref_params(0.0);
        ResonantSet S = resonant_set(params);
        FourierField g = evaluate_G(Amplitudes{1.0, {0.0}}, params.lambda0, FourierField(1),
                                    params, S);
        CHECK(g.empty());
    }
    SUBCASE("v = 0: G is eps^2 Gamma_P D^alpha u0^3, with the exact (3,3) value") {
        auto params = ProblemParams::make(1, {1}, std::sqrt(2.0), 0.0, 1e-2);
        ResonantSet S = resonant_set(params);
        FourierField g = evaluate_G(Amplitudes{1.0, {0.0}}, params.lambda0, FourierField(1),
                                    params, S);
        // (u0^3)^(3,3) = p0^3 / 8 and the linear symbol multiplies a zero
        // coefficient there.
        CHECK(g.at(LatticeIndex({3}, 3)) == doctest::Approx(1e-4 / 8.0).epsilon(1e-13));
        CHECK(g.at(LatticeIndex({1}, 1)) == 0.0);  // killed by Gamma_P
        CHECK(l2_norm(g) <= 10.0 * params.eps * params.eps);
    }
    SUBCASE("residual field is symmetric and off S") {
        auto params = ref_params(1e-3);
        ResonantSet S = resonant_set(params);
        FourierField v = project_P(random_field(1, 5, 3, 1e-3), S.sites);
        FourierField g = evaluate_G(Amplitudes{1.5, {0.0}}, params.lambda0 + 0.01, v, params, S);
        CHECK(g.symmetry_ok());
        for (const auto& [xi, val] : g.coeffs()) CHECK_FALSE(S.contains(xi));
    }
}

TEST_CASE("newton_step") {
    auto params = ref_params(1e-3);
    ResonantSet S = resonant_set(params);
    Amplitudes amp{1.5, {0.0}};
    ScaleSchedule sched = ref_schedule();

    SUBCASE("zero residual: state unchanged except j+1") {
        NewtonState st;
        st.j = 1;
        st.v = FourierField(1);
        st.residual = FourierField(1);
        st.residual_norm = 0.0;
        StepResult r = newton_step(st, amp, params.lambda0, sched, params, S);
        CHECK(r.status == StepStatus::converged);
        CHECK(r.state.j == 2);
        CHECK(r.state.v.empty());
        CHECK(r.state.certificate_history.empty());
    }
    SUBCASE("one step at desk scale drops the residual by >= 1e2") {
        NewtonState st;
        st.j = sched.j0;
        st.v = FourierField(1);
        st.residual = evaluate_G(amp, params.lambda0, st.v, params, S);
        st.residual_norm = l2_norm(st.residual);
        REQUIRE(st.residual_norm > 0.0);
        StepResult r = newton_step(st, amp, params.lambda0, sched, params, S);
        REQUIRE(r.status == StepStatus::ok);
        CHECK(r.state.residual_norm <= st.residual_norm / 1e2);
        CHECK(r.state.v.support_radius() <= sched.N_of(2));
        CHECK(r.state.v.symmetry_ok());
        CHECK(r.state.certificate_history.size() == 1);
        CHECK(r.state.certificate_history[0].pass());
        // Exactness: the stored residual norm is the recomputed one.
        FourierField again = evaluate_G(amp, params.lambda0, r.state.v, params, S);
        CHECK(std::abs(l2_norm(again) - r.state.residual_norm) <= 1e-14);
    }
    SUBCASE("deliberately resonant lambda fails the certificate") {
        // -(2 lambda)^2 + 9 + rho = 0 puts an exact zero on the diagonal at (3, 2).
        double lam = std::sqrt((9.0 + params.rho) / 4.0);
        NewtonState st;
        st.j = sched.j0;
        st.v = FourierField(1);
        st.residual = evaluate_G(amp, lam, st.v, params, S);
        st.residual_norm = l2_norm(st.residual);
        StepResult r = newton_step(st, amp, lam, sched, params, S);
        CHECK(r.status == StepStatus::certificate_failed);
        CHECK_FALSE(r.state.accepted);
    }
}

TEST_CASE("run_p_solver") {
    SUBCASE("eps = 0 converges immediately") {
        auto params = ref_params(0.0);
        ResonantSet S = resonant_set(params);
        PSolveResult r = run_p_solver(Amplitudes{1.2, {0.0}}, params.lambda0, ref_schedule(),
                                      params, S);
        CHECK(r.status == PSolveStatus::converged);
        CHECK(r.trace.size() == 1);
        CHECK(r.v.empty());
    }
    SUBCASE("support growth and symmetry hold along the trace") {
        auto params = ref_params(1e-2);
        ResonantSet S = resonant_set(params);
        ScaleSchedule sched = ref_schedule(3, 1, 3);
        sched.c = 0.05;
        PSolveResult r = run_p_solver(Amplitudes{1.5, {0.0}}, params.lambda0, sched, params, S);
        REQUIRE((r.status == PSolveStatus::converged || r.status == PSolveStatus::reached_j_max));
        for (const auto& st : r.trace) {
            CHECK(st.v.support_radius() <= sched.N_of(st.j));
            CHECK(st.v.symmetry_ok());
        }
        CHECK(r.trace.back().residual_norm < r.trace.front().residual_norm);
    }
    SUBCASE("superlinear contraction r_{j+1} <= r_j^1.5 after the first step") {
        auto params = ref_params(3e-2);
        ResonantSet S = resonant_set(params);
        ScaleSchedule sched = ref_schedule(3, 1, 3);
        sched.c = 0.05;
        PSolveResult r = run_p_solver(Amplitudes{1.5, {0.0}}, params.lambda0, sched, params, S);
        REQUIRE(r.trace.size() >= 3);
        for (std::size_t i = 2; i < r.trace.size(); ++i) {
            double prev = r.trace[i - 1].residual_norm;
            if (prev <= sched.residual_floor) break;
            CHECK(r.trace[i].residual_norm <= std::pow(prev, 1.5));
        }
    }
    SUBCASE("monotone exclusion: no later scale after a failed certificate") {
        auto params = ref_params(1e-3);
        ResonantSet S = resonant_set(params);
        double lam = std::sqrt((9.0 + params.rho) / 4.0);
        ScaleSchedule sched = ref_schedule(4, 1, 4);
        PSolveResult r = run_p_solver(Amplitudes{1.5, {0.0}}, lam, sched, params, S);
        CHECK(r.status == PSolveStatus::excluded);
        CHECK(r.trace.back().j == sched.j0 + 1);  // stopped right at the failure
        CHECK(r.trace.size() == 2);
    }
}

TEST_CASE("tail_split_check") {
    auto params = ref_params(1e-3);
    ResonantSet S = resonant_set(params);
    Amplitudes amp{1.5, {0.0}};
    ScaleSchedule sched = ref_schedule();

    SUBCASE("w = 0 gives all-zero pieces") {
        NewtonState a, b;
        a.j = 1;
        a.v = FourierField(1);
        b.j = 2;
        b.v = FourierField(1);
        TailSplitReport rep = tail_split_check(a, b, amp, params.lambda0, sched, params, S);
        CHECK(rep.piece1 == 0.0);
        CHECK(rep.piece2 == 0.0);
        CHECK(rep.total == 0.0);
    }
    SUBCASE("supp w inside B(0, N/2) kills the second piece identically") {
        NewtonState a, b;
        a.j = 1;
        a.v = FourierField(1);
        b.j = 2;
        FourierField w(1);
        w.set_pair(LatticeIndex({3}, 3), 1e-7);
        w.set_pair(LatticeIndex({1}, 3), -2e-8);
        b.v = w;  // radius 6 < N/2 = 8
        TailSplitReport rep = tail_split_check(a, b, amp, params.lambda0, sched, params, S);
        CHECK(rep.piece2 == 0.0);
        CHECK(rep.total == doctest::Approx(rep.piece1).epsilon(1e-12));
    }
    SUBCASE("desk-scale step pieces sit below the slack bound") {
        PSolveResult r = run_p_solver(amp, params.lambda0, sched, params, S);
        REQUIRE(r.trace.size() >= 2);
        TailSplitReport rep = tail_split_check(r.trace[0], r.trace[1], amp, params.lambda0, sched,
                                               params, S);
        CHECK(rep.piece1_ok);
        CHECK(rep.piece2_ok);
        CHECK(rep.total <= rep.piece1 + rep.piece2 + 1e-18);
    }
}

TEST_CASE("derivative probe runs and is finite") {
    auto params = ref_params(1e-3);
    ResonantSet S = resonant_set(params);
    DerivativeProbe p = derivative_probe(Amplitudes{1.5, {0.0}}, params.lambda0, FourierField(1),
                                         params, S);
    CHECK(std::isfinite(p.dlambda));
    CHECK(std::isfinite(p.dp0));
    CHECK(p.dlambda >= 0.0);
}
