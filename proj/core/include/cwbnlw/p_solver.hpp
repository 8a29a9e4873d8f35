#pragma once

#include <string>
#include <vector>

#include "cwbnlw/operator.hpp"
#include "cwbnlw/problem.hpp"

namespace cwbnlw {

/// Truncation schedule N_j = M^j with the constants of the multiscale
/// scheme. The admissible range 0 < c < log(17/16)/log M and C1 > C2 > 2
/// is what the residual propagation estimates assume.
struct ScaleSchedule {
    int M = 4;
    double c = 0.04;
    double C1 = 3.0;
    double C2 = 2.5;
    int j0 = 1;
    int j_max = 3;
    double residual_floor = 1e-13;

    double c_limit() const;
    /// Throws std::invalid_argument when a constraint is violated.
    void validate() const;
    /// N_j = M^j
    int N_of(int j) const;
};

struct NewtonState {
    int j = 0;
    FourierField v;
    double residual_norm = 0.0;
    FourierField residual;
    std::vector<InverseCertificate> certificate_history;
    bool accepted = true;
};

struct PSolveOptions {
    FieldOptions field;
    double cond_cap = 1e14;
    /// Largest dense basis a step may assemble; exceeding it is a
    /// configuration mistake, not an exclusion.
    int max_basis = 5000;
};

/// G_{p,lambda}(v) = Gamma_P F_lambda(u0 + v): linear symbol times the
/// coefficients plus eps^2 <m>^alpha (u^3)^, zeroed on S.
FourierField evaluate_G(const Amplitudes& amp, double lambda, const FourierField& v,
                        const ProblemParams& params, const ResonantSet& S,
                        const FieldOptions& opt = {});

enum class StepStatus { ok, converged, certificate_failed, residual_increase };

struct StepResult {
    StepStatus status = StepStatus::ok;
    NewtonState state;
};

/// One correction w = -T_{j,N_{j+1}}^{-1} G^(v_j), applied only when the
/// certificate for T~_{j,N_{j+1}} passes. The new residual is recomputed
/// from scratch through evaluate_G.
StepResult newton_step(const NewtonState& state, const Amplitudes& amp, double lambda,
                       const ScaleSchedule& schedule, const ProblemParams& params,
                       const ResonantSet& S, const PSolveOptions& opt = {});

enum class PSolveStatus { converged, reached_j_max, excluded, residual_increase };

struct PSolveResult {
    PSolveStatus status = PSolveStatus::converged;
    FourierField v;
    std::vector<NewtonState> trace;

    bool excluded() const { return status == PSolveStatus::excluded; }
};

/// Iterate newton_step from v_{j0} = 0 until the residual floor or j_max.
/// A certificate failure terminates the run with a partial trace flagged
/// excluded; no later scale is attempted for that parameter.
PSolveResult run_p_solver(const Amplitudes& amp, double lambda, const ScaleSchedule& schedule,
                          const ProblemParams& params, const ResonantSet& S,
                          const PSolveOptions& opt = {});

/// Direct audit of the residual-propagation split
///   (T - T_N) w^ = (I - P_N) T P_{N/2} w^ + (T - T_N)(I - P_{N/2}) w^
/// for the step that produced `after` from `before`.
struct TailSplitReport {
    double piece1 = 0.0;
    double piece2 = 0.0;
    double total = 0.0;
    double bound = 0.0;  // (1/3) e^{-2 (M^{j+1})^c} times the slack factor
    bool piece1_ok = true;
    bool piece2_ok = true;
};

TailSplitReport tail_split_check(const NewtonState& before, const NewtonState& after,
                                 const Amplitudes& amp, double lambda,
                                 const ScaleSchedule& schedule, const ProblemParams& params,
                                 const ResonantSet& S, double slack = 10.0,
                                 const FieldOptions& opt = {});

/// Central finite-difference estimates of ||dG/dlambda|| and ||dG/dp0|| at
/// fixed v. Recorded alongside traces; not a gate.
struct DerivativeProbe {
    double dlambda = 0.0;
    double dp0 = 0.0;
    double step = 1e-6;
};

DerivativeProbe derivative_probe(const Amplitudes& amp, double lambda, const FourierField& v,
                                 const ProblemParams& params, const ResonantSet& S,
                                 double h = 1e-6, const FieldOptions& opt = {});

}  // namespace cwbnlw
