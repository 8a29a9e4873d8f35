#pragma once

#include <string>
#include <vector>

#include "cwbnlw/p_solver.hpp"
#include "cwbnlw/problem.hpp"

namespace cwbnlw {

/// State of the resonant (Q) variables. sigma = eps^-2 (-lambda^2 + |m0|^2
/// + rho) holds exactly by construction whenever lambda was produced from
/// sigma by lambda_from_sigma.
struct QState {
    double p0 = 1.0;
    std::vector<double> pm;
    double lambda = 0.0;
    double sigma = 0.0;
    int iteration = 0;
    bool converged = false;
};

double sigma_from_lambda(double lambda, const ProblemParams& params);
/// Positive root; throws "frequency_collapse" if lambda^2 would be negative.
double lambda_from_sigma(double sigma, const ProblemParams& params);

/// Exact (u0^3)^(m, 1) for every |m| = |m0|, by convolution of the seed
/// field with itself (not the leading-order formula). Ordered as S.splus.
std::vector<double> resonant_cubic_coefficients(const ProblemParams& params, const ResonantSet& S,
                                                const Amplitudes& amp,
                                                const FieldOptions& opt = {});

/// Leading-order values: (3/8) p0^3 at m0 and (3/4) p0^2 p_m elsewhere.
std::vector<double> leading_order_coefficients(const ProblemParams& params, const ResonantSet& S,
                                               const Amplitudes& amp);

struct QOptions {
    double damping = 1.0;
    double outer_tol = 1e-12;
    int outer_max = 50;
    FieldOptions field;
};

/// One Q-sweep on the full approximation u: new sigma from the m0 component,
/// one damped quasi-Newton sweep on the p_m, new lambda from sigma.
QState q_update(const FourierField& u, const QState& state, const ProblemParams& params,
                const ResonantSet& S, const QOptions& opt = {});

enum class CoupledStatus { converged, excluded_parameter, no_outer_convergence };

struct CoupledResult {
    CoupledStatus status = CoupledStatus::converged;
    QState q;
    FourierField u;
    std::vector<NewtonState> p_trace;  // trace of the final P-solve
    int outer_iterations = 0;
    std::vector<double> lambda_history;
    std::string exclusion_reason;
};

/// Outer alternation: run_p_solver with (lambda, p_m) frozen, then q_update,
/// until |d lambda| + |d p_m|_1 < outer_tol. Certificate failures map to
/// excluded_parameter for this p0.
CoupledResult solve_coupled(double p0, const ProblemParams& params, const ResonantSet& S,
                            const ScaleSchedule& schedule, const QOptions& qopt = {},
                            const PSolveOptions& popt = {});

/// Residual of the full equation at every site with |xi|_1 <= N_audit
/// (including S), plus the Gevrey tail off S.
struct ResidualReport {
    double sup = 0.0;
    double l2 = 0.0;
    int N_audit = 0;
    double gevrey_tail_off_S = 0.0;
    double gevrey_c = 0.0;
};

ResidualReport verify_solution(const FourierField& u, double lambda, const ProblemParams& params,
                               const ResonantSet& S, int N_audit, double gevrey_c,
                               const FieldOptions& opt = {});

}  // namespace cwbnlw
