#pragma once

#include <limits>
#include <span>
#include <vector>

#include "lambdaflow/flow.hpp"
#include "lambdaflow/linear_parabolic.hpp"

namespace lambdaflow {

/// v_n / w_n of the oscillation iteration on the local window t in [0, 1]:
/// v_n = sup_y u(y, n-1) - u(x, n-1+t), w_n = u(x, n-1+t) - inf_y u(y, n-1),
/// built from the stored phi_t snapshots.
struct VnWn {
    int n = 1;
    std::vector<double> local_times;
    std::vector<ScalarField> v;
    std::vector<ScalarField> w;
    double sup_u_start = 0.0;
    double inf_u_start = 0.0;
};

VnWn build_vn_wn(const FlowResult& traj, int n);

/// Max relative deviation between the sampled time derivative of v_n (5-point
/// stencil) and the assembled linear operator applied to v_n; verifies that
/// the constructed functions satisfy the linearized equation.
double vn_wn_equation_residual(const VnWn& vw, FlowEngine& engine, const FlowResult& traj);

struct RecursionCheck {
    bool holds = false;
    double delta = 0.0;  // (C-1)/(C+1), the implied contraction factor
    double lhs = 0.0, rhs = 0.0;
};

/// omega(n-1) + omega(n-1/2) <= C (omega(n-1) - omega(n)).
RecursionCheck recursion_check(double omega_nm1, double omega_nhalf, double omega_n,
                               double C_harnack);

struct DecayFit {
    double C = 0.0;
    double beta = 0.0;
    double r_squared = 0.0;
    double t_start = 0.0, t_end = 0.0;
    bool envelope_ok = false;  // omega(t) <= 1.05 C e^{-beta t} on the window
};

/// Least squares on log(omega) vs t over [t_start, t_end]; nonpositive
/// samples are dropped, at least 5 must remain.
DecayFit decay_fit(std::span<const double> times, std::span<const double> omega,
                   double t_start = 0.0,
                   double t_end = std::numeric_limits<double>::infinity());

struct MonotoneHCheck {
    double max_violation = 0.0;
    bool ok = false;
};

/// h(x, t) = phi_bar(x, t) + C e^{-beta t}/beta must be non-increasing per
/// node across consecutive snapshots, slack 1e-8 (1 + max|phi_bar|).
MonotoneHCheck monotone_h_check(const FlowResult& traj, double C, double beta);

struct EllipticResidual {
    double a = 0.0;
    double residual_sup = 0.0;
};

/// a = mean(phi_t) at the final state; residual_sup = sup |f(Lambda(g)) - psi - a|.
EllipticResidual elliptic_residual(const FlowState& final_state, FlowEngine& engine);

/// Summary block of a convergence run (the JSON report payload).
struct RunSummary {
    double a = 0.0;
    double beta = 0.0;
    double C_decay = 0.0;
    double delta_recursion = 0.0;
    double harnack_C = 0.0;
    double final_residual = 0.0;
    Termination termination = Termination::t_max_reached;
};

}  // namespace lambdaflow
