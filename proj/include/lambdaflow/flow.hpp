#pragma once

#include <memory>
#include <string>
#include <vector>

#include "lambdaflow/cone.hpp"
#include "lambdaflow/data_spec.hpp"
#include "lambdaflow/diagnostics.hpp"
#include "lambdaflow/spectral.hpp"
#include "lambdaflow/torus.hpp"

namespace lambdaflow {

enum class Integrator { euler, rk4 };

struct FlowConfig {
    OperatorSpec op;
    DataSpec data;
    TorusGrid grid;
    ScalarField phi0;
    Integrator integrator = Integrator::rk4;
    DerivMethod method = DerivMethod::spectral;
    double c_cfl = 0.2;
    double t_max = 1.0;
    double tol_osc = 1e-7;
    double sample_interval = 0.01;
    double alpha_harnack = 1.5;
    long long seed = 0;
    bool store_snapshots = true;
};

struct FlowState {
    double t = 0.0;
    ScalarField phi;
    ScalarField phi_t;  // cached rhs at phi
    double dt_last = 0.0;
    double admissibility_margin = 0.0;  // min over nodes and j <= k of sigma_j
    double mu_hat = 0.0;                // max over nodes of sum_p mu_p
};

/// Per-node coefficients of the linearized equation. G stores the spectral
/// projector U diag(mu) U^dagger, whose eigenvalues mu_p are the gradient
/// weights; the chi vector holds chi_k (its conjugate is implicit) and chi0
/// vanishes for phi-independent data.
struct CoefficientFields {
    HermitianField G;
    std::vector<cplx> chi;  // n per node
    ScalarField chi0;
    double ellipticity_min = 0.0;
    double ellipticity_max = 0.0;

    bool has_chi = false;  // false means chi == 0 identically
};

enum class Termination { converged, t_max_reached, breakdown };

const char* termination_name(Termination t);

struct FlowSnapshot {
    double t = 0.0;
    ScalarField phi;
    ScalarField phi_bar;
    ScalarField phi_t;
};

struct FlowResult {
    std::vector<DiagnosticsRecord> records;
    std::vector<FlowSnapshot> snapshots;
    FlowState final_state;
    Termination termination = Termination::t_max_reached;
    std::string note;
};

struct RhsResult {
    ScalarField rhs;
    double margin = 0.0;
    std::ptrdiff_t worst_node = -1;
    double mu_hat = 0.0;
    bool admissible = false;
};

/// Time integration of the flow d phi/dt = f(Lambda(g[phi])) - psi with
/// admissibility guarding and diagnostics. Stepping is sequential in time;
/// all per-node work inside is parallel.
class FlowEngine {
  public:
    explicit FlowEngine(FlowConfig cfg);

    const FlowConfig& config() const { return cfg_; }
    const Differentiator& differentiator() const { return diff_; }

    /// g[phi] = sqrt(-1) d dbar phi + X[phi].
    HermitianField assemble_g_form(const ScalarField& phi);

    /// Pointwise f(Lambda(eigenvalues)) - psi plus the cone margin; throws
    /// for cone-requiring operators when some node leaves the cone.
    RhsResult flow_rhs(const ScalarField& phi);

    /// One accepted step; dt halves (up to 20 times) when a stage goes
    /// inadmissible. dt_cap additionally clamps the step (sample alignment).
    FlowState step(const FlowState& state, double dt_cap = 0.0);

    FlowResult run();

    CoefficientFields linearized_coefficients(const FlowState& state);

    DiagnosticsRecord estimate_monitors(const FlowState& state);

    FlowState initial_state();

    double cfl_dt(double mu_hat) const;

  private:
    FlowConfig cfg_;
    Differentiator diff_;
    FieldWorkspace ws_;
    GradientField grad_ws_;
    std::vector<double> scratch_margins_, scratch_weights_;
    double sup_phi_history_ = 0.0;  // running sup over M x [0,t]

    RhsResult try_rhs(const ScalarField& phi);
};

/// Convenience wrapper matching the module operation list.
FlowResult run_flow(FlowConfig cfg);

/// Realize a manufactured psi: psi(z) := f(Lambda(g[phi*])) evaluated on the
/// grid, so phi* is an exact stationary state of the discrete flow.
void realize_manufactured_psi(FlowConfig& cfg);

namespace ref {
/// Straightforward serial rhs (generic Jacobi eigenvalues, no fast paths);
/// reference implementation kept for tests and benchmarks.
ScalarField flow_rhs_reference(const ScalarField& phi, const FlowConfig& cfg);
}  // namespace ref

}  // namespace lambdaflow
