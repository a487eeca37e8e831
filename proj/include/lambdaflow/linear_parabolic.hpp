#pragma once

#include <memory>
#include <vector>

#include "lambdaflow/flow.hpp"

namespace lambdaflow {

/// Source of (G, chi, chi0) for the linear solver: frozen (one snapshot) or
/// time-indexed (the flow-coupled mode of the convergence pipeline).
class CoefficientProvider {
  public:
    virtual ~CoefficientProvider() = default;
    virtual const CoefficientFields& at(double t) = 0;
};

class FrozenCoefficients final : public CoefficientProvider {
  public:
    explicit FrozenCoefficients(CoefficientFields cf) : cf_(std::move(cf)) {}
    const CoefficientFields& at(double) override { return cf_; }

  private:
    CoefficientFields cf_;
};

/// Coefficients re-assembled from stored flow snapshots (phi linearly
/// interpolated in time between samples).
class FlowCoupledCoefficients final : public CoefficientProvider {
  public:
    FlowCoupledCoefficients(std::shared_ptr<FlowEngine> engine, const FlowResult& traj,
                            double time_offset = 0.0);
    const CoefficientFields& at(double t) override;

  private:
    std::shared_ptr<FlowEngine> engine_;
    const FlowResult* traj_;
    double offset_;
    double cached_t_ = -1.0;
    CoefficientFields cached_;
};

struct LinearRunConfig {
    std::shared_ptr<CoefficientProvider> coeffs;
    ScalarField u0;  // strictly positive
    double t_end = 1.0;
    double alpha = 1.5;  // open interval (1, 2)
    double c_cfl = 0.2;
    std::vector<double> sample_times;  // ascending, in (0, t_end]
    DerivMethod method = DerivMethod::spectral;
    Integrator integrator = Integrator::rk4;
};

struct LinearTrajectory {
    std::vector<double> times;
    std::vector<ScalarField> u;
    std::vector<ScalarField> u_t;  // operator applied at the sample
    double ellipticity_min = 0.0;
    double ellipticity_max = 0.0;
    double alpha = 1.5;

    std::ptrdiff_t index_of(double t) const;  // exact sample lookup
};

/// Apply G^{ij} d_i d_jbar u + 2 Re(chi_k d_k u) + chi0 u.
void apply_linear_operator(const ScalarField& u, const CoefficientFields& cf,
                           const Differentiator& diff, DerivMethod method, ScalarField& out,
                           FieldWorkspace& ws);

/// Explicit stepping of the linearized equation with the flow's CFL rule
/// applied to the measured sup-ellipticity. Positivity is asserted at every
/// sample.
LinearTrajectory solve_linear(const LinearRunConfig& cfg);

/// F = t (|df|^2 - alpha f_t) with f = log u; all norms taken with respect
/// to G^{ij}. f_t comes from the PDE right-hand side, not time differencing.
ScalarField li_yau_quantity(const ScalarField& u, const ScalarField& u_t,
                            const CoefficientFields& cf, double t, double alpha);

struct LiYauFit {
    double C1 = 0.0;
    double C2 = 0.0;
    double max_residual = 0.0;            // before the envelope shift
    std::vector<double> envelope_values;  // sup_x (|df|^2 - alpha f_t) per sample
};

/// Nonnegative least squares of sup_x(|df|^2 - alpha f_t) against (1, 1/t),
/// lifted to an upper envelope.
LiYauFit fit_li_yau_constants(const LinearTrajectory& traj, CoefficientProvider& coeffs,
                              double alpha);

struct HarnackReport {
    double t1 = 0.0, t2 = 0.0;
    double sup_u_t1 = 0.0, inf_u_t2 = 0.0;
    double ratio = 0.0;
    double C1 = 0.0, C2 = 0.0, C3 = 0.0;  // fitted_constants
    double bound = 0.0;
    bool satisfied = false;
};

/// sup u(., t1) <= (t2/t1)^{C2} exp(C3/(t2-t1) + C1 (t2-t1)) inf u(., t2).
/// When no constants are supplied, C1 and C2 come from the Li-Yau fit and C3
/// from the path bound alpha d^2 sup-ellipticity / 4.
HarnackReport harnack_verify(const LinearTrajectory& traj, double t1, double t2,
                             const double* constants3 = nullptr,
                             CoefficientProvider* coeffs = nullptr, double diameter = 0.0);

}  // namespace lambdaflow
