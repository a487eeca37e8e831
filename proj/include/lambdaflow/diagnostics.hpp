#pragma once

#include <vector>

namespace lambdaflow {

/// One monitored row of a flow run; realizes the paper's estimate statements
/// as observed quantities (sup|phi_t|, the gradient-bound ratio, sup|ddbar
/// phi|, the oscillation-vs-diameter slot, the chi_0 sign).
struct DiagnosticsRecord {
    double t = 0.0;
    double sup_phi_t = 0.0;
    double inf_phi_t = 0.0;
    double osc_phi_t = 0.0;
    double sup_grad_sq = 0.0;
    double grad_bound_ratio = 0.0;  // max_x |grad phi|^2 / (1 + sup phi - phi)
    double sup_hess = 0.0;          // max node operator norm of ddbar phi
    double osc_phi = 0.0;
    double diameter_bound = 0.0;  // max{d, d^2} geometry slot
    double admissibility_margin = 0.0;
    double chi0_max = 0.0;
    double residual = 0.0;  // sup |phi_t - mean(phi_t)|

    long long steps_since_last = 0;  // bookkeeping only, not a CSV column
};

/// CSV column order pinned by the reporting interface.
inline const std::vector<const char*>& diagnostics_columns() {
    static const std::vector<const char*> cols = {
        "t",        "sup_phi_t",           "inf_phi_t", "osc_phi_t", "sup_grad_sq",
        "grad_bound_ratio", "sup_hess",    "osc_phi",   "admissibility_margin",
        "chi0_max", "residual"};
    return cols;
}

}  // namespace lambdaflow
