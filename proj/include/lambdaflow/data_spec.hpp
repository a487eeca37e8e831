#pragma once

#include "lambdaflow/torus.hpp"

namespace lambdaflow {

enum class XKind { zero, scaled_identity, prescribed_field, gradient_coupled };
enum class PsiKind { constant, prescribed_field, manufactured };

/// The data (X, psi) of the flow. All supported kinds are independent of the
/// value of phi (gradient_coupled still reads d phi), so chi_0 vanishes and
/// (U0.1) holds with equality; phi_dependence is kept as a config-level flag
/// and must stay false for convergence runs.
struct DataSpec {
    XKind x_kind = XKind::zero;
    double x_c = 0.0;  // scaled_identity / gradient_coupled coefficient
    HermitianField x_field;

    PsiKind psi_kind = PsiKind::constant;
    double psi_value = 0.0;
    ScalarField psi_field;            // prescribed, or realized manufactured psi
    ScalarField manufactured_target;  // phi* the manufactured psi was built from
    bool psi_realized = false;

    bool phi_dependence = false;

    bool x_needs_gradient() const { return x_kind == XKind::gradient_coupled; }

    /// Add X[phi] to an assembled Hermitian field; grad is required for
    /// gradient_coupled and ignored otherwise.
    void add_x(HermitianField& g, const GradientField* grad) const;

    double psi_at(std::ptrdiff_t node) const {
        return psi_kind == PsiKind::constant ? psi_value : psi_field.v[node];
    }
    double psi_inf() const;
    double psi_sup() const;
};

}  // namespace lambdaflow
