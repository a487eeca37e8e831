#pragma once

#include <map>
#include <memory>
#include <vector>

#include "lambdaflow/torus.hpp"

namespace lambdaflow {

enum class DerivMethod { spectral, central4 };

/// Periodic differentiation along grid axes. The spectral path runs cached
/// FFTW line transforms (exact for resolved modes); central4 uses 4th-order
/// stencils. Sweeps are parallel over lines; per-line work is pure.
class Differentiator {
  public:
    explicit Differentiator(const TorusGrid& grid);
    ~Differentiator();
    Differentiator(const Differentiator&) = delete;
    Differentiator& operator=(const Differentiator&) = delete;

    const TorusGrid& grid() const { return grid_; }

    /// d/dx_axis; frozen axes produce a zero field.
    void first(const ScalarField& in, int axis, ScalarField& out,
               DerivMethod method = DerivMethod::spectral) const;
    /// d^2/dx_axis^2 (spectral: -k^2 symbol, Nyquist included).
    void second(const ScalarField& in, int axis, ScalarField& out,
                DerivMethod method = DerivMethod::spectral) const;

    /// First-derivative symbol value for integer mode k (unit: 1/length);
    /// the second returns the (negative) second-derivative symbol.
    double symbol_first(int axis, int mode) const;
    double symbol_second(int axis, int mode, DerivMethod method = DerivMethod::spectral) const;

  private:
    struct Plans;
    TorusGrid grid_;
    std::unique_ptr<Plans> plans_;

    void sweep_spectral(const ScalarField& in, int axis, ScalarField& out, bool second) const;
    void sweep_central4(const ScalarField& in, int axis, ScalarField& out, bool second) const;
};

struct FieldWorkspace {
    std::vector<ScalarField> first;  // one per real axis
    ScalarField tmp, tmp2, tmp3, tmp4;
    HermitianField hess;
    std::vector<double> lam;  // total_nodes * n eigenvalue scratch
};

FieldWorkspace make_workspace(const TorusGrid& grid);

/// sqrt(-1) d dbar phi for real phi:
/// H_ij = 1/4 [ (dxi dxj + dyi dyj) + i (dxi dyj - dyi dxj) ] phi.
/// Hermitian by construction.
void complex_hessian(const ScalarField& phi, const Differentiator& diff, DerivMethod method,
                     HermitianField& out, FieldWorkspace& ws);
HermitianField complex_hessian(const ScalarField& phi,
                               DerivMethod method = DerivMethod::spectral);

/// d_i phi = (dx_i phi - i dy_i phi)/2 and |grad phi|^2 = sum |d_i phi|^2.
void holomorphic_gradient(const ScalarField& phi, const Differentiator& diff,
                          DerivMethod method, GradientField& out, FieldWorkspace& ws);
GradientField holomorphic_gradient(const ScalarField& phi,
                                   DerivMethod method = DerivMethod::spectral);

/// Full real Laplacian (sum of plain second derivatives over all axes),
/// computed directly; trace(complex_hessian) must equal a quarter of it.
void real_laplacian(const ScalarField& phi, const Differentiator& diff, DerivMethod method,
                    ScalarField& out, FieldWorkspace& ws);

namespace ref {
/// Naive O(R^2) trigonometric DFT derivative along one axis. Serial reference
/// for the FFT path, kept for tests and benchmarks.
void derivative_naive(const ScalarField& in, int axis, bool second, ScalarField& out);
}  // namespace ref

}  // namespace lambdaflow
