#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "lambdaflow/errors.hpp"

namespace lambdaflow {

using cplx = std::complex<double>;

/// Periodic grid on the flat complex torus. Real axes are ordered
/// x1,y1,...,xn,yn; axis resolution 1 freezes the field along that axis.
/// Node indexing is row-major with axis 0 slowest.
struct TorusGrid {
    int n = 0;
    std::vector<int> resolutions;
    std::vector<double> periods;
    std::vector<double> spacings;
    std::vector<std::ptrdiff_t> strides;
    std::ptrdiff_t total_nodes = 0;

    static TorusGrid create(int n, std::vector<int> resolutions,
                            std::vector<double> periods = {});

    int axes() const { return 2 * n; }
    bool frozen(int axis) const { return resolutions[axis] == 1; }
    /// Half the diagonal of the period box.
    double diameter() const;
    /// Smallest spacing among non-frozen axes (the whole box if all frozen).
    double h_min_active() const;
    std::vector<int> node_coords(std::ptrdiff_t idx) const;
    double axis_coord(int axis, int index) const { return spacings[axis] * index; }

    bool same_layout(const TorusGrid& o) const {
        return n == o.n && resolutions == o.resolutions && periods == o.periods;
    }
};

struct ScalarField {
    TorusGrid grid;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(const TorusGrid& g, double fill = 0.0)
        : grid(g), v(static_cast<std::size_t>(g.total_nodes), fill) {}

    double& operator[](std::ptrdiff_t i) { return v[i]; }
    double operator[](std::ptrdiff_t i) const { return v[i]; }
    std::ptrdiff_t size() const { return static_cast<std::ptrdiff_t>(v.size()); }
};

/// n x n complex matrix per node, row-major per node. Construction via
/// make_hermitian symmetrizes, which keeps ||H - H^dagger|| at rounding level.
struct HermitianField {
    TorusGrid grid;
    std::vector<cplx> m;

    HermitianField() = default;
    explicit HermitianField(const TorusGrid& g)
        : grid(g), m(static_cast<std::size_t>(g.total_nodes) * g.n * g.n, cplx(0.0)) {}

    cplx* node(std::ptrdiff_t i) { return m.data() + i * grid.n * grid.n; }
    const cplx* node(std::ptrdiff_t i) const { return m.data() + i * grid.n * grid.n; }

    void symmetrize();
};

/// Holomorphic gradient: n complex components per node plus |grad|^2.
struct GradientField {
    TorusGrid grid;
    std::vector<cplx> g;
    ScalarField norm_sq;

    GradientField() = default;
    explicit GradientField(const TorusGrid& gr)
        : grid(gr), g(static_cast<std::size_t>(gr.total_nodes) * gr.n, cplx(0.0)),
          norm_sq(gr) {}

    cplx* node(std::ptrdiff_t i) { return g.data() + i * grid.n; }
    const cplx* node(std::ptrdiff_t i) const { return g.data() + i * grid.n; }
};

/// Per-node eigenvalues (descending) and a unitary frame, H = U diag(l) U^dagger.
struct EigenField {
    TorusGrid grid;
    std::vector<double> lambda;  // n per node
    std::vector<cplx> frame;     // n*n per node, columns are eigenvectors

    EigenField() = default;
    explicit EigenField(const TorusGrid& g)
        : grid(g), lambda(static_cast<std::size_t>(g.total_nodes) * g.n),
          frame(static_cast<std::size_t>(g.total_nodes) * g.n * g.n) {}

    double* values(std::ptrdiff_t i) { return lambda.data() + i * grid.n; }
    const double* values(std::ptrdiff_t i) const { return lambda.data() + i * grid.n; }
    cplx* vectors(std::ptrdiff_t i) { return frame.data() + i * grid.n * grid.n; }
    const cplx* vectors(std::ptrdiff_t i) const { return frame.data() + i * grid.n * grid.n; }
};

/// Plain grid average with a fixed-order pairwise reduction (midpoint rule,
/// spectrally accurate for smooth periodic fields; deterministic across
/// thread counts).
double integrate_mean(const ScalarField& field);

/// phi - mean(phi), the paper's normalization.
ScalarField normalize(const ScalarField& phi);

double field_min(const ScalarField& f);
double field_max(const ScalarField& f);
double field_sup_abs(const ScalarField& f);
/// sup - inf of a field.
double oscillation(const ScalarField& f);

void require_finite(const ScalarField& f, const char* what);

/// Eigendecomposition per node; throws NumericalError (with node index) if a
/// reconstruction residual exceeds 1e-9 * (1 + ||H||_max).
EigenField eigen_decompose(const HermitianField& H);

/// Values-only fast path (descending), no frames.
void eigenvalues_only(const HermitianField& H, std::vector<double>& out);

}  // namespace lambdaflow
