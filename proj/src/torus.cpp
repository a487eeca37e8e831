#include "lambdaflow/torus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "lambdaflow/eigen_herm.hpp"
#include "lambdaflow/parallel.hpp"

namespace lambdaflow {

TorusGrid TorusGrid::create(int n, std::vector<int> resolutions, std::vector<double> periods) {
    if (n < 1 || n > 8) throw InvalidStructureError("TorusGrid: need 1 <= n <= 8");
    if (static_cast<int>(resolutions.size()) != 2 * n)
        throw InvalidStructureError("TorusGrid: expected 2n = " + std::to_string(2 * n) +
                                    " resolutions, got " + std::to_string(resolutions.size()));
    if (periods.empty()) periods.assign(2 * n, 1.0);
    if (static_cast<int>(periods.size()) != 2 * n)
        throw InvalidStructureError("TorusGrid: expected 2n periods");
    TorusGrid g;
    g.n = n;
    g.resolutions = std::move(resolutions);
    g.periods = std::move(periods);
    g.spacings.resize(2 * n);
    g.strides.assign(2 * n, 1);
    g.total_nodes = 1;
    for (int a = 0; a < 2 * n; ++a) {
        if (g.resolutions[a] < 1) throw InvalidStructureError("TorusGrid: resolutions >= 1");
        if (g.periods[a] <= 0.0) throw InvalidStructureError("TorusGrid: periods > 0");
        g.spacings[a] = g.periods[a] / g.resolutions[a];
        g.total_nodes *= g.resolutions[a];
    }
    for (int a = 2 * n - 2; a >= 0; --a)
        g.strides[a] = g.strides[a + 1] * g.resolutions[a + 1];
    return g;
}

double TorusGrid::diameter() const {
    double s = 0.0;
    for (double p : periods) s += p * p;
    return 0.5 * std::sqrt(s);
}

double TorusGrid::h_min_active() const {
    double h = std::numeric_limits<double>::infinity();
    for (int a = 0; a < axes(); ++a)
        if (!frozen(a)) h = std::min(h, spacings[a]);
    return std::isfinite(h) ? h : periods[0];
}

std::vector<int> TorusGrid::node_coords(std::ptrdiff_t idx) const {
    std::vector<int> c(axes());
    for (int a = 0; a < axes(); ++a) {
        c[a] = static_cast<int>(idx / strides[a]);
        idx %= strides[a];
    }
    return c;
}

void HermitianField::symmetrize() {
    const int n = grid.n;
    for_each_index(grid.total_nodes, [&](std::ptrdiff_t i) {
        cplx* h = node(i);
        for (int r = 0; r < n; ++r) {
            h[r * n + r] = cplx(h[r * n + r].real());
            for (int c = r + 1; c < n; ++c) {
                const cplx avg = 0.5 * (h[r * n + c] + std::conj(h[c * n + r]));
                h[r * n + c] = avg;
                h[c * n + r] = std::conj(avg);
            }
        }
    });
}

double integrate_mean(const ScalarField& field) {
    return pairwise_sum(field.v) / static_cast<double>(field.grid.total_nodes);
}

ScalarField normalize(const ScalarField& phi) {
    const double mean = integrate_mean(phi);
    ScalarField out(phi.grid);
    for_each_index(phi.size(), [&](std::ptrdiff_t i) { out.v[i] = phi.v[i] - mean; });
    return out;
}

double field_min(const ScalarField& f) {
    double m = std::numeric_limits<double>::infinity();
    for (double x : f.v) m = std::min(m, x);
    return m;
}

double field_max(const ScalarField& f) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : f.v) m = std::max(m, x);
    return m;
}

double field_sup_abs(const ScalarField& f) {
    double m = 0.0;
    for (double x : f.v) m = std::max(m, std::abs(x));
    return m;
}

double oscillation(const ScalarField& f) { return field_max(f) - field_min(f); }

void require_finite(const ScalarField& f, const char* what) {
    for (std::ptrdiff_t i = 0; i < f.size(); ++i)
        if (!std::isfinite(f.v[i]))
            throw NumericalError(std::string(what) + ": non-finite value", i);
}

EigenField eigen_decompose(const HermitianField& H) {
    const int n = H.grid.n;
    EigenField out(H.grid);
    double sup = 0.0;
    for (const cplx& z : H.m) sup = std::max(sup, std::abs(z));
    const double tol = 1e-9 * (1.0 + sup);
    std::vector<std::ptrdiff_t> bad(H.grid.total_nodes, -1);

    for_each_index(H.grid.total_nodes, [&](std::ptrdiff_t i) {
        const cplx* A = H.node(i);
        double* ev = out.values(i);
        cplx* V = out.vectors(i);
        try {
            if (n == 1) {
                ev[0] = A[0].real();
                V[0] = cplx(1.0);
            } else if (n == 2) {
                eig2_hermitian(A, ev, V);
            } else {
                jacobi_hermitian(A, n, ev, V);
            }
        } catch (const NumericalError&) {
            bad[i] = i;
            return;
        }
        // Fix eigenvector phases: largest-magnitude component real positive.
        for (int c = 0; c < n; ++c) {
            int arg = 0;
            double best = -1.0;
            for (int r = 0; r < n; ++r) {
                const double a = std::abs(V[r * n + c]);
                if (a > best + 1e-15) {
                    best = a;
                    arg = r;
                }
            }
            const cplx pivot = V[arg * n + c];
            if (std::abs(pivot) > 0.0) {
                const cplx phase = std::conj(pivot) / std::abs(pivot);
                for (int r = 0; r < n; ++r) V[r * n + c] *= phase;
            }
        }
        // Reconstruction residual ||H U - U diag(l)||_max.
        double resid = 0.0;
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < n; ++c) {
                cplx acc(0.0);
                for (int m = 0; m < n; ++m) acc += A[r * n + m] * V[m * n + c];
                acc -= V[r * n + c] * ev[c];
                resid = std::max(resid, std::abs(acc));
            }
        }
        if (resid > tol) bad[i] = i;
    });

    for (std::ptrdiff_t i = 0; i < H.grid.total_nodes; ++i)
        if (bad[i] >= 0)
            throw NumericalError("eigen_decompose: residual above tolerance at node " +
                                     std::to_string(i),
                                 i);
    return out;
}

void eigenvalues_only(const HermitianField& H, std::vector<double>& out) {
    const int n = H.grid.n;
    out.resize(static_cast<std::size_t>(H.grid.total_nodes) * n);
    for_each_index(H.grid.total_nodes, [&](std::ptrdiff_t i) {
        hermitian_eigenvalues(H.node(i), n, out.data() + i * n);
    });
}

}  // namespace lambdaflow
