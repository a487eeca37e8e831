#include "lambdaflow/data_spec.hpp"

#include <algorithm>

#include "lambdaflow/parallel.hpp"

namespace lambdaflow {

void DataSpec::add_x(HermitianField& g, const GradientField* grad) const {
    const int n = g.grid.n;
    switch (x_kind) {
        case XKind::zero:
            return;
        case XKind::scaled_identity:
            for_each_index(g.grid.total_nodes, [&](std::ptrdiff_t p) {
                cplx* h = g.node(p);
                for (int i = 0; i < n; ++i) h[i * n + i] += x_c;
            });
            return;
        case XKind::prescribed_field:
            if (!x_field.grid.same_layout(g.grid))
                throw InvalidStructureError("DataSpec: prescribed X grid mismatch");
            for_each_index(g.grid.total_nodes, [&](std::ptrdiff_t p) {
                cplx* h = g.node(p);
                const cplx* x = x_field.node(p);
                for (int i = 0; i < n * n; ++i) h[i] += x[i];
            });
            return;
        case XKind::gradient_coupled:
            // X = c (1 + |grad phi|^2)^{-1} omega: bounded first-order coupling.
            if (!grad) throw InvalidStructureError("DataSpec: gradient required for X");
            for_each_index(g.grid.total_nodes, [&](std::ptrdiff_t p) {
                cplx* h = g.node(p);
                const double w = x_c / (1.0 + grad->norm_sq.v[p]);
                for (int i = 0; i < n; ++i) h[i * n + i] += w;
            });
            return;
    }
}

double DataSpec::psi_inf() const {
    if (psi_kind == PsiKind::constant) return psi_value;
    return field_min(psi_field);
}

double DataSpec::psi_sup() const {
    if (psi_kind == PsiKind::constant) return psi_value;
    return field_max(psi_field);
}

}  // namespace lambdaflow
