#include "lambdaflow/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>

#include "lambdaflow/parallel.hpp"

namespace lambdaflow {

namespace {
constexpr double kTwoPi = 6.283185307179586476925287;

struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};
}  // namespace

struct Differentiator::Plans {
    std::map<int, PlanPair> by_res;
    ~Plans() {
        for (auto& [res, p] : by_res) {
            if (p.fwd) fftw_destroy_plan(p.fwd);
            if (p.bwd) fftw_destroy_plan(p.bwd);
        }
    }
};

Differentiator::Differentiator(const TorusGrid& grid) : grid_(grid), plans_(new Plans) {
    // Plan creation is not thread-safe; do it all up front. Unaligned in-place
    // plans can then be executed on any per-thread buffer.
    for (int a = 0; a < grid_.axes(); ++a) {
        const int R = grid_.resolutions[a];
        if (R == 1 || plans_->by_res.count(R)) continue;
        std::vector<fftw_complex> buf(R);
        PlanPair p;
        p.fwd = fftw_plan_dft_1d(R, buf.data(), buf.data(), FFTW_FORWARD,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
        p.bwd = fftw_plan_dft_1d(R, buf.data(), buf.data(), FFTW_BACKWARD,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_->by_res[R] = p;
    }
}

Differentiator::~Differentiator() = default;

double Differentiator::symbol_first(int axis, int mode) const {
    const int R = grid_.resolutions[axis];
    if (R == 1) return 0.0;
    if (2 * std::abs(mode) == R) return 0.0;  // Nyquist
    return kTwoPi * mode / grid_.periods[axis];
}

double Differentiator::symbol_second(int axis, int mode, DerivMethod method) const {
    const int R = grid_.resolutions[axis];
    if (R == 1) return 0.0;
    const double h = grid_.spacings[axis];
    if (method == DerivMethod::spectral) {
        const double w = kTwoPi * mode / grid_.periods[axis];
        return -w * w;
    }
    const double th = kTwoPi * mode * h / grid_.periods[axis];
    return (-2.0 * std::cos(2.0 * th) + 32.0 * std::cos(th) - 30.0) / (12.0 * h * h);
}

void Differentiator::sweep_spectral(const ScalarField& in, int axis, ScalarField& out,
                                    bool second) const {
    const int R = grid_.resolutions[axis];
    const std::ptrdiff_t stride = grid_.strides[axis];
    const std::ptrdiff_t lines = grid_.total_nodes / R;
    const double L = grid_.periods[axis];
    const PlanPair plan = plans_->by_res.at(R);

    // Per-mode symbol: i*k for first derivatives (Nyquist killed), -k^2 for
    // second derivatives (Nyquist kept).
    std::vector<cplx> symbol(R);
    for (int j = 0; j < R; ++j) {
        const int k = (j <= R / 2) ? j : j - R;
        const double w = kTwoPi * k / L;
        if (second)
            symbol[j] = cplx(-w * w / R, 0.0);
        else if (2 * j == R)
            symbol[j] = cplx(0.0);
        else
            symbol[j] = cplx(0.0, w / R);  // 1/R folds in the inverse-DFT scale
    }

#pragma omp parallel
    {
        std::vector<cplx> buf(R);
#pragma omp for schedule(static)
        for (std::ptrdiff_t l = 0; l < lines; ++l) {
            const std::ptrdiff_t base = (l / stride) * stride * R + (l % stride);
            for (int j = 0; j < R; ++j) buf[j] = cplx(in.v[base + j * stride], 0.0);
            fftw_execute_dft(plan.fwd, reinterpret_cast<fftw_complex*>(buf.data()),
                             reinterpret_cast<fftw_complex*>(buf.data()));
            for (int j = 0; j < R; ++j) buf[j] *= symbol[j];
            fftw_execute_dft(plan.bwd, reinterpret_cast<fftw_complex*>(buf.data()),
                             reinterpret_cast<fftw_complex*>(buf.data()));
            for (int j = 0; j < R; ++j) out.v[base + j * stride] = buf[j].real();
        }
    }
}

void Differentiator::sweep_central4(const ScalarField& in, int axis, ScalarField& out,
                                    bool second) const {
    const int R = grid_.resolutions[axis];
    const std::ptrdiff_t stride = grid_.strides[axis];
    const std::ptrdiff_t lines = grid_.total_nodes / R;
    const double h = grid_.spacings[axis];

#pragma omp parallel
    {
        std::vector<double> buf(R);
#pragma omp for schedule(static)
        for (std::ptrdiff_t l = 0; l < lines; ++l) {
            const std::ptrdiff_t base = (l / stride) * stride * R + (l % stride);
            for (int j = 0; j < R; ++j) buf[j] = in.v[base + j * stride];
            for (int j = 0; j < R; ++j) {
                const double fm2 = buf[(j - 2 + 2 * R) % R];
                const double fm1 = buf[(j - 1 + R) % R];
                const double fp1 = buf[(j + 1) % R];
                const double fp2 = buf[(j + 2) % R];
                out.v[base + j * stride] =
                    second ? (-fp2 + 16.0 * fp1 - 30.0 * buf[j] + 16.0 * fm1 - fm2) /
                                 (12.0 * h * h)
                           : (8.0 * (fp1 - fm1) - (fp2 - fm2)) / (12.0 * h);
            }
        }
    }
}

void Differentiator::first(const ScalarField& in, int axis, ScalarField& out,
                           DerivMethod method) const {
    if (!in.grid.same_layout(grid_))
        throw InvalidStructureError("Differentiator: field grid mismatch");
    if (out.size() != in.size()) out = ScalarField(grid_);
    if (grid_.frozen(axis)) {
        std::fill(out.v.begin(), out.v.end(), 0.0);
        return;
    }
    if (method == DerivMethod::spectral)
        sweep_spectral(in, axis, out, false);
    else
        sweep_central4(in, axis, out, false);
}

void Differentiator::second(const ScalarField& in, int axis, ScalarField& out,
                            DerivMethod method) const {
    if (!in.grid.same_layout(grid_))
        throw InvalidStructureError("Differentiator: field grid mismatch");
    if (out.size() != in.size()) out = ScalarField(grid_);
    if (grid_.frozen(axis)) {
        std::fill(out.v.begin(), out.v.end(), 0.0);
        return;
    }
    if (method == DerivMethod::spectral)
        sweep_spectral(in, axis, out, true);
    else
        sweep_central4(in, axis, out, true);
}

FieldWorkspace make_workspace(const TorusGrid& grid) {
    FieldWorkspace ws;
    ws.first.assign(grid.axes(), ScalarField(grid));
    ws.tmp = ScalarField(grid);
    ws.tmp2 = ScalarField(grid);
    ws.tmp3 = ScalarField(grid);
    ws.tmp4 = ScalarField(grid);
    ws.hess = HermitianField(grid);
    ws.lam.assign(static_cast<std::size_t>(grid.total_nodes) * grid.n, 0.0);
    return ws;
}

void complex_hessian(const ScalarField& phi, const Differentiator& diff, DerivMethod method,
                     HermitianField& out, FieldWorkspace& ws) {
    const TorusGrid& g = phi.grid;
    const int n = g.n;
    if (out.m.size() != static_cast<std::size_t>(g.total_nodes) * n * n)
        out = HermitianField(g);

    for (int a = 0; a < g.axes(); ++a) diff.first(phi, a, ws.first[a], method);

    ScalarField& tA = ws.tmp;
    ScalarField& tB = ws.tmp2;

    // diagonal: H_ii = (dxi^2 + dyi^2) phi / 4
    for (int i = 0; i < n; ++i) {
        diff.second(phi, 2 * i, tA, method);
        diff.second(phi, 2 * i + 1, tB, method);
        for_each_index(g.total_nodes, [&](std::ptrdiff_t p) {
            out.node(p)[i * n + i] = cplx(0.25 * (tA.v[p] + tB.v[p]), 0.0);
        });
    }

    auto mixed = [&](int a, int b, ScalarField& dst) {
        // d_a d_b phi via a second sweep over the cached first derivative
        if (g.frozen(a) || g.frozen(b)) {
            std::fill(dst.v.begin(), dst.v.end(), 0.0);
            return;
        }
        diff.first(ws.first[a], b, dst, method);
    };

    ScalarField& tC = ws.tmp3;
    ScalarField& tD = ws.tmp4;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            mixed(2 * i, 2 * j, tA);          // dxi dxj
            mixed(2 * i + 1, 2 * j + 1, tB);  // dyi dyj
            mixed(2 * i, 2 * j + 1, tC);      // dxi dyj
            mixed(2 * i + 1, 2 * j, tD);      // dyi dxj
            for_each_index(g.total_nodes, [&](std::ptrdiff_t p) {
                const cplx h(0.25 * (tA.v[p] + tB.v[p]), 0.25 * (tC.v[p] - tD.v[p]));
                out.node(p)[i * n + j] = h;
                out.node(p)[j * n + i] = std::conj(h);
            });
        }
    }
}

HermitianField complex_hessian(const ScalarField& phi, DerivMethod method) {
    require_finite(phi, "complex_hessian");
    Differentiator diff(phi.grid);
    FieldWorkspace ws = make_workspace(phi.grid);
    HermitianField out(phi.grid);
    complex_hessian(phi, diff, method, out, ws);
    return out;
}

void holomorphic_gradient(const ScalarField& phi, const Differentiator& diff,
                          DerivMethod method, GradientField& out, FieldWorkspace& ws) {
    const TorusGrid& g = phi.grid;
    const int n = g.n;
    if (out.g.size() != static_cast<std::size_t>(g.total_nodes) * n) out = GradientField(g);
    for (int a = 0; a < g.axes(); ++a) diff.first(phi, a, ws.first[a], method);
    for_each_index(g.total_nodes, [&](std::ptrdiff_t p) {
        double s = 0.0;
        cplx* gp = out.node(p);
        for (int i = 0; i < n; ++i) {
            gp[i] = 0.5 * cplx(ws.first[2 * i].v[p], -ws.first[2 * i + 1].v[p]);
            s += std::norm(gp[i]);
        }
        out.norm_sq.v[p] = s;
    });
}

GradientField holomorphic_gradient(const ScalarField& phi, DerivMethod method) {
    require_finite(phi, "holomorphic_gradient");
    Differentiator diff(phi.grid);
    FieldWorkspace ws = make_workspace(phi.grid);
    GradientField out(phi.grid);
    holomorphic_gradient(phi, diff, method, out, ws);
    return out;
}

void real_laplacian(const ScalarField& phi, const Differentiator& diff, DerivMethod method,
                    ScalarField& out, FieldWorkspace& ws) {
    const TorusGrid& g = phi.grid;
    if (out.size() != phi.size()) out = ScalarField(g);
    std::fill(out.v.begin(), out.v.end(), 0.0);
    for (int a = 0; a < g.axes(); ++a) {
        if (g.frozen(a)) continue;
        diff.second(phi, a, ws.tmp, method);
        for_each_index(g.total_nodes, [&](std::ptrdiff_t p) { out.v[p] += ws.tmp.v[p]; });
    }
}

namespace ref {

void derivative_naive(const ScalarField& in, int axis, bool second, ScalarField& out) {
    const TorusGrid& g = in.grid;
    const int R = g.resolutions[axis];
    if (out.size() != in.size()) out = ScalarField(g);
    if (R == 1) {
        std::fill(out.v.begin(), out.v.end(), 0.0);
        return;
    }
    const std::ptrdiff_t stride = g.strides[axis];
    const std::ptrdiff_t lines = g.total_nodes / R;
    const double L = g.periods[axis];
    for (std::ptrdiff_t l = 0; l < lines; ++l) {
        const std::ptrdiff_t base = (l / stride) * stride * R + (l % stride);
        for (int j = 0; j < R; ++j) {
            cplx acc(0.0);
            for (int kidx = 0; kidx < R; ++kidx) {
                const int k = (kidx <= R / 2) ? kidx : kidx - R;
                const double w = kTwoPi * k / L;
                cplx sym;
                if (second)
                    sym = cplx(-w * w, 0.0);
                else if (2 * kidx == R)
                    sym = cplx(0.0);
                else
                    sym = cplx(0.0, w);
                if (sym == cplx(0.0)) continue;
                cplx coef(0.0);
                for (int m = 0; m < R; ++m) {
                    const double ang = -kTwoPi * k * m / R;
                    coef += in.v[base + m * stride] * cplx(std::cos(ang), std::sin(ang));
                }
                const double ang = kTwoPi * k * j / R;
                acc += sym * coef * cplx(std::cos(ang), std::sin(ang));
            }
            out.v[base + j * stride] = acc.real() / R;
        }
    }
}

}  // namespace ref

}  // namespace lambdaflow
