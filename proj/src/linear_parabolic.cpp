#include "lambdaflow/linear_parabolic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lambdaflow/parallel.hpp"

namespace lambdaflow {

namespace {
constexpr double kPiSq = 9.869604401089358618834491;
}

FlowCoupledCoefficients::FlowCoupledCoefficients(std::shared_ptr<FlowEngine> engine,
                                                 const FlowResult& traj, double time_offset)
    : engine_(std::move(engine)), traj_(&traj), offset_(time_offset) {
    if (traj_->snapshots.empty())
        throw InvalidStructureError("FlowCoupledCoefficients: trajectory has no snapshots");
}

const CoefficientFields& FlowCoupledCoefficients::at(double t) {
    const double tt = t + offset_;
    if (cached_t_ >= 0.0 && std::abs(tt - cached_t_) < 1e-12) return cached_;
    const auto& snaps = traj_->snapshots;
    // locate bracketing snapshots and interpolate phi linearly
    std::size_t hi = 0;
    while (hi + 1 < snaps.size() && snaps[hi].t < tt - 1e-12) ++hi;
    FlowState st;
    if (hi == 0 || std::abs(snaps[hi].t - tt) < 1e-12) {
        st.phi = snaps[hi].phi;
        st.t = snaps[hi].t;
    } else {
        const auto& a = snaps[hi - 1];
        const auto& b = snaps[hi];
        const double w = std::clamp((tt - a.t) / (b.t - a.t), 0.0, 1.0);
        st.phi = a.phi;
        for (std::ptrdiff_t p = 0; p < st.phi.size(); ++p)
            st.phi.v[p] = (1.0 - w) * a.phi.v[p] + w * b.phi.v[p];
        st.t = tt;
    }
    cached_ = engine_->linearized_coefficients(st);
    cached_t_ = tt;
    return cached_;
}

std::ptrdiff_t LinearTrajectory::index_of(double t) const {
    for (std::size_t i = 0; i < times.size(); ++i)
        if (std::abs(times[i] - t) < 1e-9) return static_cast<std::ptrdiff_t>(i);
    throw InvalidStructureError("requested time " + std::to_string(t) +
                                " is not in the sample set");
}

void apply_linear_operator(const ScalarField& u, const CoefficientFields& cf,
                           const Differentiator& diff, DerivMethod method, ScalarField& out,
                           FieldWorkspace& ws) {
    const TorusGrid& g = u.grid;
    const int n = g.n;
    complex_hessian(u, diff, method, ws.hess, ws);
    if (out.size() != u.size()) out = ScalarField(g);

    const bool with_chi0 = field_sup_abs(cf.chi0) > 0.0;
    for_each_index(g.total_nodes, [&](std::ptrdiff_t p) {
        const cplx* G = cf.G.node(p);
        const cplx* H = ws.hess.node(p);
        // sum_{ij} G^{ij} u_{ij} = trace(P Hu), both Hermitian => real
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            acc += G[i * n + i].real() * H[i * n + i].real();
            for (int j = i + 1; j < n; ++j)
                acc += 2.0 * (std::conj(G[i * n + j]) * H[i * n + j]).real();
        }
        out.v[p] = acc;
    });
    if (cf.has_chi) {
        // chi_k u_k + conj terms = 2 Re(chi_k d_k u); ws.first holds the
        // plain axis derivatives from the hessian pass
        for_each_index(g.total_nodes, [&](std::ptrdiff_t p) {
            cplx acc(0.0);
            for (int k = 0; k < n; ++k) {
                const cplx dk =
                    0.5 * cplx(ws.first[2 * k].v[p], -ws.first[2 * k + 1].v[p]);
                acc += cf.chi[p * n + k] * dk;
            }
            out.v[p] += 2.0 * acc.real();
        });
    }
    if (with_chi0)
        for_each_index(g.total_nodes,
                       [&](std::ptrdiff_t p) { out.v[p] += cf.chi0.v[p] * u.v[p]; });
}

LinearTrajectory solve_linear(const LinearRunConfig& cfg) {
    if (!cfg.coeffs) throw InvalidStructureError("solve_linear: no coefficient provider");
    if (cfg.alpha <= 1.0 || cfg.alpha >= 2.0)
        throw InvalidStructureError("solve_linear: alpha must lie in (1, 2)");
    const TorusGrid g = cfg.u0.grid;
    require_finite(cfg.u0, "u0");
    if (field_min(cfg.u0) <= 0.0)
        throw NumericalError("solve_linear: u0 must be strictly positive");

    const CoefficientFields& cf0 = cfg.coeffs->at(0.0);
    if (cf0.ellipticity_min <= 0.0)
        throw NumericalError("solve_linear: degenerate ellipticity (min <= 0)");

    Differentiator diff(g);
    FieldWorkspace ws = make_workspace(g);

    LinearTrajectory out;
    out.alpha = cfg.alpha;
    out.ellipticity_min = cf0.ellipticity_min;
    out.ellipticity_max = cf0.ellipticity_max;

    std::vector<double> samples = cfg.sample_times;
    std::sort(samples.begin(), samples.end());
    if (samples.empty() || std::abs(samples.back() - cfg.t_end) > 1e-12)
        samples.push_back(cfg.t_end);

    ScalarField u = cfg.u0;
    ScalarField k1(g), k2(g), k3(g), k4(g), stage(g);
    double t = 0.0;
    const double h = g.h_min_active();

    auto rhs = [&](const ScalarField& field, double time, ScalarField& dst) {
        apply_linear_operator(field, cfg.coeffs->at(time), diff, cfg.method, dst, ws);
    };

    auto sample = [&](double time) {
        if (field_min(u) <= 0.0)
            throw NumericalError("solve_linear: positivity lost at t = " +
                                 std::to_string(time) + "; reduce c_cfl");
        out.times.push_back(time);
        out.u.push_back(u);
        ScalarField ut(g);
        rhs(u, time, ut);
        out.u_t.push_back(std::move(ut));
    };

    std::size_t next = 0;
    while (next < samples.size()) {
        const double target = samples[next];
        if (t >= target - 1e-12) {
            sample(target);
            ++next;
            continue;
        }
        const CoefficientFields& cf = cfg.coeffs->at(t);
        out.ellipticity_min = std::min(out.ellipticity_min, cf.ellipticity_min);
        out.ellipticity_max = std::max(out.ellipticity_max, cf.ellipticity_max);
        double dt = cfg.c_cfl * h * h / (kPiSq * std::max(cf.ellipticity_max, 1e-300));
        dt = std::min(dt, target - t);
        if (cfg.integrator == Integrator::euler) {
            rhs(u, t, k1);
            for_each_index(g.total_nodes,
                           [&](std::ptrdiff_t p) { u.v[p] += dt * k1.v[p]; });
        } else {
            rhs(u, t, k1);
            for_each_index(g.total_nodes, [&](std::ptrdiff_t p) {
                stage.v[p] = u.v[p] + 0.5 * dt * k1.v[p];
            });
            rhs(stage, t + 0.5 * dt, k2);
            for_each_index(g.total_nodes, [&](std::ptrdiff_t p) {
                stage.v[p] = u.v[p] + 0.5 * dt * k2.v[p];
            });
            rhs(stage, t + 0.5 * dt, k3);
            for_each_index(g.total_nodes,
                           [&](std::ptrdiff_t p) { stage.v[p] = u.v[p] + dt * k3.v[p]; });
            rhs(stage, t + dt, k4);
            for_each_index(g.total_nodes, [&](std::ptrdiff_t p) {
                u.v[p] += dt / 6.0 *
                          (k1.v[p] + 2.0 * k2.v[p] + 2.0 * k3.v[p] + k4.v[p]);
            });
        }
        t = (std::abs(target - t - dt) < 1e-14) ? target : t + dt;
    }
    return out;
}

ScalarField li_yau_quantity(const ScalarField& u, const ScalarField& u_t,
                            const CoefficientFields& cf, double t, double alpha) {
    if (field_min(u) <= 0.0)
        throw NumericalError("li_yau_quantity: u must be strictly positive");
    const TorusGrid& g = u.grid;
    const int n = g.n;
    ScalarField f(g);
    for_each_index(g.total_nodes, [&](std::ptrdiff_t p) { f.v[p] = std::log(u.v[p]); });
    GradientField df = holomorphic_gradient(f);
    ScalarField F(g);
    for_each_index(g.total_nodes, [&](std::ptrdiff_t p) {
        const cplx* G = cf.G.node(p);
        const cplx* v = df.node(p);
        // |df|^2 = G^{ij} f_i f_jbar = v^dagger P v
        double q = 0.0;
        for (int i = 0; i < n; ++i) {
            q += G[i * n + i].real() * std::norm(v[i]);
            for (int j = i + 1; j < n; ++j)
                q += 2.0 * (std::conj(v[i]) * G[i * n + j] * v[j]).real();
        }
        const double ft = u_t.v[p] / u.v[p];
        F.v[p] = t * (q - alpha * ft);
    });
    return F;
}

namespace {
// two-parameter nonnegative least squares of y against (1, 1/t)
void nnls_envelope(const std::vector<double>& t, const std::vector<double>& y, double& C1,
                   double& C2, double& max_residual) {
    const std::size_t m = t.size();
    double s11 = 0, s1r = 0, srr = 0, sy1 = 0, syr = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double r = 1.0 / t[i];
        s11 += 1.0;
        s1r += r;
        srr += r * r;
        sy1 += y[i];
        syr += y[i] * r;
    }
    auto sse = [&](double a, double b) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double e = y[i] - a - b / t[i];
            s += e * e;
        }
        return s;
    };
    const double det = s11 * srr - s1r * s1r;
    double bestA = 0.0, bestB = 0.0, bestS = std::numeric_limits<double>::infinity();
    if (std::abs(det) > 1e-14) {
        const double a = (sy1 * srr - syr * s1r) / det;
        const double b = (syr * s11 - sy1 * s1r) / det;
        if (a >= 0.0 && b >= 0.0) {
            bestA = a;
            bestB = b;
            bestS = sse(a, b);
        }
    }
    const double a0 = std::max(0.0, sy1 / s11);  // C2 = 0
    if (sse(a0, 0.0) < bestS) {
        bestA = a0;
        bestB = 0.0;
        bestS = sse(a0, 0.0);
    }
    const double b0 = std::max(0.0, syr / srr);  // C1 = 0
    if (sse(0.0, b0) < bestS) {
        bestA = 0.0;
        bestB = b0;
        bestS = sse(0.0, b0);
    }
    max_residual = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        max_residual = std::max(max_residual, y[i] - bestA - bestB / t[i]);
    C1 = bestA + std::max(0.0, max_residual);  // lift to an upper envelope
    C2 = bestB;
}
}  // namespace

LiYauFit fit_li_yau_constants(const LinearTrajectory& traj, CoefficientProvider& coeffs,
                              double alpha) {
    std::vector<double> t, y;
    LiYauFit fit;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        if (traj.times[i] <= 0.0) continue;
        ScalarField F = li_yau_quantity(traj.u[i], traj.u_t[i], coeffs.at(traj.times[i]),
                                        traj.times[i], alpha);
        const double sup = field_max(F) / traj.times[i];  // sup_x (|df|^2 - alpha f_t)
        t.push_back(traj.times[i]);
        y.push_back(sup);
        fit.envelope_values.push_back(sup);
    }
    if (t.size() < 5)
        throw InvalidStructureError("fit_li_yau_constants: need at least 5 positive-time "
                                    "samples, got " +
                                    std::to_string(t.size()));
    nnls_envelope(t, y, fit.C1, fit.C2, fit.max_residual);
    return fit;
}

HarnackReport harnack_verify(const LinearTrajectory& traj, double t1, double t2,
                             const double* constants3, CoefficientProvider* coeffs,
                             double diameter) {
    if (!(t1 > 0.0) || !(t1 < t2))
        throw InvalidStructureError("harnack_verify: need 0 < t1 < t2, got t1 = " +
                                    std::to_string(t1) + ", t2 = " + std::to_string(t2));
    HarnackReport rep;
    rep.t1 = t1;
    rep.t2 = t2;
    const auto i1 = traj.index_of(t1);
    const auto i2 = traj.index_of(t2);
    rep.sup_u_t1 = field_max(traj.u[i1]);
    rep.inf_u_t2 = field_min(traj.u[i2]);
    rep.ratio = rep.sup_u_t1 / rep.inf_u_t2;
    if (constants3) {
        rep.C1 = constants3[0];
        rep.C2 = constants3[1];
        rep.C3 = constants3[2];
    } else {
        if (!coeffs)
            throw InvalidStructureError("harnack_verify: need constants or a provider");
        LiYauFit fit = fit_li_yau_constants(traj, *coeffs, traj.alpha);
        rep.C1 = fit.C1;
        rep.C2 = fit.C2;
        // path bound for the |gamma'|^2/(t2-t1) term with measured ellipticity
        rep.C3 = traj.alpha * diameter * diameter * traj.ellipticity_max / 4.0;
    }
    rep.bound = std::pow(t2 / t1, rep.C2) *
                std::exp(rep.C3 / (t2 - t1) + rep.C1 * (t2 - t1));
    rep.satisfied = rep.ratio <= rep.bound;
    return rep;
}

}  // namespace lambdaflow
