#include "lambdaflow/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lambdaflow/parallel.hpp"

namespace lambdaflow {

VnWn build_vn_wn(const FlowResult& traj, int n) {
    if (n < 1) throw InvalidStructureError("build_vn_wn: n >= 1 required");
    const double t0 = static_cast<double>(n - 1);
    const double t1 = static_cast<double>(n);
    VnWn out;
    out.n = n;
    const FlowSnapshot* start = nullptr;
    for (const auto& s : traj.snapshots)
        if (std::abs(s.t - t0) < 1e-9) start = &s;
    if (!start)
        throw InvalidStructureError("build_vn_wn: no snapshot at t = " + std::to_string(t0));
    out.sup_u_start = field_max(start->phi_t);
    out.inf_u_start = field_min(start->phi_t);

    for (const auto& s : traj.snapshots) {
        if (s.t < t0 - 1e-9 || s.t > t1 + 1e-9) continue;
        ScalarField v(s.phi_t.grid), w(s.phi_t.grid);
        for (std::ptrdiff_t p = 0; p < v.size(); ++p) {
            v.v[p] = out.sup_u_start - s.phi_t.v[p];
            w.v[p] = s.phi_t.v[p] - out.inf_u_start;
        }
        out.local_times.push_back(s.t - t0);
        out.v.push_back(std::move(v));
        out.w.push_back(std::move(w));
    }
    if (out.local_times.empty() || out.local_times.back() < 1.0 - 1e-9)
        throw InvalidStructureError("build_vn_wn: trajectory does not cover [n-1, n]");
    return out;
}

double vn_wn_equation_residual(const VnWn& vw, FlowEngine& engine, const FlowResult& traj) {
    const auto& times = vw.local_times;
    if (times.size() < 5)
        throw InvalidStructureError("vn_wn_equation_residual: need at least 5 samples");
    const double dt = times[1] - times[0];
    for (std::size_t i = 1; i + 1 < times.size(); ++i)
        if (std::abs(times[i + 1] - times[i] - dt) > 1e-9)
            throw InvalidStructureError("vn_wn_equation_residual: non-uniform sampling");

    const TorusGrid& g = engine.config().grid;
    Differentiator diff(g);
    FieldWorkspace ws = make_workspace(g);
    const double t0 = static_cast<double>(vw.n - 1);

    double worst = 0.0;
    // every 4th interior 5-point stencil is enough to certify the equation
    for (std::size_t m = 2; m + 2 < times.size(); m += 4) {
        // coefficients assembled from the flow state at the matching time
        const FlowSnapshot* snap = nullptr;
        for (const auto& s : traj.snapshots)
            if (std::abs(s.t - (t0 + times[m])) < 1e-9) snap = &s;
        if (!snap) continue;
        FlowState st;
        st.t = snap->t;
        st.phi = snap->phi;
        CoefficientFields cf = engine.linearized_coefficients(st);

        ScalarField Lv(g);
        apply_linear_operator(vw.v[m], cf, diff, engine.config().method, Lv, ws);
        double num = 0.0, den = 0.0;
        for (std::ptrdiff_t p = 0; p < g.total_nodes; ++p) {
            const double dvdt = (vw.v[m - 2].v[p] - 8.0 * vw.v[m - 1].v[p] +
                                 8.0 * vw.v[m + 1].v[p] - vw.v[m + 2].v[p]) /
                                (12.0 * dt);
            num = std::max(num, std::abs(dvdt - Lv.v[p]));
            den = std::max(den, std::abs(Lv.v[p]));
        }
        if (den > 0.0) worst = std::max(worst, num / den);
    }
    return worst;
}

RecursionCheck recursion_check(double omega_nm1, double omega_nhalf, double omega_n,
                               double C_harnack) {
    if (!(C_harnack > 1.0))
        throw InvalidConstantError("recursion_check: the Harnack constant must exceed 1");
    RecursionCheck rc;
    rc.lhs = omega_nm1 + omega_nhalf;
    rc.rhs = C_harnack * (omega_nm1 - omega_n);
    rc.holds = rc.lhs <= rc.rhs;
    rc.delta = (C_harnack - 1.0) / (C_harnack + 1.0);
    return rc;
}

DecayFit decay_fit(std::span<const double> times, std::span<const double> omega,
                   double t_start, double t_end) {
    if (times.size() != omega.size())
        throw InvalidStructureError("decay_fit: length mismatch");
    std::vector<double> t, logw;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < t_start || times[i] > t_end) continue;
        if (!(omega[i] > 0.0)) continue;  // nonpositive samples dropped
        t.push_back(times[i]);
        logw.push_back(std::log(omega[i]));
    }
    if (t.size() < 5)
        throw InvalidStructureError("decay_fit: need at least 5 positive samples, got " +
                                    std::to_string(t.size()));
    const double m = static_cast<double>(t.size());
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        st += t[i];
        sy += logw[i];
        stt += t[i] * t[i];
        sty += t[i] * logw[i];
    }
    const double det = m * stt - st * st;
    DecayFit fit;
    fit.t_start = t.front();
    fit.t_end = t.back();
    const double slope = (m * sty - st * sy) / det;
    const double intercept = (sy * stt - st * sty) / det;
    fit.beta = -slope;
    fit.C = std::exp(intercept);
    double ss_res = 0.0, ss_tot = 0.0;
    const double ybar = sy / m;
    fit.envelope_ok = true;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double pred = intercept + slope * t[i];
        ss_res += (logw[i] - pred) * (logw[i] - pred);
        ss_tot += (logw[i] - ybar) * (logw[i] - ybar);
        if (std::exp(logw[i]) > 1.05 * fit.C * std::exp(-fit.beta * t[i]))
            fit.envelope_ok = false;
    }
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

MonotoneHCheck monotone_h_check(const FlowResult& traj, double C, double beta) {
    if (traj.snapshots.size() < 2)
        throw InvalidStructureError("monotone_h_check: need at least 2 snapshots");
    if (!(beta > 0.0)) throw InvalidConstantError("monotone_h_check: beta must be positive");
    double sup_bar = 0.0;
    for (const auto& s : traj.snapshots) sup_bar = std::max(sup_bar, field_sup_abs(s.phi_bar));
    const double slack = 1e-8 * (1.0 + sup_bar);

    MonotoneHCheck out;
    for (std::size_t i = 0; i + 1 < traj.snapshots.size(); ++i) {
        const auto& a = traj.snapshots[i];
        const auto& b = traj.snapshots[i + 1];
        const double ea = C * std::exp(-beta * a.t) / beta;
        const double eb = C * std::exp(-beta * b.t) / beta;
        for (std::ptrdiff_t p = 0; p < a.phi_bar.size(); ++p) {
            const double rise = (b.phi_bar.v[p] + eb) - (a.phi_bar.v[p] + ea);
            out.max_violation = std::max(out.max_violation, rise);
        }
    }
    out.ok = out.max_violation <= slack;
    return out;
}

EllipticResidual elliptic_residual(const FlowState& final_state, FlowEngine& engine) {
    EllipticResidual out;
    // rhs = f(Lambda(g[phi])) - psi, so sup |f - psi - a| = sup |phi_t - a|;
    // recompute the rhs so a stale cached phi_t cannot slip through.
    RhsResult r = engine.flow_rhs(final_state.phi);
    out.a = integrate_mean(r.rhs);
    double sup = 0.0;
    for (double v : r.rhs.v) sup = std::max(sup, std::abs(v - out.a));
    out.residual_sup = sup;
    return out;
}

}  // namespace lambdaflow
