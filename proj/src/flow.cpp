#include "lambdaflow/flow.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "lambdaflow/eigen_herm.hpp"
#include "lambdaflow/parallel.hpp"

namespace lambdaflow {

namespace {
constexpr double kPiSq = 9.869604401089358618834491;
constexpr int kMaxLam = 70;

// Per-node evaluation shared by the fast path and the margin bookkeeping:
// eigenvalues -> Lambda -> margins -> f and the gradient trace weight.
struct NodeEval {
    double f = 0.0;
    double margin = 0.0;
    double trace_weight = 0.0;  // K * sum_l f_l = sum_p mu_p
    bool inside = false;
};

NodeEval eval_node(const OperatorSpec& op, const double* lam) {
    NodeEval out;
    const LambdaStructure& ls = op.structure;
    std::array<double, kMaxLam> Lam{};
    std::array<double, kMaxLam> sig{};
    for (int j = 0; j < ls.N; ++j) {
        double s = 0.0;
        for (int m = 0; m < ls.K; ++m) s += lam[ls.sets_flat[j * ls.K + m] - 1];
        Lam[j] = s;
    }
    const int k = op.cone_order();
    elementary_symmetric(std::span<const double>(Lam.data(), ls.N), k,
                         std::span<double>(sig.data(), k));
    out.margin = sig[0];
    for (int j = 1; j < k; ++j) out.margin = std::min(out.margin, sig[j]);
    out.inside = out.margin > 0.0;

    if (op.family == OperatorFamily::linear_weights) {
        double f = 0.0, gsum = 0.0;
        for (int j = 0; j < ls.N; ++j) {
            f += op.weights[j] * Lam[j];
            gsum += op.weights[j];
        }
        out.f = f;
        out.trace_weight = ls.K * gsum;
        return out;
    }
    if (op.k == 1) {
        out.f = sig[0];
        out.trace_weight = ls.K * ls.N;
        return out;
    }
    if (!out.inside) return out;
    out.f = std::pow(sig[op.k - 1], 1.0 / op.k);
    // sum_l f_l = (1/k) sigma_k^{1/k-1} sum_l sigma_{k-1}(Lam | l)
    //           = (1/k) sigma_k^{1/k-1} (N-k+1) sigma_{k-1}(Lam)
    const double sum_fl =
        out.f / (op.k * sig[op.k - 1]) * (ls.N - op.k + 1) * sig[op.k - 2];
    out.trace_weight = ls.K * sum_fl;
    return out;
}

}  // namespace

const char* termination_name(Termination t) {
    switch (t) {
        case Termination::converged: return "converged";
        case Termination::t_max_reached: return "t_max_reached";
        case Termination::breakdown: return "breakdown";
    }
    return "unknown";
}

FlowEngine::FlowEngine(FlowConfig cfg)
    : cfg_(std::move(cfg)), diff_(cfg_.grid), ws_(make_workspace(cfg_.grid)),
      grad_ws_(cfg_.grid) {
    if (!cfg_.phi0.grid.same_layout(cfg_.grid))
        throw InvalidStructureError("FlowEngine: phi0 grid mismatch");
    if (cfg_.tol_osc < 0.0) throw InvalidStructureError("FlowEngine: tol_osc must be >= 0");
    if (cfg_.c_cfl <= 0.0 || cfg_.c_cfl > 1.0)
        throw InvalidStructureError("FlowEngine: c_cfl must lie in (0, 1]");
    require_finite(cfg_.phi0, "phi0");
    if (cfg_.data.psi_kind == PsiKind::manufactured && !cfg_.data.psi_realized)
        realize_manufactured_psi(cfg_);
    sup_phi_history_ = field_max(cfg_.phi0);
}

HermitianField FlowEngine::assemble_g_form(const ScalarField& phi) {
    HermitianField g(cfg_.grid);
    complex_hessian(phi, diff_, cfg_.method, g, ws_);
    const GradientField* grad = nullptr;
    if (cfg_.data.x_needs_gradient()) {
        holomorphic_gradient(phi, diff_, cfg_.method, grad_ws_, ws_);
        grad = &grad_ws_;
    }
    cfg_.data.add_x(g, grad);
    return g;
}

RhsResult FlowEngine::try_rhs(const ScalarField& phi) {
    const TorusGrid& g = cfg_.grid;
    const int n = g.n;
    complex_hessian(phi, diff_, cfg_.method, ws_.hess, ws_);
    const GradientField* grad = nullptr;
    if (cfg_.data.x_needs_gradient()) {
        holomorphic_gradient(phi, diff_, cfg_.method, grad_ws_, ws_);
        grad = &grad_ws_;
    }
    cfg_.data.add_x(ws_.hess, grad);

    RhsResult res;
    res.rhs = ScalarField(g);
    scratch_margins_.resize(g.total_nodes);
    scratch_weights_.resize(g.total_nodes);
    std::vector<double>& margins = scratch_margins_;
    std::vector<double>& weights = scratch_weights_;

    const OperatorSpec& op = cfg_.op;
    const DataSpec& data = cfg_.data;
    for_each_index(g.total_nodes, [&](std::ptrdiff_t p) {
        double lam[8];
        hermitian_eigenvalues(ws_.hess.node(p), n, lam);
        const NodeEval ev = eval_node(op, lam);
        margins[p] = ev.margin;
        weights[p] = ev.inside ? ev.trace_weight : 0.0;
        res.rhs.v[p] = ev.inside || !op.requires_cone()
                           ? ev.f - data.psi_at(p)
                           : std::numeric_limits<double>::quiet_NaN();
    });

    res.margin = std::numeric_limits<double>::infinity();
    res.mu_hat = 0.0;
    res.worst_node = -1;
    for (std::ptrdiff_t p = 0; p < g.total_nodes; ++p) {
        if (margins[p] < res.margin) {
            res.margin = margins[p];
            res.worst_node = p;
        }
        res.mu_hat = std::max(res.mu_hat, weights[p]);
    }
    res.admissible = res.margin > 0.0 || !op.requires_cone();
    return res;
}

RhsResult FlowEngine::flow_rhs(const ScalarField& phi) {
    RhsResult res = try_rhs(phi);
    if (!res.admissible) {
        auto coords = cfg_.grid.node_coords(res.worst_node);
        std::string where;
        for (int c : coords) where += std::to_string(c) + ",";
        throw NumericalError("flow_rhs: inadmissible node (" + where +
                                 ") with cone margin " + std::to_string(res.margin),
                             res.worst_node);
    }
    return res;
}

double FlowEngine::cfl_dt(double mu_hat) const {
    const double h = cfg_.grid.h_min_active();
    const double mu = std::max(mu_hat, 1e-300);
    return cfg_.c_cfl * h * h / (kPiSq * mu);
}

FlowState FlowEngine::initial_state() {
    RhsResult r0 = try_rhs(cfg_.phi0);
    if (!r0.admissible) {
        auto coords = cfg_.grid.node_coords(r0.worst_node);
        std::string where;
        for (std::size_t i = 0; i < coords.size(); ++i)
            where += std::to_string(coords[i]) + (i + 1 < coords.size() ? "," : "");
        throw NumericalError("phi0 is not admissible: worst node (" + where +
                                 ") has cone margin " + std::to_string(r0.margin),
                             r0.worst_node);
    }
    FlowState st;
    st.t = 0.0;
    st.phi = cfg_.phi0;
    st.phi_t = std::move(r0.rhs);
    st.admissibility_margin = r0.margin;
    st.mu_hat = r0.mu_hat;
    return st;
}

FlowState FlowEngine::step(const FlowState& state, double dt_cap) {
    const TorusGrid& g = cfg_.grid;
    double dt = cfl_dt(state.mu_hat);
    if (dt_cap > 0.0) dt = std::min(dt, dt_cap);
    std::vector<double> margin_history;

    for (int halving = 0; halving <= 20; ++halving) {
        ScalarField phi_new(g);
        if (cfg_.integrator == Integrator::euler) {
            for_each_index(g.total_nodes, [&](std::ptrdiff_t p) {
                phi_new.v[p] = state.phi.v[p] + dt * state.phi_t.v[p];
            });
        } else {
            const ScalarField& k1 = state.phi_t;
            ScalarField stage(g);
            for_each_index(g.total_nodes, [&](std::ptrdiff_t p) {
                stage.v[p] = state.phi.v[p] + 0.5 * dt * k1.v[p];
            });
            RhsResult r2 = try_rhs(stage);
            if (!r2.admissible) {
                margin_history.push_back(r2.margin);
                dt *= 0.5;
                continue;
            }
            ScalarField k2 = std::move(r2.rhs);
            for_each_index(g.total_nodes, [&](std::ptrdiff_t p) {
                stage.v[p] = state.phi.v[p] + 0.5 * dt * k2.v[p];
            });
            RhsResult r3 = try_rhs(stage);
            if (!r3.admissible) {
                margin_history.push_back(r3.margin);
                dt *= 0.5;
                continue;
            }
            ScalarField k3 = std::move(r3.rhs);
            for_each_index(g.total_nodes, [&](std::ptrdiff_t p) {
                stage.v[p] = state.phi.v[p] + dt * k3.v[p];
            });
            RhsResult r4 = try_rhs(stage);
            if (!r4.admissible) {
                margin_history.push_back(r4.margin);
                dt *= 0.5;
                continue;
            }
            const ScalarField& k4 = r4.rhs;
            for_each_index(g.total_nodes, [&](std::ptrdiff_t p) {
                phi_new.v[p] = state.phi.v[p] +
                               dt / 6.0 *
                                   (k1.v[p] + 2.0 * k2.v[p] + 2.0 * k3.v[p] + k4.v[p]);
            });
        }
        RhsResult rn = try_rhs(phi_new);
        if (!rn.admissible) {
            margin_history.push_back(rn.margin);
            dt *= 0.5;
            continue;
        }
        FlowState next;
        next.t = state.t + dt;
        next.phi = std::move(phi_new);
        next.phi_t = std::move(rn.rhs);
        next.dt_last = dt;
        next.admissibility_margin = rn.margin;
        next.mu_hat = rn.mu_hat;
        return next;
    }
    throw FlowBreakdownError("flow stepping broke down after 20 dt halvings at t = " +
                                 std::to_string(state.t),
                             state.t, margin_history);
}

DiagnosticsRecord FlowEngine::estimate_monitors(const FlowState& state) {
    const TorusGrid& g = cfg_.grid;
    DiagnosticsRecord rec;
    rec.t = state.t;
    rec.sup_phi_t = field_max(state.phi_t);
    rec.inf_phi_t = field_min(state.phi_t);
    rec.osc_phi_t = rec.sup_phi_t - rec.inf_phi_t;
    rec.osc_phi = oscillation(state.phi);
    rec.admissibility_margin = state.admissibility_margin;
    const double d = g.diameter();
    rec.diameter_bound = std::max(d, d * d);
    rec.chi0_max = 0.0;  // all data kinds are independent of the value of phi
    const double mean_pt = integrate_mean(state.phi_t);
    double r = 0.0;
    for (double v : state.phi_t.v) r = std::max(r, std::abs(v - mean_pt));
    rec.residual = r;

    holomorphic_gradient(state.phi, diff_, cfg_.method, grad_ws_, ws_);
    sup_phi_history_ = std::max(sup_phi_history_, field_max(state.phi));
    double gs = 0.0, ratio = 0.0;
    for (std::ptrdiff_t p = 0; p < g.total_nodes; ++p) {
        const double ns = grad_ws_.norm_sq.v[p];
        gs = std::max(gs, ns);
        ratio = std::max(ns / (1.0 + sup_phi_history_ - state.phi.v[p]), ratio);
    }
    rec.sup_grad_sq = gs;
    rec.grad_bound_ratio = ratio;

    complex_hessian(state.phi, diff_, cfg_.method, ws_.hess, ws_);
    std::vector<double>& lam = ws_.lam;
    eigenvalues_only(ws_.hess, lam);
    double sh = 0.0;
    for (std::ptrdiff_t p = 0; p < g.total_nodes; ++p) {
        sh = std::max(sh, std::abs(lam[p * g.n]));
        sh = std::max(sh, std::abs(lam[p * g.n + g.n - 1]));
    }
    rec.sup_hess = sh;
    return rec;
}

FlowResult FlowEngine::run() {
    FlowResult out;
    FlowState state = initial_state();

    const double interval = cfg_.sample_interval > 0.0 ? cfg_.sample_interval : cfg_.t_max;
    long long next_sample = 1;
    long long steps_since_record = 0;

    auto record = [&](const FlowState& st) {
        out.records.push_back(estimate_monitors(st));
        out.records.back().steps_since_last = steps_since_record;
        steps_since_record = 0;
        if (cfg_.store_snapshots) {
            FlowSnapshot snap;
            snap.t = st.t;
            snap.phi = st.phi;
            snap.phi_bar = normalize(st.phi);
            snap.phi_t = st.phi_t;
            out.snapshots.push_back(std::move(snap));
        }
    };

    record(state);
    bool done = false;
    while (!done) {
        if (cfg_.tol_osc > 0.0 && oscillation(state.phi_t) < cfg_.tol_osc && state.t > 0.0) {
            out.termination = Termination::converged;
            break;
        }
        if (state.t >= cfg_.t_max - 1e-12) {
            out.termination = Termination::t_max_reached;
            break;
        }
        const double target = std::min(interval * next_sample, cfg_.t_max);
        double cap = target - state.t;
        try {
            FlowState next = step(state, cap);
            ++steps_since_record;
            if (next.t >= target - 1e-12) {
                next.t = target;  // land exactly on the sample grid
                state = std::move(next);
                record(state);
                ++next_sample;
            } else {
                state = std::move(next);
            }
        } catch (const FlowBreakdownError& e) {
            out.termination = Termination::breakdown;
            out.note = e.what();
            done = true;
        }
    }
    if (out.termination == Termination::converged &&
        (out.records.empty() || out.records.back().t < state.t)) {
        record(state);
    }
    out.final_state = std::move(state);
    return out;
}

CoefficientFields FlowEngine::linearized_coefficients(const FlowState& state) {
    const TorusGrid& g = cfg_.grid;
    const int n = g.n;
    HermitianField gform = assemble_g_form(state.phi);
    EigenField eig = eigen_decompose(gform);

    CoefficientFields cf;
    cf.G = HermitianField(g);
    cf.chi0 = ScalarField(g);
    cf.has_chi = cfg_.data.x_needs_gradient();
    if (cf.has_chi) cf.chi.assign(static_cast<std::size_t>(g.total_nodes) * n, cplx(0.0));

    std::vector<double> mu_min(g.total_nodes), mu_max(g.total_nodes);
    std::vector<char> bad(g.total_nodes, 0);
    const OperatorSpec& op = cfg_.op;

    for_each_index(g.total_nodes, [&](std::ptrdiff_t p) {
        std::array<double, kMaxLam> Lam{};
        std::array<double, kMaxLam> grad{};
        std::array<double, 8> mu{};
        const double* lam = eig.values(p);
        op.structure.lambda_map(std::span<const double>(lam, n),
                                std::span<double>(Lam.data(), op.structure.N));
        try {
            f_grad(op, std::span<const double>(Lam.data(), op.structure.N),
                   std::span<double>(grad.data(), op.structure.N));
        } catch (const InadmissiblePointError&) {
            bad[p] = 1;
            return;
        }
        eigen_gradient_weights(std::span<const double>(grad.data(), op.structure.N),
                               op.structure, std::span<double>(mu.data(), n));
        // G = U diag(mu) U^dagger: only the spectral projector form is used,
        // which stays well-defined under eigenvalue degeneracy.
        const cplx* U = eig.vectors(p);
        cplx* G = cf.G.node(p);
        for (int r = 0; r < n; ++r) {
            for (int c = r; c < n; ++c) {
                cplx acc(0.0);
                for (int m = 0; m < n; ++m)
                    acc += mu[m] * U[r * n + m] * std::conj(U[c * n + m]);
                G[r * n + c] = acc;
                if (c != r) G[c * n + r] = std::conj(acc);
            }
        }
        double lo = mu[0], hi = mu[0];
        for (int m = 1; m < n; ++m) {
            lo = std::min(lo, mu[m]);
            hi = std::max(hi, mu[m]);
        }
        mu_min[p] = lo;
        mu_max[p] = hi;
        if (cf.has_chi) {
            // X = c(1+|z|^2)^{-1} I: X_{ij,zeta_k} = -c conj(zeta_k)/(1+|z|^2)^2 d_ij,
            // contracted against G^{ij} this yields -c tr(G) conj(zeta_k)/(1+|z|^2)^2.
            double trG = 0.0;
            for (int m = 0; m < n; ++m) trG += mu[m];
            const cplx* z = grad_ws_.node(p);
            const double den = 1.0 + grad_ws_.norm_sq.v[p];
            for (int kk = 0; kk < n; ++kk)
                cf.chi[p * n + kk] = -cfg_.data.x_c * trG * std::conj(z[kk]) / (den * den);
        }
    });

    for (std::ptrdiff_t p = 0; p < g.total_nodes; ++p)
        if (bad[p])
            throw NumericalError("linearized_coefficients: state too close to the cone "
                                 "boundary at node " +
                                     std::to_string(p),
                                 p);
    cf.ellipticity_min = mu_min[0];
    cf.ellipticity_max = mu_max[0];
    for (std::ptrdiff_t p = 1; p < g.total_nodes; ++p) {
        cf.ellipticity_min = std::min(cf.ellipticity_min, mu_min[p]);
        cf.ellipticity_max = std::max(cf.ellipticity_max, mu_max[p]);
    }
    return cf;
}

FlowResult run_flow(FlowConfig cfg) {
    FlowEngine engine(std::move(cfg));
    return engine.run();
}

void realize_manufactured_psi(FlowConfig& cfg) {
    if (cfg.data.psi_kind != PsiKind::manufactured)
        throw InvalidStructureError("realize_manufactured_psi: psi kind is not manufactured");
    const ScalarField& target = cfg.data.manufactured_target;
    if (!target.grid.same_layout(cfg.grid))
        throw InvalidStructureError("manufactured target grid mismatch");

    Differentiator diff(cfg.grid);
    FieldWorkspace ws = make_workspace(cfg.grid);
    HermitianField g(cfg.grid);
    complex_hessian(target, diff, cfg.method, g, ws);
    GradientField grad(cfg.grid);
    const GradientField* gp = nullptr;
    if (cfg.data.x_needs_gradient()) {
        holomorphic_gradient(target, diff, cfg.method, grad, ws);
        gp = &grad;
    }
    cfg.data.add_x(g, gp);

    ScalarField psi(cfg.grid);
    const int n = cfg.grid.n;
    std::vector<char> bad(cfg.grid.total_nodes, 0);
    for_each_index(cfg.grid.total_nodes, [&](std::ptrdiff_t p) {
        double lam[8];
        hermitian_eigenvalues(g.node(p), n, lam);
        const NodeEval ev = eval_node(cfg.op, lam);
        if (!ev.inside && cfg.op.requires_cone()) {
            bad[p] = 1;
            return;
        }
        psi.v[p] = ev.f;
    });
    for (std::ptrdiff_t p = 0; p < cfg.grid.total_nodes; ++p)
        if (bad[p])
            throw NumericalError(
                "manufactured target is inadmissible at node " + std::to_string(p), p);
    cfg.data.psi_field = std::move(psi);
    cfg.data.psi_realized = true;
}

namespace ref {

ScalarField flow_rhs_reference(const ScalarField& phi, const FlowConfig& cfg) {
    HermitianField hess(cfg.grid);
    // naive DFT derivatives, serial
    const TorusGrid& g = cfg.grid;
    const int n = g.n;
    std::vector<ScalarField> first(g.axes(), ScalarField(g));
    for (int a = 0; a < g.axes(); ++a) derivative_naive(phi, a, false, first[a]);
    ScalarField tA(g), tB(g), tC(g), tD(g);
    for (int i = 0; i < n; ++i) {
        derivative_naive(phi, 2 * i, true, tA);
        derivative_naive(phi, 2 * i + 1, true, tB);
        for (std::ptrdiff_t p = 0; p < g.total_nodes; ++p)
            hess.node(p)[i * n + i] = cplx(0.25 * (tA.v[p] + tB.v[p]), 0.0);
        for (int j = i + 1; j < n; ++j) {
            derivative_naive(first[2 * i], 2 * j, false, tA);
            derivative_naive(first[2 * i + 1], 2 * j + 1, false, tB);
            derivative_naive(first[2 * i], 2 * j + 1, false, tC);
            derivative_naive(first[2 * i + 1], 2 * j, false, tD);
            for (std::ptrdiff_t p = 0; p < g.total_nodes; ++p) {
                const cplx h(0.25 * (tA.v[p] + tB.v[p]), 0.25 * (tC.v[p] - tD.v[p]));
                hess.node(p)[i * n + j] = h;
                hess.node(p)[j * n + i] = std::conj(h);
            }
        }
    }
    GradientField grad(g);
    const GradientField* gp = nullptr;
    if (cfg.data.x_needs_gradient()) {
        for (std::ptrdiff_t p = 0; p < g.total_nodes; ++p) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) {
                grad.node(p)[i] = 0.5 * cplx(first[2 * i].v[p], -first[2 * i + 1].v[p]);
                s += std::norm(grad.node(p)[i]);
            }
            grad.norm_sq.v[p] = s;
        }
        gp = &grad;
    }
    cfg.data.add_x(hess, gp);

    ScalarField rhs(g);
    std::vector<double> lam(n);
    std::vector<double> Lam(cfg.op.structure.N);
    for (std::ptrdiff_t p = 0; p < g.total_nodes; ++p) {
        jacobi_hermitian(hess.node(p), n, lam.data(), nullptr);
        cfg.op.structure.lambda_map(lam, Lam);
        rhs.v[p] = f_eval(cfg.op, Lam) - cfg.data.psi_at(p);
    }
    return rhs;
}

}  // namespace ref

}  // namespace lambdaflow
