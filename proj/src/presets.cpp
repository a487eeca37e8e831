#include "lambdaflow/presets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "lambdaflow/svg.hpp"

namespace lambdaflow {

const char* const kToolVersion = "0.1.0";

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json preset_json(const std::string& name) {
    if (name == "heat_baseline") {
        // n=2, K=2 => N=1, f = sigma_1: the plain quarter-Laplacian heat flow
        return json{
            {"geometry", {{"n", 2}, {"K", 2}, {"resolutions", {32, 1, 1, 1}}}},
            {"operator", {{"family", "sigma_k_root"}, {"k", 1}}},
            {"data",
             {{"X", {{"kind", "zero"}}},
              {"psi", {{"kind", "constant"}, {"value", 0.0}}},
              {"phi0", {{"kind", "sine"}, {"amplitude", 0.1}, {"axis", 0}}}}},
            {"flow",
             {{"integrator", "rk4"},
              {"c_cfl", 0.2},
              {"t_max", 3.0},
              {"tol_osc", 1e-8},
              {"sample_interval", 0.01},
              {"seed", 1}}},
            {"output", {{"dir", "out/heat_baseline"}}}};
    }
    if (name == "manufactured_sigma2") {
        // n=3, K=2, sigma_2^{1/2}; satisfies (S0.2): rank 2 >= 3*(1)/3 + 1
        return json{
            {"geometry", {{"n", 3}, {"K", 2}, {"resolutions", {16, 16, 16, 16, 1, 1}}}},
            {"operator", {{"family", "sigma_k_root"}, {"k", 2}}},
            {"data",
             {{"X", {{"kind", "scaled_identity"}, {"c", 1.0}}},
              {"psi",
               {{"kind", "manufactured"},
                {"target", {{"kind", "mode_sum"}, {"amplitude", 0.02}}}}},
              {"phi0", {{"kind", "zero"}}}}},
            {"flow",
             {{"integrator", "euler"},
              {"c_cfl", 0.9},
              {"t_max", 2.5},
              {"tol_osc", 2e-7},
              {"sample_interval", 0.025},
              {"seed", 2}}},
            {"harnack",
             {{"alpha", 1.5}, {"t1", 0.5}, {"t2", 1.0}, {"t_snapshot", 0.25},
              {"bump", 0.9}, {"c_cfl", 1.0}}},
            {"output", {{"dir", "out/manufactured_sigma2"}}}};
    }
    if (name == "gauduchon_sigma2") {
        // K = n-1 case, frozen third complex axis
        return json{
            {"geometry", {{"n", 3}, {"K", 2}, {"resolutions", {12, 12, 12, 12, 1, 1}}}},
            {"operator", {{"family", "sigma_k_root"}, {"k", 2}}},
            {"data",
             {{"X", {{"kind", "scaled_identity"}, {"c", 1.0}}},
              {"psi", {{"kind", "constant"}, {"value", 3.0}}},
              {"phi0", {{"kind", "mode_sum"}, {"amplitude", 0.03}}}}},
            {"flow",
             {{"integrator", "euler"},
              {"c_cfl", 0.9},
              {"t_max", 2.0},
              {"tol_osc", 1e-6},
              {"sample_interval", 0.02},
              {"seed", 3}}},
            {"output", {{"dir", "out/gauduchon_sigma2"}}}};
    }
    if (name == "harnack_heat_bump") {
        json j = preset_json("manufactured_sigma2");
        // only the flow segment up to the snapshot time is needed
        j["flow"]["t_max"] = j["harnack"]["t_snapshot"];
        j["flow"]["tol_osc"] = 0.0;
        j["output"]["dir"] = "out/harnack_heat_bump";
        return j;
    }
    throw ConfigError("unknown preset", name);
}

void summarize_flow(PresetOutcome& o, double fit_window_start) {
    const FlowResult& fr = *o.flow;
    std::vector<double> t, osc;
    for (const auto& r : fr.records) {
        t.push_back(r.t);
        osc.push_back(r.osc_phi_t);
    }
    FlowEngine engine(o.parsed.flow);
    auto res = elliptic_residual(fr.final_state, engine);
    o.summary.a = res.a;
    o.summary.final_residual = res.residual_sup;
    o.summary.termination = fr.termination;
    try {
        DecayFit fit = decay_fit(t, osc, fit_window_start, t.empty() ? 0.0 : t.back());
        o.summary.beta = fit.beta;
        o.summary.C_decay = fit.C;
    } catch (const Error&) {
        o.summary.beta = 0.0;
        o.summary.C_decay = 0.0;
    }
}

}  // namespace

std::vector<std::string> preset_names() {
    return {"heat_baseline", "gauduchon_sigma2", "manufactured_sigma2", "harnack_heat_bump",
            "cone_sigma2_report"};
}

bool is_preset(const std::string& name) {
    auto names = preset_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

ParsedConfig preset_config(const std::string& name) {
    return parse_config_json(preset_json(name), "preset:" + name);
}

void run_harnack_stage(PresetOutcome& o) {
    const HarnackParams& hp = o.parsed.harnack;
    const TorusGrid& grid = o.parsed.flow.grid;

    // freeze linearized coefficients from the flow snapshot at t_snapshot
    auto engine = std::make_shared<FlowEngine>(o.parsed.flow);
    const FlowResult& fr = *o.flow;
    const FlowSnapshot* snap = nullptr;
    for (const auto& s : fr.snapshots)
        if (std::abs(s.t - hp.t_snapshot) < 1e-9) snap = &s;
    if (!snap) {
        double best = 1e300;
        for (const auto& s : fr.snapshots)
            if (std::abs(s.t - hp.t_snapshot) < best) {
                best = std::abs(s.t - hp.t_snapshot);
                snap = &s;
            }
    }
    if (!snap) throw Error("harnack stage: flow produced no snapshots");
    FlowState mid;
    mid.t = snap->t;
    mid.phi = snap->phi;
    CoefficientFields cf = engine->linearized_coefficients(mid);
    o.frozen_coeffs = cf;

    LinearRunConfig lrc;
    lrc.coeffs = std::make_shared<FrozenCoefficients>(std::move(cf));
    ScalarField bump = make_bump_field(grid);
    lrc.u0 = ScalarField(grid);
    for (std::ptrdiff_t p = 0; p < grid.total_nodes; ++p)
        lrc.u0.v[p] = 1.0 + hp.bump * bump.v[p];
    lrc.t_end = hp.t2;
    lrc.alpha = hp.alpha;
    lrc.c_cfl = hp.c_cfl;
    lrc.integrator = Integrator::rk4;
    for (int m = 1; m <= 20; ++m) lrc.sample_times.push_back(0.05 * m);

    LinearTrajectory traj = solve_linear(lrc);
    FrozenCoefficients frozen(*o.frozen_coeffs);
    o.liyau = fit_li_yau_constants(traj, frozen, hp.alpha);
    o.harnack = harnack_verify(traj, hp.t1, hp.t2, nullptr, &frozen, grid.diameter());
    o.linear = std::move(traj);
    o.summary.harnack_C = o.harnack->bound;

    // oscillation recursion on the phi_t trajectory, one check per integer window
    double worst_delta_realized = 0.0;
    bool all_hold = true;
    std::vector<double> ts, oscs;
    for (const auto& r : fr.records) {
        ts.push_back(r.t);
        oscs.push_back(r.osc_phi_t);
    }
    auto osc_at = [&](double t) -> double {
        for (std::size_t i = 0; i < ts.size(); ++i)
            if (std::abs(ts[i] - t) < 1e-9) return oscs[i];
        return -1.0;
    };
    for (int n = 1;; ++n) {
        const double o0 = osc_at(n - 1.0), oh = osc_at(n - 0.5), o1 = osc_at(n * 1.0);
        if (o0 < 0.0 || oh < 0.0 || o1 < 0.0) break;
        RecursionCheck rc = recursion_check(o0, oh, o1, o.summary.harnack_C);
        all_hold = all_hold && rc.holds;
        o.summary.delta_recursion = rc.delta;
        if (o0 > 0.0) worst_delta_realized = std::max(worst_delta_realized, o1 / o0);
    }
    if (!all_hold)
        o.failures.push_back("oscillation recursion (C4) failed on some integer window");
    if (worst_delta_realized > o.summary.delta_recursion + 0.05)
        o.failures.push_back("realized contraction exceeds (C-1)/(C+1) + 0.05");
}

void audit_flow_invariants(PresetOutcome& o) {
    const FlowResult& fr = *o.flow;
    const bool cone_required = o.parsed.flow.op.requires_cone();
    if (fr.termination == Termination::breakdown) {
        o.failures.push_back("flow breakdown: " + fr.note);
        return;
    }
    for (std::size_t i = 0; i < fr.records.size(); ++i) {
        const auto& r = fr.records[i];
        if (cone_required && !(r.admissibility_margin > 0.0)) {
            o.failures.push_back("admissibility margin not positive at t = " +
                                 format_double(r.t));
            break;
        }
        if (r.chi0_max > 0.0) {
            o.failures.push_back("chi0 positive at t = " + format_double(r.t));
            break;
        }
    }
    // discrete maximum principle: sup phi_t non-increasing, inf non-decreasing,
    // slack 1e-10 per step
    for (std::size_t i = 0; i + 1 < fr.records.size(); ++i) {
        const auto& a = fr.records[i];
        const auto& b = fr.records[i + 1];
        const double slack = 1e-10 * std::max<long long>(1, b.steps_since_last);
        if (b.sup_phi_t > a.sup_phi_t + slack) {
            o.failures.push_back("sup phi_t increased between t = " + format_double(a.t) +
                                 " and t = " + format_double(b.t));
            break;
        }
        if (b.inf_phi_t < a.inf_phi_t - slack) {
            o.failures.push_back("inf phi_t decreased between t = " + format_double(a.t) +
                                 " and t = " + format_double(b.t));
            break;
        }
    }
}

PresetOutcome run_flow_pipeline(ParsedConfig parsed, const std::string& name,
                                bool with_harnack_stage) {
    PresetOutcome o;
    o.name = name;
    o.parsed = std::move(parsed);
    o.flow = run_flow(o.parsed.flow);
    const double window =
        o.flow->records.empty() ? 0.0 : 0.25 * o.flow->records.back().t;
    summarize_flow(o, std::max(0.2, window));
    audit_flow_invariants(o);
    if (with_harnack_stage && o.flow->termination != Termination::breakdown)
        run_harnack_stage(o);
    return o;
}

PresetOutcome run_preset(const std::string& name, const std::string& out_dir,
                         const std::vector<std::string>& formats) {
    if (!is_preset(name)) throw ConfigError("unknown preset", name);
    PresetOutcome o;

    if (name == "cone_sigma2_report") {
        o.name = name;
        auto spec = make_sigma_k_operator(3, 2, 2);
        o.structure = check_structure(spec, 1.0, 1.0, 100000, 42);
        o.lemma3_c0 = lemma3_empirical_c0(spec, 1.0, 100000, 42);
        if (!(o.lemma3_c0 > 0.0)) o.failures.push_back("lemma3 c0 not strictly positive");
        if (o.structure->max_hessian_eigenvalue > 1e-8)
            o.failures.push_back("concavity violated: max hessian eigenvalue above 1e-8");
        if (o.structure->euler_defect > 1e-10)
            o.failures.push_back("euler defect above 1e-10");
        if (o.structure->min_grad_component < -1e-12)
            o.failures.push_back("monotonicity (P2) violated");
    } else if (name == "harnack_heat_bump") {
        ParsedConfig parsed = preset_config(name);
        o = run_flow_pipeline(std::move(parsed), name, /*with_harnack_stage=*/true);
        if (o.harnack && !o.harnack->satisfied)
            o.failures.push_back("harnack bound violated");
    } else {
        ParsedConfig parsed = preset_config(name);
        const bool harnack_stage = (name == "manufactured_sigma2");
        o = run_flow_pipeline(std::move(parsed), name, harnack_stage);
        if (o.flow->termination != Termination::converged)
            o.failures.push_back("flow did not converge");
        if (name == "manufactured_sigma2") {
            if (o.summary.final_residual > 1e-6)
                o.failures.push_back("elliptic residual above 1e-6");
            if (std::abs(o.summary.a) > 1e-6)
                o.failures.push_back("|a| above 1e-6");
            if (!(o.summary.beta > 0.0)) o.failures.push_back("decay rate beta not positive");
            if (o.harnack && !o.harnack->satisfied)
                o.failures.push_back("harnack bound violated");
        }
    }

    if (!out_dir.empty()) emit_outputs(o, out_dir, formats, "run");
    return o;
}

void emit_outputs(PresetOutcome& o, const fs::path& dir,
                  const std::vector<std::string>& formats, const std::string& subcommand) {
    RunManifest man;
    man.subcommand = subcommand;
    man.preset_name = o.name;
    man.output_dir = dir.string();
    man.seed = o.parsed.flow.seed;
    man.tool_version = kToolVersion;
    man.started_utc = utc_timestamp();

    fs::create_directories(dir);
    auto has = [&](const char* f) {
        return std::find(formats.begin(), formats.end(), f) != formats.end();
    };
    auto add = [&](const fs::path& p) { man.files.push_back(p.filename().string()); };

    if (o.flow) {
        if (has("csv")) {
            write_records_csv(dir / "records.csv", o.flow->records);
            add(dir / "records.csv");
        }
        const ScalarField phi_bar = normalize(o.flow->final_state.phi);
        if (has("csv")) {
            write_field_csv(dir / "phi_bar_final.csv", phi_bar);
            add(dir / "phi_bar_final.csv");
            write_field_csv(dir / "phi_t_final.csv", o.flow->final_state.phi_t);
            add(dir / "phi_t_final.csv");
        }
        if (has("bin")) {
            write_field_binary(dir / "phi_bar_final.f64", phi_bar);
            add(dir / "phi_bar_final.f64");
        }
        if (has("svg")) {
            std::vector<double> t, osc, resid;
            for (const auto& r : o.flow->records) {
                t.push_back(r.t);
                osc.push_back(r.osc_phi_t);
                resid.push_back(r.residual);
            }
            write_svg_chart(dir / "omega.svg", "oscillation of phi_t", "t", "omega",
                            {{"omega(t)", t, osc}}, /*log_y=*/true);
            add(dir / "omega.svg");
            write_svg_chart(dir / "residual.svg", "elliptic residual", "t",
                            "sup |phi_t - mean|", {{"residual(t)", t, resid}},
                            /*log_y=*/true);
            add(dir / "residual.svg");
        }
    }
    if (o.linear && o.liyau && has("csv")) {
        // sup_x F(x, t) over time, next to its chart
        std::ofstream out(dir / "sup_F.csv");
        out << "t,sup_F\n";
        std::vector<double> ts, fs_;
        std::size_t j = 0;
        for (double tval : o.linear->times) {
            if (tval <= 0.0 || j >= o.liyau->envelope_values.size()) continue;
            const double supF = o.liyau->envelope_values[j++] * tval;
            out << format_double(tval) << "," << format_double(supF) << "\n";
            ts.push_back(tval);
            fs_.push_back(supF);
        }
        add(dir / "sup_F.csv");
        if (has("svg")) {
            write_svg_chart(dir / "sup_F.svg", "Li-Yau quantity", "t", "sup_x F(x,t)",
                            {{"sup F", ts, fs_}});
            add(dir / "sup_F.svg");
        }
    }
    if (o.harnack && has("json")) {
        write_json(dir / "harnack_report.json", harnack_report_json(*o.harnack));
        add(dir / "harnack_report.json");
    }
    if (o.structure && has("json")) {
        json j = structure_report_json(*o.structure);
        j["lemma3_c0"] = o.lemma3_c0;
        j["rank"] = rank_for_sigma_k(3, 2);
        auto rc = rank_condition_s02(index_sets(3, 2), 2);
        j["s02_ok"] = rc.ok;
        write_json(dir / "structure_report.json", j);
        add(dir / "structure_report.json");
    }
    if (o.flow && has("json")) {
        write_json(dir / "summary.json", run_summary_json(o.summary));
        add(dir / "summary.json");
    }

    man.finished_utc = utc_timestamp();
    man.status = o.failures.empty() ? "pass" : "fail";
    man.failing_invariant = o.failures.empty() ? "" : o.failures.front();
    man.files.push_back("manifest.json");
    write_manifest(dir, man);
}

}  // namespace lambdaflow
