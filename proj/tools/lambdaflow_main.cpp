#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>

#include "lambdaflow/config.hpp"
#include "lambdaflow/io.hpp"
#include "lambdaflow/parallel.hpp"
#include "lambdaflow/presets.hpp"
#include "lambdaflow/svg.hpp"

namespace fs = std::filesystem;
using namespace lambdaflow;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitAssertion = 2;
constexpr int kExitConfig = 3;
constexpr int kExitNumerical = 4;

void print_warnings(const ParsedConfig& parsed) {
    for (const auto& w : parsed.warnings) std::cerr << w << "\n";
}

int finish(const PresetOutcome& outcome) {
    if (outcome.passed()) {
        std::cout << "status: pass\n";
        return kExitPass;
    }
    std::cout << "status: FAIL\n";
    for (const auto& f : outcome.failures) std::cout << "  failed invariant: " << f << "\n";
    return kExitAssertion;
}

int cmd_run(const std::string& config_path, const std::string& preset,
            std::string out_override) {
    PresetOutcome outcome;
    if (!preset.empty()) {
        ParsedConfig parsed = preset_config(preset);
        print_warnings(parsed);
        const std::string dir = out_override.empty() ? parsed.output.dir : out_override;
        outcome = run_preset(preset, dir, parsed.output.formats);
        std::cout << "preset " << preset << " finished: "
                  << termination_name(outcome.summary.termination) << "\n";
    } else {
        ParsedConfig parsed = parse_config(config_path);
        print_warnings(parsed);
        if (!out_override.empty()) parsed.output.dir = out_override;
        const std::string dir = parsed.output.dir;
        const auto formats = parsed.output.formats;
        outcome = run_flow_pipeline(std::move(parsed), fs::path(config_path).stem().string(),
                                    /*with_harnack_stage=*/false);
        outcome.parsed.output.dir = dir;
        emit_outputs(outcome, dir, formats, "run");
        std::cout << "run finished: " << termination_name(outcome.summary.termination)
                  << ", beta = " << format_double(outcome.summary.beta)
                  << ", residual = " << format_double(outcome.summary.final_residual) << "\n";
    }
    std::cout << "outputs in " << (out_override.empty() ? outcome.parsed.output.dir
                                                        : out_override)
              << "\n";
    return finish(outcome);
}

int cmd_verify_cone(int n, int K, int k, long long samples, long long seed, double sigma,
                    double psi_inf, double psi_sup, const std::string& out_dir) {
    auto spec = make_sigma_k_operator(n, K, k);
    StructureReport rep = check_structure(spec, psi_inf, psi_sup, samples, seed);
    long long skipped = 0;
    const double c0 = lemma3_empirical_c0(spec, sigma, samples, seed, &skipped);
    json j = structure_report_json(rep);
    j["lemma3_c0"] = c0;
    j["lemma3_skipped"] = skipped;
    j["rank"] = rank_for_sigma_k(spec.structure.N, k);
    auto rc = rank_condition_s02(spec.structure, k);
    j["s02_ok"] = rc.ok;
    j["s02_required_rank"] = rc.required_rank;
    std::cout << j.dump(2) << "\n";
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_json(fs::path(out_dir) / "structure_report.json", j);
        RunManifest man;
        man.subcommand = "verify-cone";
        man.output_dir = out_dir;
        man.seed = seed;
        man.tool_version = kToolVersion;
        man.started_utc = man.finished_utc = utc_timestamp();
        man.files = {"structure_report.json", "manifest.json"};
        man.status = "pass";
        write_manifest(out_dir, man);
    }
    const bool ok = rep.max_hessian_eigenvalue <= 1e-8 && rep.euler_defect <= 1e-10 &&
                    rep.min_grad_component >= -1e-12 && c0 > 0.0;
    return ok ? kExitPass : kExitAssertion;
}

int cmd_check_structure(const std::string& config_path, long long samples, long long seed,
                        const std::string& out_dir) {
    ParsedConfig parsed = parse_config(config_path);
    print_warnings(parsed);
    const OperatorSpec& spec = parsed.flow.op;
    const double psi_inf = parsed.flow.data.psi_inf();
    const double psi_sup = parsed.flow.data.psi_sup();
    StructureReport rep = check_structure(spec, psi_inf, psi_sup, samples, seed);
    json j = structure_report_json(rep);
    std::cout << j.dump(2) << "\n";
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_json(fs::path(out_dir) / "structure_report.json", j);
    }
    const bool ok = rep.max_hessian_eigenvalue <= 1e-8 &&
                    rep.min_grad_component >= -1e-12 && rep.p4_margin > 0.0;
    return ok ? kExitPass : kExitAssertion;
}

int cmd_harnack(const std::string& config_path, double t1, double t2, double alpha,
                const std::string& out_dir) {
    ParsedConfig parsed = parse_config(config_path);
    print_warnings(parsed);
    parsed.harnack.t1 = t1;
    parsed.harnack.t2 = t2;
    parsed.harnack.alpha = alpha;
    parsed.harnack.t2 = std::max(t2, parsed.harnack.t2);
    // only the flow segment up to the frozen snapshot is needed
    parsed.flow.t_max = parsed.harnack.t_snapshot;
    parsed.flow.tol_osc = 0.0;
    PresetOutcome outcome = run_flow_pipeline(std::move(parsed), "harnack",
                                              /*with_harnack_stage=*/true);
    if (outcome.harnack) std::cout << harnack_report_json(*outcome.harnack).dump(2) << "\n";
    const std::string dir = out_dir.empty() ? outcome.parsed.output.dir : out_dir;
    emit_outputs(outcome, dir, outcome.parsed.output.formats, "harnack");
    std::cout << "outputs in " << dir << "\n";
    if (outcome.harnack && !outcome.harnack->satisfied) return kExitAssertion;
    return finish(outcome);
}

int cmd_report(const std::string& run_dir) {
    RunManifest man = read_manifest(run_dir);
    std::cout << "run " << (man.preset_name.empty() ? man.config_path : man.preset_name)
              << " (" << man.subcommand << ", tool " << man.tool_version << ")\n"
              << "  started " << man.started_utc << ", finished " << man.finished_utc << "\n"
              << "  status: " << man.status << "\n";
    if (!man.failing_invariant.empty())
        std::cout << "  failing invariant: " << man.failing_invariant << "\n";
    const fs::path dir(run_dir);
    if (fs::exists(dir / "summary.json")) {
        std::ifstream in(dir / "summary.json");
        json j = json::parse(in);
        std::cout << "  summary: " << j.dump() << "\n";
    }
    if (fs::exists(dir / "records.csv")) {
        auto records = read_records_csv(dir / "records.csv");
        std::cout << "  records: " << records.size() << " samples";
        if (!records.empty())
            std::cout << ", t in [" << format_double(records.front().t) << ", "
                      << format_double(records.back().t) << "]";
        std::cout << "\n";
        std::vector<double> t, osc, resid;
        for (const auto& r : records) {
            t.push_back(r.t);
            osc.push_back(r.osc_phi_t);
            resid.push_back(r.residual);
        }
        write_svg_chart(dir / "omega.svg", "oscillation of phi_t", "t", "omega",
                        {{"omega(t)", t, osc}}, true);
        write_svg_chart(dir / "residual.svg", "elliptic residual", "t",
                        "sup |phi_t - mean|", {{"residual(t)", t, resid}}, true);
        std::cout << "  charts regenerated from records.csv\n";
    }
    return man.status == "pass" ? kExitPass : kExitAssertion;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for fully nonlinear parabolic flows of "
                 "partial-Laplacian type on flat complex tori"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "worker thread count (0 = library default)");

    // run
    auto* run = app.add_subcommand("run", "run a flow pipeline from a config or preset");
    std::string config_path, preset, out_dir;
    run->add_option("config", config_path, "JSON config path");
    run->add_option("--preset", preset, "named preset")
        ->check(CLI::IsMember(preset_names()));
    run->add_option("--out", out_dir, "output directory override");

    // verify-cone
    auto* vc = app.add_subcommand("verify-cone", "sampled structure report for an operator");
    int n = 3, K = 2, k = 2;
    long long samples = 100000, seed = 42;
    double sigma = 1.0, psi_inf = 1.0, psi_sup = 1.0;
    std::string vc_out;
    vc->add_option("--n", n, "complex dimension")->required();
    vc->add_option("--K", K, "partial-sum order")->required();
    vc->add_option("--k", k, "sigma_k index")->required();
    vc->add_option("--samples", samples, "sample count");
    vc->add_option("--seed", seed, "sampler seed");
    vc->add_option("--sigma", sigma, "level-set value for the lemma-3 scan");
    vc->add_option("--psi-inf", psi_inf, "lower bound of psi for (P4)");
    vc->add_option("--psi-sup", psi_sup, "upper bound of psi for (S0.3)");
    vc->add_option("--out", vc_out, "output directory");

    // check-structure
    auto* cs = app.add_subcommand("check-structure",
                                  "structure report for the operator of a config");
    std::string cs_config, cs_out;
    long long cs_samples = 20000, cs_seed = 42;
    cs->add_option("--config", cs_config, "JSON config path")->required();
    cs->add_option("--samples", cs_samples, "sample count");
    cs->add_option("--seed", cs_seed, "sampler seed");
    cs->add_option("--out", cs_out, "output directory");

    // harnack
    auto* ha = app.add_subcommand("harnack", "linearized-equation Harnack verification");
    std::string ha_config, ha_out;
    double t1 = 0.5, t2 = 1.0, alpha = 1.5;
    ha->add_option("--config", ha_config, "JSON config path")->required();
    ha->add_option("--t1", t1, "earlier time");
    ha->add_option("--t2", t2, "later time");
    ha->add_option("--alpha", alpha, "Li-Yau exponent in (1, 2)");
    ha->add_option("--out", ha_out, "output directory");

    // report
    auto* rp = app.add_subcommand("report", "summarize a finished run directory");
    std::string run_dir;
    rp->add_option("run_dir", run_dir, "run directory with a manifest")->required();

    CLI11_PARSE(app, argc, argv);
    set_threads(threads);

    try {
        if (*run) {
            if (preset.empty() && config_path.empty()) {
                std::cerr << "run: need a config path or --preset\n";
                return kExitConfig;
            }
            return cmd_run(config_path, preset, out_dir);
        }
        if (*vc) return cmd_verify_cone(n, K, k, samples, seed, sigma, psi_inf, psi_sup, vc_out);
        if (*cs) return cmd_check_structure(cs_config, cs_samples, cs_seed, cs_out);
        if (*ha) return cmd_harnack(ha_config, t1, t2, alpha, ha_out);
        if (*rp) return cmd_report(run_dir);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const InvalidStructureError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const FlowBreakdownError& e) {
        std::cerr << "numerical breakdown: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitConfig;
}
