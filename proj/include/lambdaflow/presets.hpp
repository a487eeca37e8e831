#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lambdaflow/config.hpp"
#include "lambdaflow/convergence.hpp"
#include "lambdaflow/io.hpp"
#include "lambdaflow/linear_parabolic.hpp"

namespace lambdaflow {

extern const char* const kToolVersion;

/// Everything a preset pipeline produced; the acceptance suite reuses these
/// instead of re-running the expensive flows.
struct PresetOutcome {
    std::string name;
    ParsedConfig parsed;
    std::optional<FlowResult> flow;
    RunSummary summary;
    std::optional<LinearTrajectory> linear;
    std::optional<HarnackReport> harnack;
    std::optional<LiYauFit> liyau;
    std::optional<CoefficientFields> frozen_coeffs;
    std::optional<StructureReport> structure;
    double lemma3_c0 = 0.0;
    std::vector<std::string> failures;  // failed module-level assertions

    bool passed() const { return failures.empty(); }
};

std::vector<std::string> preset_names();
bool is_preset(const std::string& name);

/// Configs behind the presets (seeds and grids pinned so the acceptance
/// criteria are single-command reproducible).
ParsedConfig preset_config(const std::string& name);

/// Execute a preset pipeline; when out_dir is nonempty all CSV/JSON/SVG
/// artifacts and the final manifest are written there.
PresetOutcome run_preset(const std::string& name, const std::string& out_dir = "",
                         const std::vector<std::string>& formats = {"csv", "json", "svg"});

/// Pipeline pieces shared between presets and the CLI `run <config>` path.
PresetOutcome run_flow_pipeline(ParsedConfig parsed, const std::string& name,
                                bool with_harnack_stage);
void run_harnack_stage(PresetOutcome& outcome);
void audit_flow_invariants(PresetOutcome& outcome);
void emit_outputs(PresetOutcome& outcome, const std::filesystem::path& dir,
                  const std::vector<std::string>& formats, const std::string& subcommand);

}  // namespace lambdaflow
