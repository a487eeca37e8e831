#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lambdaflow/cone.hpp"
#include "lambdaflow/convergence.hpp"
#include "lambdaflow/diagnostics.hpp"
#include "lambdaflow/linear_parabolic.hpp"
#include "lambdaflow/torus.hpp"

namespace lambdaflow {

using json = nlohmann::json;

/// Shortest round-trip decimal formatting, identical across runs.
std::string format_double(double v);

void write_records_csv(const std::filesystem::path& path,
                       const std::vector<DiagnosticsRecord>& records);
std::vector<DiagnosticsRecord> read_records_csv(const std::filesystem::path& path);

/// Field snapshot: CSV with a header carrying (n, resolutions, axis order),
/// one value per row in row-major node order. "bin" writes raw little-endian
/// float64 next to a JSON sidecar with the same header.
void write_field_csv(const std::filesystem::path& path, const ScalarField& f);
ScalarField read_field_csv(const std::filesystem::path& path);
void write_field_binary(const std::filesystem::path& path, const ScalarField& f);
ScalarField read_field_binary(const std::filesystem::path& path);

json structure_report_json(const StructureReport& rep);
json harnack_report_json(const HarnackReport& rep);
json run_summary_json(const RunSummary& s);

void write_json(const std::filesystem::path& path, const json& j);

/// Run manifest: written last, so its presence marks a completed run.
struct RunManifest {
    std::string subcommand;
    std::string preset_name;
    std::string config_path;
    std::string output_dir;
    long long seed = 0;
    std::string tool_version;
    std::string started_utc;
    std::string finished_utc;
    std::vector<std::string> files;
    std::string status;             // "pass" or "fail"
    std::string failing_invariant;  // empty when status == "pass"
};

void write_manifest(const std::filesystem::path& dir, const RunManifest& m);
RunManifest read_manifest(const std::filesystem::path& dir);

std::string utc_timestamp();

}  // namespace lambdaflow
