#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lambdaflow/flow.hpp"

namespace lambdaflow {

/// Harnack pipeline knobs (section "harnack" of the config).
struct HarnackParams {
    double alpha = 1.5;
    double t1 = 0.5;
    double t2 = 1.0;
    double t_snapshot = 0.25;  // flow time whose coefficients get frozen
    double bump = 0.9;         // u0 = 1 + bump * product-cosine bump
    double c_cfl = 1.0;
};

struct OutputSpec {
    std::string dir = "out";
    std::vector<std::string> formats = {"csv", "json", "svg"};
};

struct ParsedConfig {
    FlowConfig flow;
    HarnackParams harnack;
    OutputSpec output;
    std::vector<std::string> warnings;  // e.g. the (S0.2) rank condition
};

/// Strict schema: unknown keys are rejected with a path-addressed error;
/// defaults are c_cfl 0.2, integrator rk4, alpha 1.5, unit periods. The
/// returned flow config has manufactured psi realized and phi0 checked for
/// admissibility.
ParsedConfig parse_config(const std::filesystem::path& path);
ParsedConfig parse_config_json(const nlohmann::json& j, const std::string& origin);

/// Built-in initial data / target shapes.
ScalarField make_zero_field(const TorusGrid& g);
ScalarField make_sine_field(const TorusGrid& g, double amplitude, int axis);
/// amplitude * sum of cos(2 pi x_a / period_a) over active axes.
ScalarField make_mode_sum_field(const TorusGrid& g, double amplitude);
/// Product of (1 + cos)/2 over active axes: a smooth bump in [0, 1].
ScalarField make_bump_field(const TorusGrid& g);

}  // namespace lambdaflow
