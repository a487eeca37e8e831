#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace lambdaflow {

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid combinatorial structure (K > n, n = 0, dimension mismatch, ...).
struct InvalidStructureError : Error {
    using Error::Error;
};

/// A point was outside (or too close to the boundary of) the operator's cone.
struct InadmissiblePointError : Error {
    int violated_margin = -1;   // index j of the first sigma_j <= 0, 1-based
    double margin_value = 0.0;
    InadmissiblePointError(const std::string& msg, int margin_index, double value)
        : Error(msg), violated_margin(margin_index), margin_value(value) {}
};

/// The rejection sampler failed to produce cone points.
struct SamplerStarvationError : Error {
    using Error::Error;
};

/// Schema or value error in a run configuration; `where` is a JSON-pointer-ish path.
struct ConfigError : Error {
    std::string where;
    ConfigError(const std::string& msg, std::string path)
        : Error(msg + " (at " + path + ")"), where(std::move(path)) {}
};

/// Numerical failure carrying the offending grid node, if known.
struct NumericalError : Error {
    std::ptrdiff_t node = -1;
    explicit NumericalError(const std::string& msg, std::ptrdiff_t node_index = -1)
        : Error(msg), node(node_index) {}
};

/// The flow could not accept a step after exhausting dt halvings.
struct FlowBreakdownError : Error {
    double t = 0.0;
    std::vector<double> margin_history;
    FlowBreakdownError(const std::string& msg, double time, std::vector<double> margins)
        : Error(msg), t(time), margin_history(std::move(margins)) {}
};

struct InvalidConstantError : Error {
    using Error::Error;
};

}  // namespace lambdaflow
