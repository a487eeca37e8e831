#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace lambdaflow {

struct ChartSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

/// Flat SVG line chart, no external renderer. log_y plots log10 of positive
/// samples and drops the rest. Every plotted value comes straight from the
/// series (which the callers read back from the emitted CSV).
void write_svg_chart(const std::filesystem::path& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<ChartSeries>& series, bool log_y = false);

}  // namespace lambdaflow
