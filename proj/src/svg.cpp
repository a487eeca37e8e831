#include "lambdaflow/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "lambdaflow/errors.hpp"
#include "lambdaflow/io.hpp"

namespace lambdaflow {

namespace {
constexpr int kW = 640, kH = 420;
constexpr int kL = 70, kR = 20, kT = 40, kB = 50;
const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string fmt_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}
}  // namespace

void write_svg_chart(const std::filesystem::path& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<ChartSeries>& series, bool log_y) {
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
    std::vector<ChartSeries> plot;
    for (const auto& s : series) {
        ChartSeries p;
        p.name = s.name;
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            double y = s.y[i];
            if (log_y) {
                if (!(y > 0.0)) continue;
                y = std::log10(y);
            }
            if (!std::isfinite(y) || !std::isfinite(s.x[i])) continue;
            p.x.push_back(s.x[i]);
            p.y.push_back(y);
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
        plot.push_back(std::move(p));
    }
    if (!(xmin < xmax)) {
        xmin -= 0.5;
        xmax += 0.5;
    }
    if (!(ymin < ymax)) {
        ymin -= 0.5;
        ymax += 0.5;
    }
    if (!std::isfinite(xmin) || !std::isfinite(ymin)) {
        xmin = 0.0; xmax = 1.0; ymin = 0.0; ymax = 1.0;
    }
    auto px = [&](double x) { return kL + (x - xmin) / (xmax - xmin) * (kW - kL - kR); };
    auto py = [&](double y) { return kH - kB - (y - ymin) / (ymax - ymin) * (kH - kT - kB); };

    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
        << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << kW / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">"
        << title << "</text>\n";
    // axes
    out << "<line x1=\"" << kL << "\" y1=\"" << kH - kB << "\" x2=\"" << kW - kR << "\" y2=\""
        << kH - kB << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << kL << "\" y1=\"" << kT << "\" x2=\"" << kL << "\" y2=\""
        << kH - kB << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double xv = xmin + (xmax - xmin) * i / 5.0;
        const double yv = ymin + (ymax - ymin) * i / 5.0;
        out << "<text x=\"" << px(xv) << "\" y=\"" << kH - kB + 18
            << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt_tick(xv) << "</text>\n";
        out << "<text x=\"" << kL - 6 << "\" y=\"" << py(yv) + 4
            << "\" text-anchor=\"end\" font-size=\"11\">"
            << (log_y ? ("1e" + fmt_tick(yv)) : fmt_tick(yv)) << "</text>\n";
        out << "<line x1=\"" << kL << "\" y1=\"" << py(yv) << "\" x2=\"" << kW - kR
            << "\" y2=\"" << py(yv) << "\" stroke=\"#dddddd\"/>\n";
    }
    out << "<text x=\"" << (kL + kW - kR) / 2 << "\" y=\"" << kH - 12
        << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label << "</text>\n"
        << "<text x=\"16\" y=\"" << (kT + kH - kB) / 2
        << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
        << (kT + kH - kB) / 2 << ")\">" << y_label << (log_y ? " (log10)" : "")
        << "</text>\n";

    int ci = 0;
    for (const auto& p : plot) {
        if (!p.x.empty()) {
            out << "<polyline fill=\"none\" stroke=\"" << kColors[ci % 5]
                << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < p.x.size(); ++i)
                out << px(p.x[i]) << "," << py(p.y[i]) << " ";
            out << "\"/>\n";
        }
        out << "<text x=\"" << kW - kR - 8 << "\" y=\"" << kT + 16 + 16 * ci
            << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << kColors[ci % 5] << "\">"
            << p.name << "</text>\n";
        ++ci;
    }
    out << "</svg>\n";
}

}  // namespace lambdaflow
