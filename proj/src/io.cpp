#include "lambdaflow/io.hpp"

#include <charconv>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

namespace lambdaflow {

namespace fs = std::filesystem;

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

void write_records_csv(const fs::path& path, const std::vector<DiagnosticsRecord>& records) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    const auto& cols = diagnostics_columns();
    for (std::size_t i = 0; i < cols.size(); ++i)
        out << cols[i] << (i + 1 < cols.size() ? "," : "\n");
    for (const auto& r : records) {
        const double vals[] = {r.t,
                               r.sup_phi_t,
                               r.inf_phi_t,
                               r.osc_phi_t,
                               r.sup_grad_sq,
                               r.grad_bound_ratio,
                               r.sup_hess,
                               r.osc_phi,
                               r.admissibility_margin,
                               r.chi0_max,
                               r.residual};
        for (std::size_t i = 0; i < std::size(vals); ++i)
            out << format_double(vals[i]) << (i + 1 < std::size(vals) ? "," : "\n");
    }
}

std::vector<DiagnosticsRecord> read_records_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw Error("empty records file " + path.string());
    std::vector<DiagnosticsRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> vals;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
        if (vals.size() != diagnostics_columns().size())
            throw Error("malformed record row in " + path.string());
        DiagnosticsRecord r;
        r.t = vals[0];
        r.sup_phi_t = vals[1];
        r.inf_phi_t = vals[2];
        r.osc_phi_t = vals[3];
        r.sup_grad_sq = vals[4];
        r.grad_bound_ratio = vals[5];
        r.sup_hess = vals[6];
        r.osc_phi = vals[7];
        r.admissibility_margin = vals[8];
        r.chi0_max = vals[9];
        r.residual = vals[10];
        out.push_back(r);
    }
    return out;
}

namespace {
void write_field_header(std::ostream& out, const TorusGrid& g) {
    out << "# n=" << g.n << "\n# resolutions=";
    for (int a = 0; a < g.axes(); ++a) out << g.resolutions[a] << (a + 1 < g.axes() ? "," : "");
    out << "\n# periods=";
    for (int a = 0; a < g.axes(); ++a)
        out << format_double(g.periods[a]) << (a + 1 < g.axes() ? "," : "");
    out << "\n# axes=";
    for (int i = 1; i <= g.n; ++i) out << "x" << i << ",y" << i << (i < g.n ? "," : "");
    out << "\n# order=row-major\n";
}

TorusGrid parse_field_header(std::istream& in) {
    int n = 0;
    std::vector<int> res;
    std::vector<double> per;
    std::string line;
    while (in.peek() == '#') {
        std::getline(in, line);
        if (line.rfind("# n=", 0) == 0) n = std::stoi(line.substr(4));
        if (line.rfind("# resolutions=", 0) == 0) {
            std::stringstream ss(line.substr(14));
            std::string tok;
            while (std::getline(ss, tok, ',')) res.push_back(std::stoi(tok));
        }
        if (line.rfind("# periods=", 0) == 0) {
            std::stringstream ss(line.substr(10));
            std::string tok;
            while (std::getline(ss, tok, ',')) per.push_back(std::stod(tok));
        }
    }
    return TorusGrid::create(n, res, per);
}
}  // namespace

void write_field_csv(const fs::path& path, const ScalarField& f) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    write_field_header(out, f.grid);
    for (double v : f.v) out << format_double(v) << "\n";
}

ScalarField read_field_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    TorusGrid g = parse_field_header(in);
    ScalarField f(g);
    for (std::ptrdiff_t i = 0; i < g.total_nodes; ++i)
        if (!(in >> f.v[i])) throw Error("truncated field file " + path.string());
    return f;
}

void write_field_binary(const fs::path& path, const ScalarField& f) {
    json side;
    side["n"] = f.grid.n;
    side["resolutions"] = f.grid.resolutions;
    side["periods"] = f.grid.periods;
    side["order"] = "row-major";
    side["dtype"] = "float64-le";
    write_json(fs::path(path).replace_extension(".meta.json"), side);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(f.v.data()),
              static_cast<std::streamsize>(f.v.size() * sizeof(double)));
}

ScalarField read_field_binary(const fs::path& path) {
    std::ifstream meta(fs::path(path).replace_extension(".meta.json"));
    if (!meta) throw Error("missing sidecar for " + path.string());
    json side = json::parse(meta);
    TorusGrid g = TorusGrid::create(side.at("n").get<int>(),
                                    side.at("resolutions").get<std::vector<int>>(),
                                    side.at("periods").get<std::vector<double>>());
    ScalarField f(g);
    std::ifstream in(path, std::ios::binary);
    in.read(reinterpret_cast<char*>(f.v.data()),
            static_cast<std::streamsize>(f.v.size() * sizeof(double)));
    if (!in) throw Error("truncated field file " + path.string());
    return f;
}

json structure_report_json(const StructureReport& rep) {
    json j;
    j["min_grad_component"] = rep.min_grad_component;
    j["max_hessian_eigenvalue"] = rep.max_hessian_eigenvalue;
    j["euler_defect"] = rep.euler_defect;
    j["C0_estimate"] = rep.C0_estimate;
    j["c0_s03_estimate"] = rep.c0_s03_estimate;
    j["p4_margin"] = rep.p4_margin;
    j["p5_ray_limit_ok"] = rep.p5_ray_limit_ok;
    j["samples_used"] = rep.samples_used;
    j["seed"] = rep.seed;
    return j;
}

json harnack_report_json(const HarnackReport& rep) {
    json j;
    j["t1"] = rep.t1;
    j["t2"] = rep.t2;
    j["sup_u_t1"] = rep.sup_u_t1;
    j["inf_u_t2"] = rep.inf_u_t2;
    j["ratio"] = rep.ratio;
    j["fitted_constants"] = {rep.C1, rep.C2, rep.C3};
    j["bound"] = rep.bound;
    j["satisfied"] = rep.satisfied;
    return j;
}

json run_summary_json(const RunSummary& s) {
    json j;
    j["a"] = s.a;
    j["beta"] = s.beta;
    j["C_decay"] = s.C_decay;
    j["delta_recursion"] = s.delta_recursion;
    j["harnack_C"] = s.harnack_C;
    j["final_residual"] = s.final_residual;
    j["termination"] = termination_name(s.termination);
    return j;
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << j.dump(2) << "\n";
}

void write_manifest(const fs::path& dir, const RunManifest& m) {
    json j;
    j["subcommand"] = m.subcommand;
    j["preset_name"] = m.preset_name;
    j["config_path"] = m.config_path;
    j["output_dir"] = m.output_dir;
    j["seed"] = m.seed;
    j["tool_version"] = m.tool_version;
    j["started_utc"] = m.started_utc;
    j["finished_utc"] = m.finished_utc;
    j["files"] = m.files;
    j["status"] = m.status;
    j["failing_invariant"] = m.failing_invariant;
    // temp + rename: the manifest appears only once complete
    const fs::path tmp = dir / ".manifest.json.tmp";
    write_json(tmp, j);
    fs::rename(tmp, dir / "manifest.json");
}

RunManifest read_manifest(const fs::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw Error("no manifest in " + dir.string() + " (run incomplete?)");
    json j = json::parse(in);
    RunManifest m;
    m.subcommand = j.value("subcommand", "");
    m.preset_name = j.value("preset_name", "");
    m.config_path = j.value("config_path", "");
    m.output_dir = j.value("output_dir", "");
    m.seed = j.value("seed", 0LL);
    m.tool_version = j.value("tool_version", "");
    m.started_utc = j.value("started_utc", "");
    m.finished_utc = j.value("finished_utc", "");
    m.files = j.value("files", std::vector<std::string>{});
    m.status = j.value("status", "");
    m.failing_invariant = j.value("failing_invariant", "");
    return m;
}

std::string utc_timestamp() {
    std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

}  // namespace lambdaflow
