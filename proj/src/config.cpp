#include "lambdaflow/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include "lambdaflow/io.hpp"

namespace lambdaflow {

namespace {
using nlohmann::json;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

[[noreturn]] void fail(const std::string& msg, const std::string& path) {
    throw ConfigError(msg, path);
}

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& path) {
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) fail("unknown key '" + key + "'", path);
}

const json& need(const json& j, const char* key, const std::string& path) {
    if (!j.contains(key)) fail(std::string("missing required key '") + key + "'", path);
    return j.at(key);
}

double need_number(const json& j, const char* key, const std::string& path) {
    const json& v = need(j, key, path);
    if (!v.is_number()) fail(std::string("'") + key + "' must be a number", path);
    return v.get<double>();
}

double opt_number(const json& j, const char* key, double fallback, const std::string& path) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) fail(std::string("'") + key + "' must be a number", path);
    return j.at(key).get<double>();
}

int need_int(const json& j, const char* key, const std::string& path) {
    const json& v = need(j, key, path);
    if (!v.is_number_integer()) fail(std::string("'") + key + "' must be an integer", path);
    return v.get<int>();
}

ScalarField build_scalar(const json& j, const TorusGrid& g, const std::string& path) {
    const std::string kind = need(j, "kind", path).get<std::string>();
    if (kind == "zero") {
        reject_unknown(j, {"kind"}, path);
        return make_zero_field(g);
    }
    if (kind == "sine") {
        reject_unknown(j, {"kind", "amplitude", "axis"}, path);
        const double a = opt_number(j, "amplitude", 0.1, path);
        const int axis = j.value("axis", 0);
        if (axis < 0 || axis >= g.axes()) fail("'axis' out of range", path);
        return make_sine_field(g, a, axis);
    }
    if (kind == "mode_sum") {
        reject_unknown(j, {"kind", "amplitude"}, path);
        return make_mode_sum_field(g, need_number(j, "amplitude", path));
    }
    if (kind == "prescribed") {
        reject_unknown(j, {"kind", "file"}, path);
        const std::string file = need(j, "file", path).get<std::string>();
        ScalarField f = read_field_csv(file);
        if (!f.grid.same_layout(g)) fail("prescribed field grid mismatch in " + file, path);
        return f;
    }
    fail("unknown scalar kind '" + kind + "'", path);
}

}  // namespace

ScalarField make_zero_field(const TorusGrid& g) { return ScalarField(g, 0.0); }

ScalarField make_sine_field(const TorusGrid& g, double amplitude, int axis) {
    ScalarField f(g);
    for (std::ptrdiff_t i = 0; i < g.total_nodes; ++i) {
        auto c = g.node_coords(i);
        f.v[i] = amplitude * std::sin(kTwoPi * g.axis_coord(axis, c[axis]) / g.periods[axis]);
    }
    return f;
}

ScalarField make_mode_sum_field(const TorusGrid& g, double amplitude) {
    ScalarField f(g);
    for (std::ptrdiff_t i = 0; i < g.total_nodes; ++i) {
        auto c = g.node_coords(i);
        double s = 0.0;
        for (int a = 0; a < g.axes(); ++a) {
            if (g.frozen(a)) continue;
            s += std::cos(kTwoPi * g.axis_coord(a, c[a]) / g.periods[a]);
        }
        f.v[i] = amplitude * s;
    }
    return f;
}

ScalarField make_bump_field(const TorusGrid& g) {
    ScalarField f(g, 1.0);
    for (std::ptrdiff_t i = 0; i < g.total_nodes; ++i) {
        auto c = g.node_coords(i);
        double prod = 1.0;
        for (int a = 0; a < g.axes(); ++a) {
            if (g.frozen(a)) continue;
            prod *= 0.5 * (1.0 + std::cos(kTwoPi * g.axis_coord(a, c[a]) / g.periods[a]));
        }
        f.v[i] = prod;
    }
    return f;
}

ParsedConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file", path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("JSON parse error: ") + e.what(), path.string());
    }
    return parse_config_json(j, path.string());
}

ParsedConfig parse_config_json(const json& j, const std::string& origin) {
    ParsedConfig out;
    reject_unknown(j, {"geometry", "operator", "data", "flow", "harnack", "output"}, origin);

    // geometry
    const json& geo = need(j, "geometry", origin);
    reject_unknown(geo, {"n", "K", "resolutions", "periods"}, origin + "/geometry");
    const int n = need_int(geo, "n", origin + "/geometry");
    const int K = need_int(geo, "K", origin + "/geometry");
    const json& res = need(geo, "resolutions", origin + "/geometry");
    if (!res.is_array() || static_cast<int>(res.size()) != 2 * n)
        fail("'resolutions' must be an array of 2n integers", origin + "/geometry");
    std::vector<int> resolutions = res.get<std::vector<int>>();
    std::vector<double> periods;
    if (geo.contains("periods")) {
        if (!geo.at("periods").is_array() ||
            static_cast<int>(geo.at("periods").size()) != 2 * n)
            fail("'periods' must be an array of 2n reals", origin + "/geometry");
        periods = geo.at("periods").get<std::vector<double>>();
    }
    TorusGrid grid;
    try {
        grid = TorusGrid::create(n, resolutions, periods);
    } catch (const Error& e) {
        fail(e.what(), origin + "/geometry");
    }

    // operator
    const json& op = need(j, "operator", origin);
    reject_unknown(op, {"family", "k", "weights"}, origin + "/operator");
    const std::string family = need(op, "family", origin + "/operator").get<std::string>();
    OperatorSpec spec;
    try {
        if (family == "sigma_k_root") {
            spec = make_sigma_k_operator(n, K, need_int(op, "k", origin + "/operator"));
        } else if (family == "linear_weights") {
            const json& w = need(op, "weights", origin + "/operator");
            spec = make_linear_operator(n, K, w.get<std::vector<double>>());
        } else {
            fail("unknown operator family '" + family + "'", origin + "/operator");
        }
    } catch (const InvalidStructureError& e) {
        fail(e.what(), origin + "/operator");
    }
    if (spec.family == OperatorFamily::sigma_k_root) {
        auto rc = rank_condition_s02(spec.structure, spec.k);
        if (!rc.ok)
            out.warnings.push_back(
                "WARNING: rank condition (S0.2) violated: rank " +
                std::to_string(rc.actual_rank) + " < required " +
                format_double(rc.required_rank) +
                " — run proceeds outside the convergence assumptions");
    }

    // data
    const json& data = need(j, "data", origin);
    reject_unknown(data, {"X", "psi", "phi0", "phi_dependent"}, origin + "/data");
    DataSpec ds;
    ds.phi_dependence = data.value("phi_dependent", false);
    if (ds.phi_dependence)
        fail("phi-dependent data is not supported in convergence runs", origin + "/data");
    {
        const json& X = need(data, "X", origin + "/data");
        const std::string kind = need(X, "kind", origin + "/data/X").get<std::string>();
        if (kind == "zero") {
            reject_unknown(X, {"kind"}, origin + "/data/X");
            ds.x_kind = XKind::zero;
        } else if (kind == "scaled_identity") {
            reject_unknown(X, {"kind", "c"}, origin + "/data/X");
            ds.x_kind = XKind::scaled_identity;
            ds.x_c = need_number(X, "c", origin + "/data/X");
        } else if (kind == "gradient_coupled") {
            reject_unknown(X, {"kind", "c"}, origin + "/data/X");
            ds.x_kind = XKind::gradient_coupled;
            ds.x_c = need_number(X, "c", origin + "/data/X");
        } else {
            fail("unknown X kind '" + kind + "'", origin + "/data/X");
        }
    }
    {
        const json& psi = need(data, "psi", origin + "/data");
        const std::string kind = need(psi, "kind", origin + "/data/psi").get<std::string>();
        if (kind == "constant") {
            reject_unknown(psi, {"kind", "value"}, origin + "/data/psi");
            ds.psi_kind = PsiKind::constant;
            ds.psi_value = need_number(psi, "value", origin + "/data/psi");
        } else if (kind == "manufactured") {
            reject_unknown(psi, {"kind", "target"}, origin + "/data/psi");
            ds.psi_kind = PsiKind::manufactured;
            ds.manufactured_target =
                build_scalar(need(psi, "target", origin + "/data/psi"), grid,
                             origin + "/data/psi/target");
        } else if (kind == "prescribed") {
            reject_unknown(psi, {"kind", "file"}, origin + "/data/psi");
            ds.psi_kind = PsiKind::prescribed_field;
            ds.psi_field = build_scalar(json{{"kind", "prescribed"},
                                             {"file", need(psi, "file", origin).get<std::string>()}},
                                        grid, origin + "/data/psi");
        } else {
            fail("unknown psi kind '" + kind + "'", origin + "/data/psi");
        }
    }
    ScalarField phi0 = build_scalar(need(data, "phi0", origin + "/data"), grid,
                                    origin + "/data/phi0");

    // flow
    FlowConfig& fc = out.flow;
    fc.op = std::move(spec);
    fc.data = std::move(ds);
    fc.grid = grid;
    fc.phi0 = std::move(phi0);
    const json& flow = need(j, "flow", origin);
    reject_unknown(flow,
                   {"integrator", "c_cfl", "t_max", "tol_osc", "sample_interval", "seed",
                    "store_snapshots", "method"},
                   origin + "/flow");
    const std::string integ = flow.value("integrator", "rk4");
    if (integ == "euler")
        fc.integrator = Integrator::euler;
    else if (integ == "rk4")
        fc.integrator = Integrator::rk4;
    else
        fail("unknown integrator '" + integ + "'", origin + "/flow");
    const std::string method = flow.value("method", "spectral");
    if (method == "spectral")
        fc.method = DerivMethod::spectral;
    else if (method == "central4")
        fc.method = DerivMethod::central4;
    else
        fail("unknown derivative method '" + method + "'", origin + "/flow");
    fc.c_cfl = opt_number(flow, "c_cfl", 0.2, origin + "/flow");
    if (fc.c_cfl <= 0.0 || fc.c_cfl > 1.0) fail("'c_cfl' must lie in (0, 1]", origin + "/flow");
    fc.t_max = need_number(flow, "t_max", origin + "/flow");
    if (fc.t_max <= 0.0) fail("'t_max' must be positive", origin + "/flow");
    fc.tol_osc = opt_number(flow, "tol_osc", 1e-7, origin + "/flow");
    if (fc.tol_osc < 0.0) fail("'tol_osc' must be >= 0", origin + "/flow");
    fc.sample_interval = opt_number(flow, "sample_interval", 0.01, origin + "/flow");
    if (fc.sample_interval <= 0.0) fail("'sample_interval' must be positive", origin + "/flow");
    fc.seed = static_cast<long long>(opt_number(flow, "seed", 0.0, origin + "/flow"));
    fc.store_snapshots = flow.value("store_snapshots", true);

    // harnack (optional)
    if (j.contains("harnack")) {
        const json& h = j.at("harnack");
        reject_unknown(h, {"alpha", "t1", "t2", "t_snapshot", "bump", "c_cfl"},
                       origin + "/harnack");
        out.harnack.alpha = opt_number(h, "alpha", 1.5, origin + "/harnack");
        if (out.harnack.alpha <= 1.0 || out.harnack.alpha >= 2.0)
            fail("'alpha' must lie in the open interval (1, 2)", origin + "/harnack");
        out.harnack.t1 = opt_number(h, "t1", 0.5, origin + "/harnack");
        out.harnack.t2 = opt_number(h, "t2", 1.0, origin + "/harnack");
        if (!(out.harnack.t1 > 0.0) || !(out.harnack.t1 < out.harnack.t2))
            fail("need 0 < t1 < t2", origin + "/harnack");
        out.harnack.t_snapshot = opt_number(h, "t_snapshot", 0.25, origin + "/harnack");
        out.harnack.bump = opt_number(h, "bump", 0.9, origin + "/harnack");
        out.harnack.c_cfl = opt_number(h, "c_cfl", 1.0, origin + "/harnack");
    }
    out.flow.alpha_harnack = out.harnack.alpha;

    // output (optional)
    if (j.contains("output")) {
        const json& o = j.at("output");
        reject_unknown(o, {"dir", "formats"}, origin + "/output");
        out.output.dir = o.value("dir", std::string("out"));
        if (o.contains("formats"))
            out.output.formats = o.at("formats").get<std::vector<std::string>>();
        for (const auto& f : out.output.formats)
            if (f != "csv" && f != "json" && f != "svg" && f != "bin")
                fail("unknown output format '" + f + "'", origin + "/output");
    }

    // realize manufactured psi and check phi0 admissibility (worst node in
    // the error message)
    if (out.flow.data.psi_kind == PsiKind::manufactured) realize_manufactured_psi(out.flow);
    FlowEngine probe(out.flow);
    probe.initial_state();
    return out;
}

}  // namespace lambdaflow
