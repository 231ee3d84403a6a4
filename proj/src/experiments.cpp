#include "parastab/experiments.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "parastab/error.hpp"
#include "parastab/poincare.hpp"

namespace parastab {

namespace {

// ---------------------------------------------------------------------------
// YAML reading

[[noreturn]] void parse_fail(const std::string& source, const YAML::Node& node, const std::string& field,
                             const std::string& what) {
    std::string where = source;
    if (node.IsDefined() && node.Mark().line >= 0) where += ":" + std::to_string(node.Mark().line + 1);
    throw Error(ErrorKind::ParseError, where + ": field '" + field + "': " + what);
}

struct Reader {
    std::string source;

    template <typename T>
    T as(const YAML::Node& node, const std::string& field) const {
        if (!node.IsScalar()) parse_fail(source, node, field, "expected a scalar");
        try {
            return node.as<T>();
        } catch (const YAML::Exception&) {
            parse_fail(source, node, field, "cannot convert '" + node.Scalar() + "'");
        }
    }

    template <typename T>
    T get(const YAML::Node& map, const std::string& key, const std::string& ctx) const {
        const YAML::Node n = map[key];
        if (!n) parse_fail(source, map, ctx + key, "missing");
        return as<T>(n, ctx + key);
    }

    template <typename T>
    T get_or(const YAML::Node& map, const std::string& key, const std::string& ctx, T fallback) const {
        const YAML::Node n = map[key];
        if (!n) return fallback;
        return as<T>(n, ctx + key);
    }

    std::vector<double> doubles(const YAML::Node& node, const std::string& field) const {
        if (!node.IsSequence()) parse_fail(source, node, field, "expected a list");
        std::vector<double> out;
        for (std::size_t i = 0; i < node.size(); ++i) out.push_back(as<double>(node[i], field));
        return out;
    }

    Vec2 vec(const YAML::Node& node, const std::string& field, int dim) const {
        const std::vector<double> v = doubles(node, field);
        if (v.size() != static_cast<std::size_t>(dim)) {
            parse_fail(source, node, field, "expected " + std::to_string(dim) + " components");
        }
        return {v[0], dim == 2 ? v[1] : 0.0};
    }

    void require_map(const YAML::Node& node, const std::string& field) const {
        if (!node.IsMap()) parse_fail(source, node, field, "expected a mapping");
    }

    void only_keys(const YAML::Node& map, const std::set<std::string>& allowed, const std::string& ctx) const {
        for (const auto& kv : map) {
            const std::string key = kv.first.as<std::string>();
            if (!allowed.count(key)) parse_fail(source, kv.first, ctx + key, "unknown field");
        }
    }

    void check(bool ok, const YAML::Node& node, const std::string& field, const std::string& what) const {
        if (!ok) throw Error(ErrorKind::RangeError, source + ":" + std::to_string(node.Mark().line + 1) +
                                                        ": field '" + field + "': " + what);
    }
};

ProblemSpec read_problem(const Reader& rd, const YAML::Node& node, const std::string& ctx, int dim) {
    rd.require_map(node, ctx);
    rd.only_keys(node, {"catalog", "params", "modes", "bumps"}, ctx + ".");
    ProblemSpec spec;
    spec.catalog = rd.get<std::string>(node, "catalog", ctx + ".");
    spec.params = catalog_defaults(spec.catalog, dim);
    if (const YAML::Node params = node["params"]) {
        rd.require_map(params, ctx + ".params");
        for (const auto& kv : params) {
            const std::string key = kv.first.as<std::string>();
            try {
                spec.params.set(key, rd.as<double>(kv.second, ctx + ".params." + key));
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::RangeError) throw;
                parse_fail(rd.source, kv.first, ctx + ".params." + key, "unknown parameter");
            }
        }
    }
    if (const YAML::Node modes = node["modes"]) {
        if (!modes.IsSequence()) parse_fail(rd.source, modes, ctx + ".modes", "expected a list");
        spec.params.modes.clear();
        for (const auto& m : modes) {
            const std::string c = ctx + ".modes[].";
            rd.require_map(m, c);
            rd.only_keys(m, {"amp", "kx", "ky", "phase"}, c);
            spec.params.modes.push_back({rd.get_or(m, "amp", c, 1.0), rd.get_or(m, "kx", c, 1.0),
                                         rd.get_or(m, "ky", c, 0.0), rd.get_or(m, "phase", c, 0.0)});
        }
    }
    if (const YAML::Node bumps = node["bumps"]) {
        if (!bumps.IsSequence()) parse_fail(rd.source, bumps, ctx + ".bumps", "expected a list");
        spec.params.bumps.clear();
        for (const auto& b : bumps) {
            const std::string c = ctx + ".bumps[].";
            rd.require_map(b, c);
            rd.only_keys(b, {"amp", "center", "width"}, c);
            Bump bump;
            bump.amp = rd.get_or(b, "amp", c, 1.0);
            if (!b["center"]) parse_fail(rd.source, b, c + "center", "missing");
            bump.center = rd.vec(b["center"], c + "center", dim);
            bump.width = rd.get_or(b, "width", c, 0.5);
            rd.check(bump.width > 0.0, b, c + "width", "must be positive");
            spec.params.bumps.push_back(bump);
        }
    }
    return spec;
}

RegionConfig read_region(const Reader& rd, const YAML::Node& node, const std::string& ctx, int dim, double extent,
                         std::size_t index) {
    rd.require_map(node, ctx);
    rd.only_keys(node, {"label", "shape", "center", "radius", "measure", "lo", "hi"}, ctx + ".");
    RegionConfig r;
    r.label = rd.get_or<std::string>(node, "label", ctx + ".", "E" + std::to_string(index));
    r.shape = rd.get<std::string>(node, "shape", ctx + ".");
    if (r.shape == "full") {
        rd.only_keys(node, {"label", "shape"}, ctx + ".");
    } else if (r.shape == "ball") {
        rd.only_keys(node, {"label", "shape", "center", "radius", "measure"}, ctx + ".");
        r.center = node["center"] ? rd.vec(node["center"], ctx + ".center", dim)
                                  : Vec2{0.5 * extent, dim == 2 ? 0.5 * extent : 0.0};
        if (node["radius"].IsDefined() == node["measure"].IsDefined()) {
            parse_fail(rd.source, node, ctx, "a ball needs exactly one of 'radius' and 'measure'");
        }
        if (node["radius"]) {
            r.radius = rd.get<double>(node, "radius", ctx + ".");
            rd.check(*r.radius > 0.0, node, ctx + ".radius", "must be positive");
        } else {
            r.measure = rd.get<double>(node, "measure", ctx + ".");
            rd.check(*r.measure > 0.0, node, ctx + ".measure", "must be positive");
        }
    } else if (r.shape == "box") {
        rd.only_keys(node, {"label", "shape", "lo", "hi"}, ctx + ".");
        if (!node["lo"] || !node["hi"]) parse_fail(rd.source, node, ctx, "a box needs 'lo' and 'hi'");
        r.lo = rd.vec(node["lo"], ctx + ".lo", dim);
        r.hi = rd.vec(node["hi"], ctx + ".hi", dim);
        for (int d = 0; d < dim; ++d) {
            rd.check(r.lo[static_cast<std::size_t>(d)] < r.hi[static_cast<std::size_t>(d)], node, ctx + ".lo",
                     "lo must be below hi");
        }
    } else {
        parse_fail(rd.source, node["shape"], ctx + ".shape", "expected full, ball or box");
    }
    return r;
}

Scenario read_scenario(const Reader& rd, const YAML::Node& node, std::size_t index) {
    const std::string ctx = "scenarios[" + std::to_string(index) + "]";
    rd.require_map(node, ctx);
    rd.only_keys(node,
                 {"id", "grid", "T", "times", "p", "problem_u", "problem_v", "regions", "quadrature", "samples",
                  "control", "sweep"},
                 ctx + ".");
    Scenario s;
    s.id = rd.get<std::string>(node, "id", ctx + ".");
    rd.check(!s.id.empty(), node, ctx + ".id", "must not be empty");

    const YAML::Node grid = node["grid"];
    if (!grid) parse_fail(rd.source, node, ctx + ".grid", "missing");
    rd.require_map(grid, ctx + ".grid");
    rd.only_keys(grid, {"dim", "extent", "cells"}, ctx + ".grid.");
    s.dim = rd.get<int>(grid, "dim", ctx + ".grid.");
    s.extent = rd.get<double>(grid, "extent", ctx + ".grid.");
    s.cells = rd.get<int>(grid, "cells", ctx + ".grid.");
    rd.check(s.dim == 1 || s.dim == 2, grid, ctx + ".grid.dim", "must be 1 or 2");
    rd.check(s.extent > 0.0 && std::isfinite(s.extent), grid, ctx + ".grid.extent", "must be positive");
    rd.check(s.cells >= 8 && s.cells <= 4096, grid, ctx + ".grid.cells", "must lie in [8, 4096]");

    s.t_end = rd.get<double>(node, "T", ctx + ".");
    rd.check(s.t_end > 0.0 && std::isfinite(s.t_end), node, ctx + ".T", "must be positive");
    if (node["times"]) {
        s.times = rd.doubles(node["times"], ctx + ".times");
    } else {
        for (int k = 1; k <= 5; ++k) s.times.push_back(s.t_end * k / 5.0);
    }
    rd.check(!s.times.empty(), node, ctx + ".times", "must not be empty");
    rd.check(std::is_sorted(s.times.begin(), s.times.end()), node, ctx + ".times", "must be increasing");
    for (double t : s.times) rd.check(t > 0.0 && t <= s.t_end, node, ctx + ".times", "must lie in (0, T]");
    rd.check(std::abs(s.times.back() - s.t_end) <= 1e-12 * s.t_end, node, ctx + ".times", "must end at T");

    s.p = node["p"] ? rd.doubles(node["p"], ctx + ".p") : std::vector<double>{2.0};
    rd.check(!s.p.empty(), node, ctx + ".p", "must not be empty");
    for (double e : s.p) rd.check(e >= 1.0 && std::isfinite(e), node, ctx + ".p", "entries must be finite and >= 1");

    if (!node["problem_u"]) parse_fail(rd.source, node, ctx + ".problem_u", "missing");
    if (!node["problem_v"]) parse_fail(rd.source, node, ctx + ".problem_v", "missing");
    s.u = read_problem(rd, node["problem_u"], ctx + ".problem_u", s.dim);
    s.v = read_problem(rd, node["problem_v"], ctx + ".problem_v", s.dim);

    if (const YAML::Node regions = node["regions"]) {
        if (!regions.IsSequence()) parse_fail(rd.source, regions, ctx + ".regions", "expected a list");
        for (std::size_t i = 0; i < regions.size(); ++i) {
            s.regions.push_back(
                read_region(rd, regions[i], ctx + ".regions[" + std::to_string(i) + "]", s.dim, s.extent, i));
        }
    } else {
        RegionConfig full;
        full.label = "full";
        s.regions.push_back(full);
    }
    rd.check(!s.regions.empty(), node, ctx + ".regions", "must not be empty");

    if (const YAML::Node quad = node["quadrature"]) {
        rd.require_map(quad, ctx + ".quadrature");
        rd.only_keys(quad, {"nodes", "check_nodes"}, ctx + ".quadrature.");
        s.nodes = rd.get_or(quad, "nodes", ctx + ".quadrature.", s.nodes);
        s.check_nodes = rd.get_or(quad, "check_nodes", ctx + ".quadrature.", s.check_nodes);
        rd.check(s.nodes >= 1 && s.nodes <= 64, quad, ctx + ".quadrature.nodes", "must lie in [1, 64]");
        rd.check(s.check_nodes >= 0 && s.check_nodes <= 64, quad, ctx + ".quadrature.check_nodes",
                 "must lie in [0, 64]");
    }
    s.samples = rd.get_or(node, "samples", ctx + ".", s.samples);
    rd.check(s.samples >= 1000, node, ctx + ".samples", "must be >= 1000");

    if (const YAML::Node control = node["control"]) {
        rd.require_map(control, ctx + ".control");
        rd.only_keys(control, {"cfl_fraction", "dt_max", "store_every"}, ctx + ".control.");
        s.control.cfl_fraction = rd.get_or(control, "cfl_fraction", ctx + ".control.", s.control.cfl_fraction);
        if (control["dt_max"]) s.control.dt_max = rd.get<double>(control, "dt_max", ctx + ".control.");
        s.control.store_every = rd.get_or(control, "store_every", ctx + ".control.", s.control.store_every);
        rd.check(s.control.cfl_fraction > 0.0 && s.control.cfl_fraction <= 1.0, control,
                 ctx + ".control.cfl_fraction", "must lie in (0, 1]");
        rd.check(s.control.dt_max > 0.0, control, ctx + ".control.dt_max", "must be positive");
        rd.check(s.control.store_every >= 1, control, ctx + ".control.store_every", "must be >= 1");
    }

    if (const YAML::Node sweep = node["sweep"]) {
        rd.require_map(sweep, ctx + ".sweep");
        rd.only_keys(sweep, {"path", "values"}, ctx + ".sweep.");
        SweepSpec sw;
        sw.path = rd.get<std::string>(sweep, "path", ctx + ".sweep.");
        const auto dot = sw.path.find('.');
        const std::string head = sw.path.substr(0, dot);
        if (dot == std::string::npos || (head != "problem_u" && head != "problem_v")) {
            parse_fail(rd.source, sweep["path"], ctx + ".sweep.path", "expected problem_u.<key> or problem_v.<key>");
        }
        try {
            (void)CatalogParams{}.get(sw.path.substr(dot + 1));
        } catch (const Error&) {
            parse_fail(rd.source, sweep["path"], ctx + ".sweep.path", "unknown parameter");
        }
        if (!sweep["values"]) parse_fail(rd.source, sweep, ctx + ".sweep.values", "missing");
        sw.values = rd.doubles(sweep["values"], ctx + ".sweep.values");
        rd.check(sw.values.size() >= 2, sweep, ctx + ".sweep.values", "needs at least two values");
        s.sweep = std::move(sw);
    }
    return s;
}

// ---------------------------------------------------------------------------
// YAML writing

void emit_vec(YAML::Emitter& out, const Vec2& v, int dim) {
    out << YAML::Flow << YAML::BeginSeq << v[0];
    if (dim == 2) out << v[1];
    out << YAML::EndSeq;
}

void emit_doubles(YAML::Emitter& out, const std::vector<double>& v) {
    out << YAML::Flow << YAML::BeginSeq;
    for (double x : v) out << x;
    out << YAML::EndSeq;
}

void emit_problem(YAML::Emitter& out, const ProblemSpec& spec, int dim) {
    out << YAML::BeginMap;
    out << YAML::Key << "catalog" << YAML::Value << spec.catalog;
    out << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
    for (const auto& key : CatalogParams::scalar_keys()) {
        if (dim == 1 && key.size() > 2 && key.substr(key.size() - 2) == "_y") continue;
        out << YAML::Key << key << YAML::Value << spec.params.get(key);
    }
    out << YAML::EndMap;
    out << YAML::Key << "modes" << YAML::Value << YAML::BeginSeq;
    for (const auto& m : spec.params.modes) {
        out << YAML::Flow << YAML::BeginMap << YAML::Key << "amp" << YAML::Value << m.amp << YAML::Key << "kx"
            << YAML::Value << m.kx << YAML::Key << "ky" << YAML::Value << m.ky << YAML::Key << "phase" << YAML::Value
            << m.phase << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::Key << "bumps" << YAML::Value << YAML::BeginSeq;
    for (const auto& b : spec.params.bumps) {
        out << YAML::Flow << YAML::BeginMap << YAML::Key << "amp" << YAML::Value << b.amp << YAML::Key << "center"
            << YAML::Value;
        emit_vec(out, b.center, dim);
        out << YAML::Key << "width" << YAML::Value << b.width << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::EndMap;
}

void emit_region(YAML::Emitter& out, const RegionConfig& r, int dim) {
    out << YAML::BeginMap;
    out << YAML::Key << "label" << YAML::Value << r.label;
    out << YAML::Key << "shape" << YAML::Value << r.shape;
    if (r.shape == "ball") {
        out << YAML::Key << "center" << YAML::Value;
        emit_vec(out, r.center, dim);
        if (r.radius) out << YAML::Key << "radius" << YAML::Value << *r.radius;
        if (r.measure) out << YAML::Key << "measure" << YAML::Value << *r.measure;
    } else if (r.shape == "box") {
        out << YAML::Key << "lo" << YAML::Value;
        emit_vec(out, r.lo, dim);
        out << YAML::Key << "hi" << YAML::Value;
        emit_vec(out, r.hi, dim);
    }
    out << YAML::EndMap;
}

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

nlohmann::json numbers(const std::vector<double>& v) {
    nlohmann::json out = nlohmann::json::array();
    for (double x : v) out.push_back(number_or_null(x));
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
    f << text;
}

}  // namespace

// ---------------------------------------------------------------------------

Grid Scenario::grid() const { return Grid(dim, extent, cells); }

ParabolicProblem Scenario::problem_u() const { return make_catalog_problem(id + ".u", grid(), u.params); }

ParabolicProblem Scenario::problem_v() const { return make_catalog_problem(id + ".v", grid(), v.params); }

std::vector<RegionSpec> Scenario::build_regions() const {
    const Grid g = grid();
    std::vector<RegionSpec> out;
    for (const auto& r : regions) {
        if (r.shape == "full") {
            out.push_back({r.label, Region::full(g)});
        } else if (r.shape == "ball") {
            const double radius = r.radius ? *r.radius : ball_radius_for_measure(dim, *r.measure);
            out.push_back({r.label, Region::ball(g, r.center, radius)});
        } else {
            out.push_back({r.label, Region::box(g, r.lo, r.hi)});
        }
        if (out.back().region.empty()) {
            throw Error(ErrorKind::EmptyRegion, "scenario '" + id + "': region '" + r.label + "' has no cells");
        }
    }
    return out;
}

Scenario Scenario::refined(int factor) const {
    Scenario s = *this;
    s.cells *= factor;
    return s;
}

Suite parse_suite(const std::string& text, const std::string& source) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw Error(ErrorKind::ParseError, source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    const Reader rd{source};
    Suite suite;
    if (!root || root.IsNull()) return suite;
    rd.require_map(root, "<root>");
    rd.only_keys(root, {"seed", "scenarios"}, "");
    suite.seed = rd.get_or<std::uint64_t>(root, "seed", "", suite.seed);
    if (const YAML::Node list = root["scenarios"]) {
        if (list.IsNull()) return suite;
        if (!list.IsSequence()) parse_fail(source, list, "scenarios", "expected a list");
        std::set<std::string> ids;
        for (std::size_t i = 0; i < list.size(); ++i) {
            Scenario s = read_scenario(rd, list[i], i);
            if (!ids.insert(s.id).second) {
                parse_fail(source, list[i], "scenarios[" + std::to_string(i) + "].id", "duplicate id '" + s.id + "'");
            }
            suite.scenarios.push_back(std::move(s));
        }
    }
    return suite;
}

Suite load_suite(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::ParseError, "cannot open " + path.string());
    std::stringstream buf;
    buf << f.rdbuf();
    return parse_suite(buf.str(), path.string());
}

std::string serialize_suite(const Suite& suite) {
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;
    out << YAML::Key << "seed" << YAML::Value << suite.seed;
    out << YAML::Key << "scenarios" << YAML::Value << YAML::BeginSeq;
    for (const Scenario& s : suite.scenarios) {
        out << YAML::BeginMap;
        out << YAML::Key << "id" << YAML::Value << s.id;
        out << YAML::Key << "grid" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "dim"
            << YAML::Value << s.dim << YAML::Key << "extent" << YAML::Value << s.extent << YAML::Key << "cells"
            << YAML::Value << s.cells << YAML::EndMap;
        out << YAML::Key << "T" << YAML::Value << s.t_end;
        out << YAML::Key << "times" << YAML::Value;
        emit_doubles(out, s.times);
        out << YAML::Key << "p" << YAML::Value;
        emit_doubles(out, s.p);
        out << YAML::Key << "problem_u" << YAML::Value;
        emit_problem(out, s.u, s.dim);
        out << YAML::Key << "problem_v" << YAML::Value;
        emit_problem(out, s.v, s.dim);
        out << YAML::Key << "regions" << YAML::Value << YAML::BeginSeq;
        for (const auto& r : s.regions) emit_region(out, r, s.dim);
        out << YAML::EndSeq;
        out << YAML::Key << "quadrature" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "nodes"
            << YAML::Value << s.nodes << YAML::Key << "check_nodes" << YAML::Value << s.check_nodes << YAML::EndMap;
        out << YAML::Key << "samples" << YAML::Value << s.samples;
        out << YAML::Key << "control" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "cfl_fraction"
            << YAML::Value << s.control.cfl_fraction;
        if (std::isfinite(s.control.dt_max)) out << YAML::Key << "dt_max" << YAML::Value << s.control.dt_max;
        out << YAML::Key << "store_every" << YAML::Value << s.control.store_every << YAML::EndMap;
        if (s.sweep) {
            out << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap << YAML::Key << "path" << YAML::Value
                << s.sweep->path << YAML::Key << "values" << YAML::Value;
            emit_doubles(out, s.sweep->values);
            out << YAML::EndMap;
        }
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

std::string normalize_config(const std::string& text) { return serialize_suite(parse_suite(text)); }

// ---------------------------------------------------------------------------
// Running

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw Error(ErrorKind::InvalidArgument, "slope fit needs equal-length inputs");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0 && y[i] > 0.0)) continue;
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++m;
    }
    if (m < 2) throw Error(ErrorKind::EmptyList, "slope fit needs two positive points");
    const double denom = m * sxx - sx * sx;
    if (denom == 0.0) throw Error(ErrorKind::RangeError, "slope fit with identical abscissae");
    return (m * sxy - sx * sy) / denom;
}

namespace {

VerifyOptions verify_options(const Scenario& s, const RunOptions& options) {
    VerifyOptions vo;
    vo.control = s.control;
    if (options.store_every) vo.control.store_every = *options.store_every;
    vo.nodes = s.nodes;
    vo.check_nodes = s.check_nodes;
    vo.samples = s.samples;
    vo.threads = options.threads;
    return vo;
}

template <typename Fn>
auto with_scenario(const std::string& id, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        throw Error(e.kind(), "scenario '" + id + "': " + e.detail());
    }
}

}  // namespace

SweepResult run_sweep(const Scenario& scenario, const RunOptions& options) {
    if (!scenario.sweep) throw Error(ErrorKind::InvalidArgument, "scenario '" + scenario.id + "' has no sweep");
    return with_scenario(scenario.id, [&] {
        const SweepSpec& sw = *scenario.sweep;
        const auto dot = sw.path.find('.');
        const bool on_u = sw.path.substr(0, dot) == "problem_u";
        const std::string key = sw.path.substr(dot + 1);
        SweepResult out;
        out.path = sw.path;
        VerifyOptions vo = verify_options(scenario, options);
        vo.sensitivities = false;
        const std::vector<RegionSpec> regions = scenario.build_regions();
        const RegionSpec first_region[] = {regions.front()};
        const double first_p[] = {scenario.p.front()};
        for (double value : sw.values) {
            Scenario s = scenario;
            (on_u ? s.u : s.v).params.set(key, value);
            const StabilityReport rep =
                verify_matrix(s.id, s.problem_u(), s.problem_v(), first_region, first_p, s.times, vo).front();
            out.values.push_back(value);
            out.diffs_sum.push_back(rep.diffs.sum());
            out.lhs.push_back(rep.lhs.back());
            out.fitted_c.push_back(rep.fitted_c);
        }
        out.slope = loglog_slope(out.diffs_sum, out.lhs);
        return out;
    });
}

ScenarioResult run_scenario(const Scenario& scenario, const RunOptions& options) {
    return with_scenario(scenario.id, [&] {
        ScenarioResult out;
        out.id = scenario.id;
        const std::vector<RegionSpec> regions = scenario.build_regions();
        out.reports = verify_matrix(scenario.id, scenario.problem_u(), scenario.problem_v(), regions, scenario.p,
                                    scenario.times, verify_options(scenario, options));
        out.fitted_c = fit_constant(out.reports);
        out.c1 = out.reports.front().c1;
        if (scenario.sweep && options.run_sweeps) out.sweep = run_sweep(scenario, options);
        return out;
    });
}

SuiteResult run_suite(const Suite& suite, const std::optional<std::filesystem::path>& output_dir,
                      const RunOptions& options) {
    SuiteResult result;
    result.seed = suite.seed;
    for (const Scenario& s : suite.scenarios) {
        result.scenarios.push_back(run_scenario(s, options));
        result.global_c = std::max(result.global_c, result.scenarios.back().fitted_c);
    }
    if (output_dir) {
        std::filesystem::create_directories(*output_dir);
        for (const auto& sr : result.scenarios) {
            write_file(*output_dir / (sr.id + ".json"), scenario_to_json(sr, result.seed).dump(2) + "\n");
        }
        write_file(*output_dir / "suite.json", suite_to_json(result).dump(2) + "\n");
        write_file(*output_dir / "suite.csv", suite_csv(result));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Serialization

nlohmann::json report_to_json(const StabilityReport& r) {
    nlohmann::json j;
    j["scenario_id"] = r.scenario_id;
    j["region"] = r.region_label;
    j["p"] = r.p;
    j["n"] = r.n;
    j["E_measure"] = r.e_measure;
    j["exponents"] = {{"rho_p", r.expo.rho_p}, {"eta_p", r.expo.eta_p}};
    j["t"] = numbers(r.times);
    j["lhs"] = numbers(r.lhs);
    j["curve_length"] = numbers(r.curve_length);
    j["curve_tol"] = numbers(r.curve_tol);
    j["rhs_shape"] = numbers(r.rhs_shape);
    j["coeff_diffs"] = {{"a", r.diffs.a}, {"div_f", r.diffs.div_f}, {"f_u", r.diffs.f_u}, {"h", r.diffs.h}};
    j["phi_psi_sup"] = r.phi_psi_sup;
    j["fitted_C"] = number_or_null(r.fitted_c);
    j["C1"] = number_or_null(r.c1);
    j["bounds"] = {{"a_star", r.bounds.a_star}, {"a_sup", r.bounds.a_sup}, {"k1", r.bounds.k1},
                   {"k2", r.bounds.k2},         {"k3", r.bounds.k3},       {"K1", r.bounds.K1},
                   {"K2", r.bounds.K2},         {"K3", r.bounds.K3}};
    return j;
}

nlohmann::json scenario_to_json(const ScenarioResult& sr, std::uint64_t seed) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["version"] = kVersion;
    j["seed"] = seed;
    j["scenario_id"] = sr.id;
    j["fitted_C"] = number_or_null(sr.fitted_c);
    j["C1"] = number_or_null(sr.c1);
    j["reports"] = nlohmann::json::array();
    for (const auto& r : sr.reports) j["reports"].push_back(report_to_json(r));
    if (sr.sweep) {
        j["sweep"] = {{"path", sr.sweep->path},           {"values", numbers(sr.sweep->values)},
                      {"diffs_sum", numbers(sr.sweep->diffs_sum)}, {"lhs", numbers(sr.sweep->lhs)},
                      {"fitted_C", numbers(sr.sweep->fitted_c)},   {"slope", number_or_null(sr.sweep->slope)}};
    }
    return j;
}

nlohmann::json suite_to_json(const SuiteResult& result, bool with_timestamp) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["version"] = kVersion;
    j["seed"] = result.seed;
    j["global_C"] = number_or_null(result.global_c);
    j["scenarios"] = nlohmann::json::array();
    for (const auto& sr : result.scenarios) {
        j["scenarios"].push_back({{"id", sr.id}, {"fitted_C", number_or_null(sr.fitted_c)}, {"C1", number_or_null(sr.c1)}});
    }
    j["environment"] = {{"compiler", __VERSION__}, {"cxx_standard", static_cast<long>(__cplusplus)}};
    if (with_timestamp) {
        const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        j["generated_at"] = buf;
    }
    return j;
}

std::string suite_csv(const SuiteResult& result) {
    std::string out;
    const auto& header = report_csv_header();
    for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
    out += "\n";
    for (const auto& sr : result.scenarios) {
        for (const auto& r : sr.reports) append_csv_rows(r, out);
    }
    return out;
}

}  // namespace parastab
