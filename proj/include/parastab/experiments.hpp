#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "parastab/estimate.hpp"
#include "parastab/problems.hpp"
#include "parastab/solver.hpp"

namespace parastab {

/// Library version written into every report.
inline constexpr const char* kVersion = "0.1.0";
/// Version of the JSON report and CSV layout.
inline constexpr int kSchemaVersion = 1;

/// Catalog entry plus parameter overrides, already merged with the catalog defaults.
struct ProblemSpec {
    std::string catalog;
    CatalogParams params;
};

/// Shape of a region E: "full", "ball" (center + radius, or center + measure) or "box".
struct RegionConfig {
    std::string label;
    std::string shape = "full";
    Vec2 center{0.0, 0.0};
    std::optional<double> radius;
    std::optional<double> measure;
    Vec2 lo{0.0, 0.0};
    Vec2 hi{0.0, 0.0};
};

/// One parameter ("problem_u.<key>" or "problem_v.<key>") stepped through `values`.
struct SweepSpec {
    std::string path;
    std::vector<double> values;
};

struct Scenario {
    std::string id;
    int dim = 1;
    double extent = 1.0;
    int cells = 64;
    double t_end = 1.0;
    std::vector<double> times;
    std::vector<double> p;
    ProblemSpec u;
    ProblemSpec v;
    std::vector<RegionConfig> regions;
    int nodes = 8;
    int check_nodes = 16;
    int samples = 4096;
    StepControl control;
    std::optional<SweepSpec> sweep;

    Grid grid() const;
    ParabolicProblem problem_u() const;
    ParabolicProblem problem_v() const;
    std::vector<RegionSpec> build_regions() const;
    /// Same scenario with `cells` multiplied by `factor`.
    Scenario refined(int factor) const;
};

struct Suite {
    std::uint64_t seed = 42;
    std::vector<Scenario> scenarios;
};

/// Parses a YAML suite. Throws ParseError (with line and field), UnknownCatalogId, RangeError.
Suite parse_suite(const std::string& text, const std::string& source = "<string>");
Suite load_suite(const std::filesystem::path& path);
/// Canonical YAML with every default spelled out; parse_suite(serialize_suite(s)) == s.
std::string serialize_suite(const Suite& suite);
/// serialize_suite(parse_suite(text)).
std::string normalize_config(const std::string& text);

struct SweepResult {
    std::string path;
    std::vector<double> values;
    std::vector<double> diffs_sum;
    std::vector<double> lhs;  ///< final-time lhs of the first (region, p)
    std::vector<double> fitted_c;
    double slope = 0.0;  ///< least-squares slope of log lhs against log diffs_sum
};

struct ScenarioResult {
    std::string id;
    std::vector<StabilityReport> reports;
    double fitted_c = 0.0;
    double c1 = 0.0;
    std::optional<SweepResult> sweep;
};

struct SuiteResult {
    std::uint64_t seed = 42;
    std::vector<ScenarioResult> scenarios;
    double global_c = 0.0;
};

struct RunOptions {
    int threads = 1;
    std::optional<int> store_every;
    bool run_sweeps = true;
};

/// Least-squares slope of log y against log x. Needs two or more positive pairs.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

ScenarioResult run_scenario(const Scenario& scenario, const RunOptions& options = {});
SweepResult run_sweep(const Scenario& scenario, const RunOptions& options = {});

/// Runs every scenario and, when `output_dir` is set, writes <id>.json per scenario,
/// suite.json and suite.csv. Errors carry the scenario id.
SuiteResult run_suite(const Suite& suite, const std::optional<std::filesystem::path>& output_dir,
                      const RunOptions& options = {});

nlohmann::json report_to_json(const StabilityReport& report);
nlohmann::json scenario_to_json(const ScenarioResult& result, std::uint64_t seed);
/// The "generated_at" field is the only one that varies between identical runs.
nlohmann::json suite_to_json(const SuiteResult& result, bool with_timestamp = true);
std::string suite_csv(const SuiteResult& result);

}  // namespace parastab
