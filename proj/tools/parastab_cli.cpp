// Command-line front end: solve, homotopy, verify, sweep, poincare, suite.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "parastab/error.hpp"
#include "parastab/estimate.hpp"
#include "parastab/experiments.hpp"
#include "parastab/homotopy.hpp"
#include "parastab/poincare.hpp"
#include "parastab/solver.hpp"

namespace fs = std::filesystem;
using namespace parastab;

namespace {

struct Common {
    std::string config;
    std::string out = "out";
    std::uint64_t seed = 42;
    int threads = 1;
    int store_every = 0;
    std::string scenario;
};

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
    f << text;
}

RunOptions run_options(const Common& c) {
    RunOptions o;
    o.threads = c.threads;
    if (c.store_every > 0) o.store_every = c.store_every;
    return o;
}

Suite load(const Common& c) {
    Suite suite = load_suite(c.config);
    suite.seed = c.seed;
    return suite;
}

/// The scenario named by --scenario, or the first one.
Scenario pick(const Common& c) {
    const Suite suite = load(c);
    if (suite.scenarios.empty()) throw Error(ErrorKind::EmptyList, "config has no scenarios");
    if (c.scenario.empty()) return suite.scenarios.front();
    for (const auto& s : suite.scenarios) {
        if (s.id == c.scenario) return s;
    }
    throw Error(ErrorKind::RangeError, "no scenario '" + c.scenario + "' in " + c.config);
}

StepControl control_for(const Scenario& s, const Common& c) {
    StepControl ctl = s.control;
    if (c.store_every > 0) ctl.store_every = c.store_every;
    return ctl;
}

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

int cmd_solve(const Common& c, bool use_v) {
    const Scenario s = pick(c);
    const ParabolicProblem prob = use_v ? s.problem_v() : s.problem_u();
    const Trajectory traj = solve(prob, s.t_end, control_for(s, c), s.times);
    std::string csv = "t,cell,x,y,u\n";
    const Grid& g = traj.grid;
    for (double t : s.times) {
        const ScalarField& u = traj.at(t);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const Vec2 x = g.center(i);
            csv += fmt(t) + "," + std::to_string(i) + "," + fmt(x[0]) + "," + fmt(x[1]) + "," + fmt(u[i]) + "\n";
        }
    }
    write_text(fs::path(c.out) / (s.id + (use_v ? ".v" : ".u") + ".snapshots.csv"), csv);
    std::cout << "solved " << prob.name << " to T=" << s.t_end << " (" << traj.size() << " snapshots)\n";
    return 0;
}

int cmd_homotopy(const Common& c, double theta, double delta) {
    const Scenario s = pick(c);
    const ParabolicProblem p = s.problem_u(), q = s.problem_v();
    const StepControl ctl = control_for(s, c);
    const HomotopyRun run = solve_sensitivity(p, q, theta, s.t_end, ctl, s.times);
    std::string csv = "theta,t,z_sup,fd_error\n";
    for (double t : s.times) {
        const ScalarField& z = run.z_trajectory.at(t);
        std::string fd_err = "";
        if (delta > 0.0 && theta - delta >= 0.0 && theta + delta <= 1.0) {
            fd_err = fmt((z - fd_sensitivity(p, q, theta, delta, ctl, t)).sup_norm());
        }
        csv += fmt(theta) + "," + fmt(t) + "," + fmt(z.sup_norm()) + "," + fd_err + "\n";
    }
    write_text(fs::path(c.out) / (s.id + ".homotopy.csv"), csv);
    std::cout << csv;
    return 0;
}

int cmd_verify(const Common& c) {
    Scenario s = pick(c);
    s.sweep.reset();
    Suite one{c.seed, {s}};
    const SuiteResult r = run_suite(one, fs::path(c.out), run_options(c));
    std::cout << "scenario " << s.id << ": fitted_C = " << fmt(r.global_c) << ", C1 = " << fmt(r.scenarios[0].c1)
              << "\n";
    return 0;
}

int cmd_sweep(const Common& c) {
    const Scenario s = pick(c);
    const SweepResult r = run_sweep(s, run_options(c));
    std::string csv = "value,diffs_sum,lhs,fitted_C\n";
    for (std::size_t i = 0; i < r.values.size(); ++i) {
        csv += fmt(r.values[i]) + "," + fmt(r.diffs_sum[i]) + "," + fmt(r.lhs[i]) + "," + fmt(r.fitted_c[i]) + "\n";
    }
    write_text(fs::path(c.out) / (s.id + ".sweep.csv"), csv);
    std::cout << csv << "slope " << fmt(r.slope) << "\n";
    return 0;
}

int cmd_poincare(const Common& c, int dim, const std::vector<double>& sizes, int functions, bool constants) {
    PoincareOptions o;
    o.constants_only = constants;
    const PoincareResult r = estimate_lambda0(dim, sizes, functions, c.seed, o);
    write_text(fs::path(c.out) / ("poincare_n" + std::to_string(dim) + ".csv"), r.to_csv());
    std::cout << r.to_csv() << "lambda0_estimate " << fmt(r.lambda0_estimate) << "\n";
    return 0;
}

int cmd_suite(const Common& c) {
    const SuiteResult r = run_suite(load(c), fs::path(c.out), run_options(c));
    for (const auto& s : r.scenarios) std::cout << s.id << ": fitted_C = " << fmt(s.fitted_c) << "\n";
    std::cout << "global C = " << fmt(r.global_c) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stability experiments for pairs of quasilinear parabolic problems"};
    app.require_subcommand(1);
    Common common;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* opt = sub->add_option("--config", common.config, "Suite YAML file");
        if (needs_config) opt->required()->check(CLI::ExistingFile);
        sub->add_option("--out", common.out, "Output directory")->capture_default_str();
        sub->add_option("--seed", common.seed, "Random seed")->capture_default_str();
        sub->add_option("--threads", common.threads, "Worker threads")->check(CLI::Range(1, 256))->capture_default_str();
        sub->add_option("--store-every", common.store_every, "Snapshot stride (0 keeps the config value)")
            ->check(CLI::NonNegativeNumber);
    };

    bool use_v = false;
    auto* solve_cmd = app.add_subcommand("solve", "Solve one problem and write snapshots as CSV");
    add_common(solve_cmd, true);
    solve_cmd->add_option("--scenario", common.scenario, "Scenario id (default: first)");
    solve_cmd->add_flag("--v", use_v, "Solve problem_v instead of problem_u");

    double theta = 0.5, delta = 0.05;
    auto* hom_cmd = app.add_subcommand("homotopy", "Sensitivity z_theta diagnostics for one pair");
    add_common(hom_cmd, true);
    hom_cmd->add_option("--scenario", common.scenario, "Scenario id (default: first)");
    hom_cmd->add_option("--theta", theta, "Homotopy parameter")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    hom_cmd->add_option("--delta", delta, "Finite-difference step (0 skips the check)")->capture_default_str();

    auto* verify_cmd = app.add_subcommand("verify", "Stability report for one scenario");
    add_common(verify_cmd, true);
    verify_cmd->add_option("--scenario", common.scenario, "Scenario id (default: first)");

    auto* sweep_cmd = app.add_subcommand("sweep", "Parameter sweep with log-log slope fit");
    add_common(sweep_cmd, true);
    sweep_cmd->add_option("--scenario", common.scenario, "Scenario id (default: first)");

    int dim = 1, functions = 40;
    bool constants = false;
    std::vector<double> sizes{0.2, 0.6, 2.0};
    auto* poincare_cmd = app.add_subcommand("poincare", "Poincare constant study over ball sizes");
    add_common(poincare_cmd, false);
    poincare_cmd->add_option("--dim", dim, "Dimension")->check(CLI::IsMember({1, 2}))->capture_default_str();
    poincare_cmd->add_option("--sizes", sizes, "Ball measures")->capture_default_str();
    poincare_cmd->add_option("--functions", functions, "Test functions per ball")->capture_default_str();
    poincare_cmd->add_flag("--constants", constants, "Use constant test functions only");

    auto* suite_cmd = app.add_subcommand("suite", "Run every scenario of a suite");
    add_common(suite_cmd, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve_cmd->parsed()) return cmd_solve(common, use_v);
        if (hom_cmd->parsed()) return cmd_homotopy(common, theta, delta);
        if (verify_cmd->parsed()) return cmd_verify(common);
        if (sweep_cmd->parsed()) return cmd_sweep(common);
        if (poincare_cmd->parsed()) return cmd_poincare(common, dim, sizes, functions, constants);
        if (suite_cmd->parsed()) return cmd_suite(common);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
