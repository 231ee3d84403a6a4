#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <string>
#include <vector>

#include "parastab/error.hpp"
#include "parastab/estimate.hpp"
#include "parastab/experiments.hpp"
#include "parastab/homotopy.hpp"
#include "parastab/poincare.hpp"
#include "parastab/problems.hpp"
#include "parastab/solver.hpp"

namespace py = pybind11;
using namespace parastab;

namespace {

using ParamMap = std::map<std::string, double>;

ParabolicProblem build(const std::string& id, const Grid& g, const ParamMap& overrides) {
    CatalogParams p = catalog_defaults(id, g.dim());
    for (const auto& [k, v] : overrides) p.set(k, v);
    return make_catalog_problem(id, g, p);
}

/// Field as a (N,) or (N, N) array indexed [y, x] in 2D.
py::array_t<double> to_array(const ScalarField& f) {
    const auto n = static_cast<py::ssize_t>(f.grid.cells_per_axis());
    std::vector<py::ssize_t> shape = f.grid.dim() == 1 ? std::vector<py::ssize_t>{n} : std::vector<py::ssize_t>{n, n};
    py::array_t<double> out(shape);
    std::copy(f.values.begin(), f.values.end(), out.mutable_data());
    return out;
}

StepControl control_with(double cfl) {
    StepControl c;
    c.cfl_fraction = cfl;
    return c;
}

}  // namespace

PYBIND11_MODULE(_parastab, m) {
    m.doc() = "Stability estimates for quasilinear parabolic equations on a periodic grid";
    m.attr("__version__") = kVersion;

    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

    m.def("catalog_ids", &catalog_ids, "Identifiers of the built-in problems.");
    m.def("catalog_keys", &CatalogParams::scalar_keys, "Scalar parameter names accepted as overrides.");

    py::class_<Exponents>(m, "Exponents")
        .def_readonly("p", &Exponents::p)
        .def_readonly("n", &Exponents::n)
        .def_readonly("rho_p", &Exponents::rho_p)
        .def_readonly("eta_p", &Exponents::eta_p)
        .def("__repr__", [](const Exponents& e) {
            return "Exponents(p=" + std::to_string(e.p) + ", n=" + std::to_string(e.n) +
                   ", rho_p=" + std::to_string(e.rho_p) + ", eta_p=" + std::to_string(e.eta_p) + ")";
        });
    m.def("exponents", &exponents, py::arg("p"), py::arg("n"));
    m.def(
        "rhs_shape",
        [](double p, int n, double e_measure, double t, double phi_psi_sup, double diffs_sum) {
            return rhs_shape(exponents(p, n), e_measure, t, phi_psi_sup, diffs_sum);
        },
        py::arg("p"), py::arg("n"), py::arg("e_measure"), py::arg("t"), py::arg("phi_psi_sup"), py::arg("diffs_sum"));

    m.def(
        "solve",
        [](const std::string& id, int dim, double extent, int cells, double t_end, const ParamMap& params,
           double cfl, std::vector<double> times) {
            const Grid g(dim, extent, cells);
            const Trajectory traj = solve(build(id, g, params), t_end, control_with(cfl), times);
            py::list snaps;
            for (const auto& s : traj.snapshots) snaps.append(to_array(s));
            return py::make_tuple(traj.times, snaps);
        },
        py::arg("catalog"), py::arg("dim"), py::arg("extent"), py::arg("cells"), py::arg("t_end"),
        py::arg("params") = ParamMap{}, py::arg("cfl") = 0.5, py::arg("times") = std::vector<double>{},
        "Solve a catalog problem; returns (times, snapshots).");

    m.def(
        "sensitivity",
        [](const std::string& id_u, const std::string& id_v, int dim, double extent, int cells, double theta,
           double t_end, const ParamMap& params_u, const ParamMap& params_v) {
            const Grid g(dim, extent, cells);
            const HomotopyRun run =
                solve_sensitivity(build(id_u, g, params_u), build(id_v, g, params_v), theta, t_end, {});
            return py::make_tuple(to_array(run.u_trajectory.final_state()), to_array(run.z_trajectory.final_state()));
        },
        py::arg("catalog_u"), py::arg("catalog_v"), py::arg("dim"), py::arg("extent"), py::arg("cells"),
        py::arg("theta"), py::arg("t_end"), py::arg("params_u") = ParamMap{}, py::arg("params_v") = ParamMap{},
        "Blended solution u_theta(T) and its theta-derivative z_theta(T).");

    m.def(
        "curve_length",
        [](const std::string& id_u, const std::string& id_v, int dim, double extent, int cells, double p, double t,
           int nodes, const ParamMap& params_u, const ParamMap& params_v) {
            const Grid g(dim, extent, cells);
            return curve_length(build(id_u, g, params_u), build(id_v, g, params_v), Region::full(g), p, t,
                                QuadratureRule::gauss_legendre(nodes), {});
        },
        py::arg("catalog_u"), py::arg("catalog_v"), py::arg("dim"), py::arg("extent"), py::arg("cells"),
        py::arg("p"), py::arg("t"), py::arg("nodes") = 8, py::arg("params_u") = ParamMap{},
        py::arg("params_v") = ParamMap{}, "Quadrature of the L^p norm of z_theta over theta, on the whole torus.");

    m.def("normalize_config", &normalize_config, py::arg("text"));
    m.def(
        "run_suite_json",
        [](const std::string& text, std::optional<std::string> out_dir, int threads) {
            const Suite suite = parse_suite(text, "<python>");
            RunOptions opts;
            opts.threads = threads;
            std::optional<std::filesystem::path> dir;
            if (out_dir) dir = *out_dir;
            SuiteResult r;
            {
                py::gil_scoped_release release;
                r = run_suite(suite, dir, opts);
            }
            return py::make_tuple(suite_to_json(r, false).dump(), suite_csv(r));
        },
        py::arg("text"), py::arg("out_dir") = py::none(), py::arg("threads") = 1,
        "Run a YAML suite; returns (report JSON text without timestamp, CSV text).");

    m.def(
        "poincare_estimate",
        [](int n, std::vector<double> sizes, int functions, std::uint64_t seed, bool constants_only) {
            PoincareOptions opt;
            opt.constants_only = constants_only;
            const PoincareResult r = estimate_lambda0(n, sizes, functions, seed, opt);
            py::dict d;
            d["n"] = r.n;
            d["ball_measures"] = r.ball_measures;
            d["max_ratios"] = r.max_ratios;
            d["lambda0_estimate"] = r.lambda0_estimate;
            return d;
        },
        py::arg("n"), py::arg("sizes"), py::arg("functions") = 16, py::arg("seed") = 42,
        py::arg("constants_only") = false);

    m.def("loglog_slope", &loglog_slope, py::arg("x"), py::arg("y"));
}
