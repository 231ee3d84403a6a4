#include "parastab/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>

#include "parastab/error.hpp"

namespace parastab {

Exponents exponents(double p, int n) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw Error(ErrorKind::BadP, "exponent p must be finite and >= 1");
    if (n != 1 && n != 2) throw Error(ErrorKind::DimMismatch, "dimension must be 1 or 2");
    if (p <= 2.0) return {p, n, 0.5, (2.0 - p) / (2.0 * p) + 1.0 / (2.0 * n)};
    return {p, n, 1.0 / p, 1.0 / (n * p)};
}

double envelope_a(const Exponents& e, double e_measure, double t) {
    const double p = e.p;
    const double n = e.n;
    if (p <= 2.0) return std::pow(e_measure, (2.0 - p) / (2.0 * p) + 1.0 / (2.0 * n)) + std::pow(e_measure, 1.0 / p);
    return (1.0 + std::pow(t, (p - 2.0) / p)) * (std::pow(e_measure, 1.0 / (n * p)) + std::pow(e_measure, 1.0 / p));
}

double envelope_b(const Exponents& e, double t) {
    if (e.p <= 2.0) return t;
    return t + std::pow(t, 2.0 / e.p);
}

double rhs_shape(const Exponents& e, double e_measure, double t, double phi_psi_sup, double diffs_sum) {
    if (e_measure < 0.0 || t < 0.0 || phi_psi_sup < 0.0 || diffs_sum < 0.0) {
        throw Error(ErrorKind::RangeError, "rhs_shape inputs must be nonnegative");
    }
    return envelope_a(e, e_measure, t) * std::pow(phi_psi_sup, 2.0 * e.rho_p) +
           envelope_b(e, t) * std::pow(diffs_sum, e.rho_p) * std::pow(e_measure, e.eta_p);
}

double fit_ratio(std::span<const double> lhs, std::span<const double> shape) {
    if (lhs.size() != shape.size()) throw Error(ErrorKind::InvalidArgument, "lhs and shape lengths differ");
    double c = 0.0;
    for (std::size_t i = 0; i < lhs.size(); ++i) {
        if (shape[i] > 0.0) {
            c = std::max(c, lhs[i] / shape[i]);
        } else if (lhs[i] > 1e-14) {
            return std::numeric_limits<double>::infinity();
        }
    }
    return c;
}

std::vector<StabilityReport> verify_matrix(const std::string& scenario_id, const ParabolicProblem& p,
                                           const ParabolicProblem& q, std::span<const RegionSpec> regions,
                                           std::span<const double> exponents_p, std::span<const double> times,
                                           const VerifyOptions& options) {
    if (times.empty()) throw Error(ErrorKind::EmptyList, "no report times");
    if (regions.empty()) throw Error(ErrorKind::EmptyList, "no regions");
    if (exponents_p.empty()) throw Error(ErrorKind::EmptyList, "no exponents");
    for (double t : times) {
        if (!(t > 0.0)) throw Error(ErrorKind::RangeError, "report times must be positive");
    }
    const int dim = p.grid.dim();
    for (double e : exponents_p) (void)exponents(e, dim);

    const double t_end = *std::max_element(times.begin(), times.end());
    const StepControl control = pair_control(p, q, options.control);
    const Trajectory u = solve(p, t_end, control, times);
    const Trajectory v = solve(q, t_end, control, times);

    const FieldBounds bu = measure_bounds(p, u);
    const FieldBounds bv = measure_bounds(q, v);
    FieldBounds bounds;
    bounds.a_star = std::min(bu.a_star, bv.a_star);
    bounds.a_sup = std::max(bu.a_sup, bv.a_sup);
    bounds.k1 = std::max(bu.k1, bv.k1);
    bounds.k2 = std::max(bu.k2, bv.k2);
    bounds.k3 = std::max(bu.k3, bv.k3);
    bounds.K1 = std::max(bu.K1, bv.K1);
    bounds.K2 = std::max(bu.K2, bv.K2);
    bounds.K3 = std::max(bu.K3, bv.K3);
    if (options.check_hypotheses) {
        check_hypotheses(p, t_end, bounds.K1, bounds.K2);
        check_hypotheses(q, t_end, bounds.K1, bounds.K2);
    }

    std::optional<ThetaSamples> main;
    if (options.sensitivities) {
        main = sample_sensitivities(p, q, QuadratureRule::gauss_legendre(options.nodes), times, options.control,
                                    options.threads);
    }
    std::optional<ThetaSamples> check;
    if (options.sensitivities && options.check_nodes > 0) {
        check = sample_sensitivities(p, q, QuadratureRule::gauss_legendre(options.check_nodes), times,
                                     options.control, options.threads);
    }

    const double phi_psi_sup = (p.initial_field() - q.initial_field()).sup_norm();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double c1 = main ? fit_sensitivity_growth(*main, phi_psi_sup) : nan;

    std::vector<ScalarField> differences;
    for (double t : times) differences.push_back(u.at(t) - v.at(t));

    std::vector<StabilityReport> reports;
    for (const RegionSpec& spec : regions) {
        const SampleBox r{t_end, spec.region, bounds.K1, std::nullopt};
        const SampleBox r0{t_end, spec.region, bounds.K1, bounds.K2};
        const CoeffDiffs diffs = sup_coeff_diffs(p, q, r, r0, options.samples);
        for (double exponent : exponents_p) {
            StabilityReport rep;
            rep.scenario_id = scenario_id;
            rep.region_label = spec.label;
            rep.p = exponent;
            rep.n = dim;
            rep.e_measure = spec.region.measure();
            rep.expo = exponents(exponent, dim);
            rep.times.assign(times.begin(), times.end());
            rep.diffs = diffs;
            rep.phi_psi_sup = phi_psi_sup;
            rep.c1 = c1;
            rep.bounds = bounds;
            for (std::size_t i = 0; i < times.size(); ++i) {
                const double lhs = lp_norm(differences[i], spec.region, exponent);
                rep.lhs.push_back(lhs);
                if (main) {
                    const double cl = main->curve_length(spec.region, exponent, i);
                    const double quad = check ? std::abs(cl - check->curve_length(spec.region, exponent, i)) : 0.0;
                    rep.curve_length.push_back(cl);
                    rep.curve_tol.push_back(quad + 1e-6 * lhs + 1e-10);
                } else {
                    rep.curve_length.push_back(nan);
                    rep.curve_tol.push_back(nan);
                }
                rep.rhs_shape.push_back(rhs_shape(rep.expo, rep.e_measure, times[i], phi_psi_sup, diffs.sum()));
            }
            rep.fitted_c = fit_ratio(rep.lhs, rep.rhs_shape);
            reports.push_back(std::move(rep));
        }
    }
    return reports;
}

StabilityReport verify(const ParabolicProblem& p, const ParabolicProblem& q, const Region& region, double exponent,
                       std::span<const double> times, const VerifyOptions& options) {
    const RegionSpec spec[] = {{"E", region}};
    const double ps[] = {exponent};
    return verify_matrix(p.name + "/" + q.name, p, q, spec, ps, times, options).front();
}

double fit_constant(std::span<const StabilityReport> reports) {
    if (reports.empty()) throw Error(ErrorKind::EmptyList, "no reports to fit");
    double c = 0.0;
    for (const auto& r : reports) c = std::max(c, r.fitted_c);
    return c;
}

const std::vector<std::string>& report_csv_header() {
    static const std::vector<std::string> header = {"scenario_id", "n",         "p",         "E_measure", "t",
                                                    "lhs",         "curve_length", "diff_a", "diff_divf", "diff_fu",
                                                    "diff_h",      "rhs_shape", "fitted_C"};
    return header;
}

void append_csv_rows(const StabilityReport& r, std::string& out) {
    char buf[512];
    for (std::size_t i = 0; i < r.times.size(); ++i) {
        std::snprintf(buf, sizeof buf, ",%d,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", r.n,
                      r.p, r.e_measure, r.times[i], r.lhs[i], r.curve_length[i], r.diffs.a, r.diffs.div_f,
                      r.diffs.f_u, r.diffs.h, r.rhs_shape[i], r.fitted_c);
        out += r.scenario_id;
        out += buf;
    }
}

}  // namespace parastab
