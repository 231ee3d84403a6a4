#pragma once

#include <span>
#include <string>
#include <vector>

#include "parastab/grid.hpp"
#include "parastab/homotopy.hpp"
#include "parastab/problems.hpp"
#include "parastab/solver.hpp"

namespace parastab {

/// Powers of the perturbation size and of |E| in the stability bound.
///
///   ρ_p = 1/2                    (1 ≤ p ≤ 2),   1/p      (p > 2)
///   η_p = (2−p)/(2p) + 1/(2n)    (1 ≤ p ≤ 2),   1/(np)   (p > 2)
struct Exponents {
    double p;
    int n;
    double rho_p;
    double eta_p;
};

/// Throws BadP for p < 1 (or non-finite p) and DimMismatch for n outside {1, 2}.
Exponents exponents(double p, int n);

/// A_E(t) with C = 1:
///   |E|^{(2−p)/(2p)+1/(2n)} + |E|^{1/p}                    (p ≤ 2)
///   (1 + t^{(p−2)/p}) (|E|^{1/(np)} + |E|^{1/p})           (p > 2)
double envelope_a(const Exponents& expo, double e_measure, double t);
/// B(t) with C = 1: t for p ≤ 2, t + t^{2/p} for p > 2.
double envelope_b(const Exponents& expo, double t);

/// A_E(t) ‖φ−ψ‖_∞^{2ρ} + B(t) (Σ diffs)^ρ |E|^η, all constants set to 1.
double rhs_shape(const Exponents& expo, double e_measure, double t, double phi_psi_sup, double diffs_sum);

/// Stability data for one (pair, region, p) over a list of times.
struct StabilityReport {
    std::string scenario_id;
    std::string region_label;
    double p = 2.0;
    int n = 1;
    double e_measure = 0.0;
    Exponents expo{2.0, 1, 0.5, 0.5};
    std::vector<double> times;
    std::vector<double> lhs;           ///< ‖u(t) − v(t)‖_{L^p(E)}
    std::vector<double> curve_length;  ///< ∫₀¹ ‖z_θ(t)‖_{L^p(E)} dθ
    std::vector<double> curve_tol;     ///< quadrature + discretization budget
    std::vector<double> rhs_shape;
    CoeffDiffs diffs;
    double phi_psi_sup = 0.0;
    double fitted_c = 0.0;  ///< smallest C with lhs ≤ C·rhs_shape at every time
    double c1 = 0.0;        ///< fitted L∞ growth constant of z_θ
    FieldBounds bounds;     ///< K-values are the max over the pair
};

struct RegionSpec {
    std::string label;
    Region region;
};

struct VerifyOptions {
    StepControl control;
    int nodes = 8;
    int check_nodes = 16;  ///< 0 disables the quadrature self-check
    int samples = 4096;
    int threads = 1;
    bool check_hypotheses = true;
    /// When false the z_θ solves are skipped; curve lengths and c1 are reported as NaN.
    bool sensitivities = true;
};

/// Smallest C ≥ 0 with lhs[i] ≤ C·shape[i]. A zero shape with a nonzero lhs gives +inf;
/// lhs below 1e-14 with a zero shape is treated as 0/0 and skipped.
double fit_ratio(std::span<const double> lhs, std::span<const double> shape);

/// Solves the pair once and reports every (region, p) combination. Times must be > 0.
/// Throws HypothesisViolation when the hypothesis self-tests fail.
std::vector<StabilityReport> verify_matrix(const std::string& scenario_id, const ParabolicProblem& p,
                                           const ParabolicProblem& q, std::span<const RegionSpec> regions,
                                           std::span<const double> exponents_p, std::span<const double> times,
                                           const VerifyOptions& options);

StabilityReport verify(const ParabolicProblem& p, const ParabolicProblem& q, const Region& region, double exponent,
                       std::span<const double> times, const VerifyOptions& options = {});

/// Max of fitted_c over the reports. Throws EmptyList.
double fit_constant(std::span<const StabilityReport> reports);

/// Column names of the flat CSV, one row per (scenario, p, |E|, t).
const std::vector<std::string>& report_csv_header();
/// Appends the report's rows (no header).
void append_csv_rows(const StabilityReport& report, std::string& out);

}  // namespace parastab
