#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "parastab/grid.hpp"
#include "parastab/problems.hpp"
#include "parastab/solver.hpp"

namespace parastab {

/// Convex combination θ·P + (1−θ)·Q of coefficients (all partials included) and initial
/// data. θ = 1 reproduces P, θ = 0 reproduces Q. Throws DimMismatch when grids differ.
ParabolicProblem blend(const ParabolicProblem& p, const ParabolicProblem& q, double theta);

/// α, β, γ, σ of the θ-derivative equation at one (θ, t), from the discrete Δu_θ and ∇u_θ:
///
///   α = θa + (1−θ)b
///   β = (θ∇_q a + (1−θ)∇_q b) Δu_θ + θf_u + (1−θ)g_u + θ∇_q h + (1−θ)∇_q k
///   γ = (θa_u + (1−θ)b_u) Δu_θ + θ∇_x·f_u + (1−θ)∇_x·g_u + θh_u + (1−θ)k_u
///       + (θf_uu + (1−θ)g_uu)·∇u_θ
///   σ = (a−b) Δu_θ + (f_u − g_u)·∇u_θ + ∇_x·f − ∇_x·g + h − k
LinearizedCoefficients assemble_linearized(const ParabolicProblem& p, const ParabolicProblem& q, double theta,
                                           const ScalarField& u_theta, double t);

/// `control` with dt_max pinned to the step both problems (and every blend) can take,
/// so that all members of the family share one time grid.
StepControl pair_control(const ParabolicProblem& p, const ParabolicProblem& q, const StepControl& control);

struct HomotopyRun {
    double theta;
    Trajectory u_trajectory;
    Trajectory z_trajectory;
};

/// Solves the blended problem for u_θ, then the linear equation for z_θ = ∂u_θ/∂θ with
/// z_θ(0) = φ − ψ. Coefficients are assembled from the stored u_θ snapshots and
/// interpolated linearly in t.
HomotopyRun solve_sensitivity(const ParabolicProblem& p, const ParabolicProblem& q, double theta, double t_end,
                              const StepControl& control, std::span<const double> output_times = {});

/// (u_{θ+δ}(t) − u_{θ−δ}(t)) / (2δ) from two blended solves.
ScalarField fd_sensitivity(const ParabolicProblem& p, const ParabolicProblem& q, double theta, double delta,
                           const StepControl& control, double t);

/// Gauss–Legendre nodes and weights mapped to [0, 1]; weights sum to 1.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    static QuadratureRule gauss_legendre(int count);
};

/// z_θ at the quadrature nodes of `rule`, recorded at `times`.
struct ThetaSamples {
    QuadratureRule rule;
    std::vector<double> times;
    std::vector<std::vector<ScalarField>> z;  ///< z[node][time index]

    /// Σ_k w_k ‖z_{θ_k}(t)‖_{L^p(E)} at times[time_index].
    double curve_length(const Region& region, double p, std::size_t time_index) const;
    /// max over nodes of ‖z_{θ_k}(t)‖_∞ at times[time_index].
    double sup_norm(std::size_t time_index) const;
};

/// Runs `solve_sensitivity` at every node, `threads` nodes at a time. Results do not
/// depend on the thread count.
ThetaSamples sample_sensitivities(const ParabolicProblem& p, const ParabolicProblem& q, const QuadratureRule& rule,
                                  std::span<const double> times, const StepControl& control, int threads = 1);

/// ∫₀¹ ‖z_θ(t)‖_{L^p(E)} dθ by the quadrature rule.
double curve_length(const ParabolicProblem& p, const ParabolicProblem& q, const Region& region, double exponent,
                    double t, const QuadratureRule& rule, const StepControl& control);

/// Fitted C₁ = max(0, max_k (‖z(t_k)‖_∞ − ‖φ−ψ‖_∞) / t_k) over the recorded times t_k > 0.
double fit_sensitivity_growth(const ThetaSamples& samples, double phi_psi_sup);

}  // namespace parastab
