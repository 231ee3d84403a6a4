#pragma once

#include <functional>
#include <span>
#include <vector>

#include "parastab/grid.hpp"
#include "parastab/problems.hpp"
#include "parastab/trajectory.hpp"

namespace parastab {

/// Explicit step selection: dt = min(dt_max, cfl_fraction * dx² / (2 n a_sup)),
/// then shrunk so that every segment between output times has a whole number of steps.
struct StepControl {
    double cfl_fraction = 0.5;
    double dt_max = kInf;
    int store_every = 1;
};

double stable_dt(const Grid& grid, double diffusion_sup, const StepControl& control);

/// a(t,x,u,∇u) Δu + ∇_x·f(t,x,u) + f_u(t,x,u)·∇u + h(t,x,u,∇u), discrete operators.
/// Throws NonFinite if any coefficient evaluation is not finite.
ScalarField rhs(const ParabolicProblem& problem, const ScalarField& u, double t);

/// Classical RK4 from u(0) = φ to T. Snapshots every `store_every` steps, plus t = 0,
/// t = T and every time in `output_times` (which is hit exactly).
/// Throws BlowUp when sup|u| exceeds 1e3 (sup|φ| + 1), NonFinite on NaN/Inf.
Trajectory solve(const ParabolicProblem& problem, double t_end, const StepControl& control,
                 std::span<const double> output_times = {});

/// Coefficients α, β, γ, σ of z_t = α Δz + β·∇z + γ z + σ at one time.
struct LinearizedCoefficients {
    ScalarField alpha;
    VectorField beta;
    ScalarField gamma;
    ScalarField sigma;

    explicit LinearizedCoefficients(const Grid& g) : alpha(g), beta(g), gamma(g), sigma(g) {}
};

/// Time-dependent coefficient fields for `solve_linear`.
class CoefficientSchedule {
public:
    virtual ~CoefficientSchedule() = default;
    virtual const Grid& grid() const = 0;
    /// Upper bound of α over the schedule, used for the CFL rule.
    virtual double alpha_sup() const = 0;
    virtual void evaluate(double t, LinearizedCoefficients& out) const = 0;
};

/// Stored coefficient slices with linear interpolation in t (constant outside the range).
class SliceSchedule final : public CoefficientSchedule {
public:
    SliceSchedule(std::vector<double> times, std::vector<LinearizedCoefficients> slices);
    /// Time-independent coefficients.
    explicit SliceSchedule(LinearizedCoefficients constant);

    const Grid& grid() const override { return slices_.front().alpha.grid; }
    double alpha_sup() const override { return alpha_sup_; }
    void evaluate(double t, LinearizedCoefficients& out) const override;

private:
    std::vector<double> times_;
    std::vector<LinearizedCoefficients> slices_;
    double alpha_sup_ = 0.0;
};

/// Blend out = (1 - w) * lo + w * hi, field by field.
void interpolate_coefficients(const LinearizedCoefficients& lo, const LinearizedCoefficients& hi, double w,
                              LinearizedCoefficients& out);

/// Same integrator applied to the linear equation with initial condition z0.
Trajectory solve_linear(const CoefficientSchedule& schedule, const ScalarField& z0, double t_end,
                        const StepControl& control, std::span<const double> output_times = {});

/// Observed order log2(‖R(u_2N) − u_N‖ / ‖R(u_4N) − u_2N‖) from final states on
/// grids N, 2N, 4N (R = cell-average restriction), in the L² norm over the torus.
double self_convergence_order(const ScalarField& coarse, const ScalarField& mid, const ScalarField& fine);

}  // namespace parastab
