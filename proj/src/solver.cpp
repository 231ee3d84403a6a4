#include "parastab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "parastab/error.hpp"

namespace parastab {

// ---------------------------------------------------------------------------
// Trajectory

std::size_t Trajectory::bracket(double t) const {
    if (times.size() < 2) return 0;
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    std::size_t k = it == times.begin() ? 0 : static_cast<std::size_t>(it - times.begin()) - 1;
    return std::min(k, times.size() - 2);
}

const ScalarField& Trajectory::at(double t) const {
    const double tol = 1e-9 * std::max(1.0, std::abs(t));
    const auto it = std::lower_bound(times.begin(), times.end(), t - tol);
    if (it == times.end() || std::abs(*it - t) > tol) {
        throw Error(ErrorKind::RangeError, "no snapshot stored at t = " + std::to_string(t));
    }
    return snapshots[static_cast<std::size_t>(it - times.begin())];
}

ScalarField Trajectory::interpolate(double t) const {
    if (times.empty()) throw Error(ErrorKind::RangeError, "empty trajectory");
    if (times.size() == 1 || t <= times.front()) return snapshots.front();
    if (t >= times.back()) return snapshots.back();
    const std::size_t k = bracket(t);
    const double w = (t - times[k]) / (times[k + 1] - times[k]);
    ScalarField out(grid);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 - w) * snapshots[k][i] + w * snapshots[k + 1][i];
    return out;
}

// ---------------------------------------------------------------------------

double stable_dt(const Grid& grid, double diffusion_sup, const StepControl& control) {
    if (!(control.cfl_fraction > 0.0 && control.cfl_fraction <= 1.0)) {
        throw Error(ErrorKind::RangeError, "cfl_fraction must lie in (0, 1]");
    }
    if (!(control.dt_max > 0.0)) throw Error(ErrorKind::RangeError, "dt_max must be positive");
    if (!(diffusion_sup > 0.0)) throw Error(ErrorKind::RangeError, "diffusion bound must be positive");
    const double dx = grid.spacing();
    return std::min(control.dt_max, control.cfl_fraction * dx * dx / (2.0 * grid.dim() * diffusion_sup));
}

namespace {

/// Reusable scratch for the quasilinear right-hand side.
struct RhsWorkspace {
    ScalarField lap;
    VectorField grad;
    explicit RhsWorkspace(const Grid& g) : lap(g), grad(g) {}
};

void quasilinear_rhs(const ParabolicProblem& problem, const ScalarField& u, double t, ScalarField& out,
                     RhsWorkspace& ws) {
    const Grid& g = u.grid;
    const CoefficientSet& c = *problem.coeffs;
    const int dim = g.dim();
    laplacian_into(u, ws.lap);
    gradient_into(u, ws.grad);
    bool finite = true;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Vec2 x = g.center(i);
        const Vec2 q = ws.grad.at(i);
        const double ui = u[i];
        const Vec2 fu = c.f_u(t, x, ui);
        double adv = 0.0;
        for (int d = 0; d < dim; ++d) adv += fu[d] * q[d];
        const double v = c.a(t, x, ui, q) * ws.lap[i] + c.div_x_f(t, x, ui) + adv + c.h(t, x, ui, q);
        finite = finite && std::isfinite(v);
        out[i] = v;
    }
    if (!finite) {
        throw Error(ErrorKind::NonFinite, "right-hand side of '" + problem.name + "' is not finite at t = " +
                                              std::to_string(t));
    }
}

using RhsFn = std::function<void(double, const ScalarField&, ScalarField&)>;

/// Segment end points: sorted unique output times in (0, T), then T.
std::vector<double> segment_ends(double t_end, std::span<const double> output_times) {
    std::vector<double> ends;
    for (double t : output_times) {
        if (t > 0.0 && t < t_end * (1.0 - 1e-12)) ends.push_back(t);
    }
    std::sort(ends.begin(), ends.end());
    ends.erase(std::unique(ends.begin(), ends.end(), [](double a, double b) {
                   return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b));
               }),
               ends.end());
    ends.push_back(t_end);
    return ends;
}

Trajectory integrate_rk4(const RhsFn& f, const ScalarField& u0, double t_end, double dt, int store_every,
                         std::span<const double> output_times, const std::string& label) {
    if (!(t_end > 0.0)) throw Error(ErrorKind::RangeError, "final time must be positive");
    if (store_every < 1) throw Error(ErrorKind::RangeError, "store_every must be >= 1");
    if (!u0.all_finite()) throw Error(ErrorKind::NonFinite, label + ": initial data not finite");

    const Grid& g = u0.grid;
    const double guard = 1e3 * (u0.sup_norm() + 1.0);
    Trajectory traj(g);
    traj.times.push_back(0.0);
    traj.snapshots.push_back(u0);

    ScalarField u = u0, k1(g), k2(g), k3(g), k4(g), stage(g);
    const std::size_t n = g.size();
    long step_count = 0;
    double seg_start = 0.0;
    for (double seg_end : segment_ends(t_end, output_times)) {
        const double length = seg_end - seg_start;
        const long steps = std::max(1L, static_cast<long>(std::ceil(length / dt * (1.0 - 1e-12))));
        const double h = length / static_cast<double>(steps);
        for (long s = 0; s < steps; ++s) {
            const double t = seg_start + static_cast<double>(s) * h;
            f(t, u, k1);
            for (std::size_t i = 0; i < n; ++i) stage[i] = u[i] + 0.5 * h * k1[i];
            f(t + 0.5 * h, stage, k2);
            for (std::size_t i = 0; i < n; ++i) stage[i] = u[i] + 0.5 * h * k2[i];
            f(t + 0.5 * h, stage, k3);
            for (std::size_t i = 0; i < n; ++i) stage[i] = u[i] + h * k3[i];
            f(t + h, stage, k4);
            double sup = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                sup = std::max(sup, std::abs(u[i]));
            }
            if (!std::isfinite(sup)) throw Error(ErrorKind::NonFinite, label + ": solution became non-finite");
            if (sup > guard) {
                throw Error(ErrorKind::BlowUp, label + ": sup-norm " + std::to_string(sup) + " exceeds guard at t = " +
                                                   std::to_string(t + h));
            }
            ++step_count;
            const bool last = s + 1 == steps;
            if (last || step_count % store_every == 0) {
                traj.times.push_back(last ? seg_end : seg_start + static_cast<double>(s + 1) * h);
                traj.snapshots.push_back(u);
            }
        }
        seg_start = seg_end;
    }
    return traj;
}

}  // namespace

ScalarField rhs(const ParabolicProblem& problem, const ScalarField& u, double t) {
    if (!u.all_finite()) throw Error(ErrorKind::NonFinite, "rhs called with a non-finite field");
    RhsWorkspace ws(u.grid);
    ScalarField out(u.grid);
    quasilinear_rhs(problem, u, t, out, ws);
    return out;
}

Trajectory solve(const ParabolicProblem& problem, double t_end, const StepControl& control,
                 std::span<const double> output_times) {
    const double dt = stable_dt(problem.grid, problem.bounds.a_sup, control);
    RhsWorkspace ws(problem.grid);
    const RhsFn f = [&](double t, const ScalarField& u, ScalarField& out) { quasilinear_rhs(problem, u, t, out, ws); };
    return integrate_rk4(f, problem.initial_field(), t_end, dt, control.store_every, output_times, problem.name);
}

// ---------------------------------------------------------------------------
// Linear equation

void interpolate_coefficients(const LinearizedCoefficients& lo, const LinearizedCoefficients& hi, double w,
                              LinearizedCoefficients& out) {
    const std::size_t n = lo.alpha.size();
    const double v = 1.0 - w;
    for (std::size_t i = 0; i < n; ++i) {
        out.alpha[i] = v * lo.alpha[i] + w * hi.alpha[i];
        out.gamma[i] = v * lo.gamma[i] + w * hi.gamma[i];
        out.sigma[i] = v * lo.sigma[i] + w * hi.sigma[i];
    }
    for (std::size_t d = 0; d < lo.beta.components.size(); ++d) {
        for (std::size_t i = 0; i < n; ++i) {
            out.beta.components[d][i] = v * lo.beta.components[d][i] + w * hi.beta.components[d][i];
        }
    }
}

SliceSchedule::SliceSchedule(std::vector<double> times, std::vector<LinearizedCoefficients> slices)
    : times_(std::move(times)), slices_(std::move(slices)) {
    if (slices_.empty() || slices_.size() != times_.size()) {
        throw Error(ErrorKind::InvalidArgument, "slice schedule needs one time per slice");
    }
    if (!std::is_sorted(times_.begin(), times_.end())) {
        throw Error(ErrorKind::InvalidArgument, "slice times must be increasing");
    }
    for (const auto& s : slices_) alpha_sup_ = std::max(alpha_sup_, s.alpha.sup_norm());
}

SliceSchedule::SliceSchedule(LinearizedCoefficients constant)
    : SliceSchedule(std::vector<double>{0.0}, std::vector<LinearizedCoefficients>{std::move(constant)}) {}

void SliceSchedule::evaluate(double t, LinearizedCoefficients& out) const {
    if (slices_.size() == 1 || t <= times_.front()) {
        interpolate_coefficients(slices_.front(), slices_.front(), 0.0, out);
        return;
    }
    if (t >= times_.back()) {
        interpolate_coefficients(slices_.back(), slices_.back(), 0.0, out);
        return;
    }
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const auto k = static_cast<std::size_t>(it - times_.begin()) - 1;
    const double w = (t - times_[k]) / (times_[k + 1] - times_[k]);
    interpolate_coefficients(slices_[k], slices_[k + 1], w, out);
}

Trajectory solve_linear(const CoefficientSchedule& schedule, const ScalarField& z0, double t_end,
                        const StepControl& control, std::span<const double> output_times) {
    const Grid& g = z0.grid;
    if (!(schedule.grid() == g)) throw Error(ErrorKind::DimMismatch, "coefficient schedule and z0 grids differ");
    const double dt = stable_dt(g, schedule.alpha_sup(), control);
    LinearizedCoefficients coeffs(g);
    ScalarField lap(g);
    VectorField grad(g);
    const int dim = g.dim();
    const RhsFn f = [&](double t, const ScalarField& z, ScalarField& out) {
        schedule.evaluate(t, coeffs);
        laplacian_into(z, lap);
        gradient_into(z, grad);
        for (std::size_t i = 0; i < g.size(); ++i) {
            double adv = 0.0;
            for (int d = 0; d < dim; ++d) adv += coeffs.beta.components[static_cast<std::size_t>(d)][i] *
                                                  grad.components[static_cast<std::size_t>(d)][i];
            out[i] = coeffs.alpha[i] * lap[i] + adv + coeffs.gamma[i] * z[i] + coeffs.sigma[i];
        }
    };
    return integrate_rk4(f, z0, t_end, dt, control.store_every, output_times, "linearized equation");
}

double self_convergence_order(const ScalarField& coarse, const ScalarField& mid, const ScalarField& fine) {
    const ScalarField e_coarse = restrict_to(mid, coarse.grid) - coarse;
    const ScalarField e_mid = restrict_to(fine, mid.grid) - mid;
    const double n_coarse = lp_norm(e_coarse, Region::full(coarse.grid), 2.0);
    const double n_mid = lp_norm(e_mid, Region::full(mid.grid), 2.0);
    return std::log2(n_coarse / n_mid);
}

}  // namespace parastab
