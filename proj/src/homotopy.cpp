#include "parastab/homotopy.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <string>
#include <thread>

#include "parastab/error.hpp"

namespace parastab {

namespace {

/// θ·P + (1−θ)·Q applied to every coefficient and partial.
class BlendedCoefficients final : public CoefficientSet {
public:
    BlendedCoefficients(double theta, CoefficientPtr p, CoefficientPtr q)
        : th_(theta), om_(1.0 - theta), p_(std::move(p)), q_(std::move(q)) {}

    int dim() const override { return p_->dim(); }

    double a(double t, const Vec2& x, double u, const Vec2& q) const override {
        return th_ * p_->a(t, x, u, q) + om_ * q_->a(t, x, u, q);
    }
    Vec2 f(double t, const Vec2& x, double u) const override { return mix(p_->f(t, x, u), q_->f(t, x, u)); }
    double h(double t, const Vec2& x, double u, const Vec2& q) const override {
        return th_ * p_->h(t, x, u, q) + om_ * q_->h(t, x, u, q);
    }
    double a_u(double t, const Vec2& x, double u, const Vec2& q) const override {
        return th_ * p_->a_u(t, x, u, q) + om_ * q_->a_u(t, x, u, q);
    }
    Vec2 a_q(double t, const Vec2& x, double u, const Vec2& q) const override {
        return mix(p_->a_q(t, x, u, q), q_->a_q(t, x, u, q));
    }
    double div_x_f(double t, const Vec2& x, double u) const override {
        return th_ * p_->div_x_f(t, x, u) + om_ * q_->div_x_f(t, x, u);
    }
    Vec2 f_u(double t, const Vec2& x, double u) const override { return mix(p_->f_u(t, x, u), q_->f_u(t, x, u)); }
    Vec2 f_uu(double t, const Vec2& x, double u) const override {
        return mix(p_->f_uu(t, x, u), q_->f_uu(t, x, u));
    }
    double div_x_f_u(double t, const Vec2& x, double u) const override {
        return th_ * p_->div_x_f_u(t, x, u) + om_ * q_->div_x_f_u(t, x, u);
    }
    double h_u(double t, const Vec2& x, double u, const Vec2& q) const override {
        return th_ * p_->h_u(t, x, u, q) + om_ * q_->h_u(t, x, u, q);
    }
    Vec2 h_q(double t, const Vec2& x, double u, const Vec2& q) const override {
        return mix(p_->h_q(t, x, u, q), q_->h_q(t, x, u, q));
    }

private:
    Vec2 mix(const Vec2& a, const Vec2& b) const { return {th_ * a[0] + om_ * b[0], th_ * a[1] + om_ * b[1]}; }

    double th_;
    double om_;
    CoefficientPtr p_;
    CoefficientPtr q_;
};

void require_compatible(const ParabolicProblem& p, const ParabolicProblem& q) {
    if (!(p.grid == q.grid)) {
        throw Error(ErrorKind::DimMismatch, "problems '" + p.name + "' and '" + q.name + "' live on different grids");
    }
    if (p.coeffs->dim() != q.coeffs->dim() || p.coeffs->dim() != p.grid.dim()) {
        throw Error(ErrorKind::DimMismatch, "coefficient dimensions do not match the grid");
    }
}

void require_theta(double theta) {
    if (!(theta >= 0.0 && theta <= 1.0)) throw Error(ErrorKind::RangeError, "theta must lie in [0, 1]");
}

/// Assembles coefficient slices on demand from the stored u_θ snapshots, keeping the
/// two most recent slices.
class AssembledSchedule final : public CoefficientSchedule {
public:
    AssembledSchedule(const ParabolicProblem& p, const ParabolicProblem& q, double theta, const Trajectory& u_theta)
        : p_(p), q_(q), theta_(theta), u_(u_theta),
          alpha_sup_(std::max(p.bounds.a_sup, q.bounds.a_sup)),
          slots_{LinearizedCoefficients(u_theta.grid), LinearizedCoefficients(u_theta.grid)} {}

    const Grid& grid() const override { return u_.grid; }
    double alpha_sup() const override { return alpha_sup_; }

    void evaluate(double t, LinearizedCoefficients& out) const override {
        if (u_.size() == 1) {
            interpolate_coefficients(slice(0), slice(0), 0.0, out);
            return;
        }
        const std::size_t k = u_.bracket(t);
        const double t0 = u_.times[k], t1 = u_.times[k + 1];
        const double w = std::clamp((t - t0) / (t1 - t0), 0.0, 1.0);
        const LinearizedCoefficients& lo = slice(k);
        const LinearizedCoefficients& hi = slice(k + 1);
        interpolate_coefficients(lo, hi, w, out);
    }

private:
    const LinearizedCoefficients& slice(std::size_t k) const {
        for (int s = 0; s < 2; ++s) {
            if (keys_[s] == k) return slots_[s];
        }
        // Evict the slot that is not the other bracket end.
        const int victim = (keys_[0] == k - 1 || keys_[0] == k + 1) ? 1 : 0;
        slots_[victim] = assemble_linearized(p_, q_, theta_, u_.snapshots[k], u_.times[k]);
        keys_[victim] = k;
        return slots_[victim];
    }

    const ParabolicProblem& p_;
    const ParabolicProblem& q_;
    double theta_;
    const Trajectory& u_;
    double alpha_sup_;
    mutable LinearizedCoefficients slots_[2];
    mutable std::size_t keys_[2] = {static_cast<std::size_t>(-1), static_cast<std::size_t>(-1)};
};

}  // namespace

ParabolicProblem blend(const ParabolicProblem& p, const ParabolicProblem& q, double theta) {
    require_theta(theta);
    require_compatible(p, q);
    const double om = 1.0 - theta;
    FieldBounds b;
    b.a_star = theta * p.bounds.a_star + om * q.bounds.a_star;
    b.a_sup = theta * p.bounds.a_sup + om * q.bounds.a_sup;
    b.k1 = std::max(p.bounds.k1, q.bounds.k1);
    b.k2 = std::max(p.bounds.k2, q.bounds.k2);
    b.k3 = std::max(p.bounds.k3, q.bounds.k3);
    b.K1 = std::max(p.bounds.K1, q.bounds.K1);
    b.K2 = std::max(p.bounds.K2, q.bounds.K2);
    b.K3 = std::max(p.bounds.K3, q.bounds.K3);
    ParabolicProblem out{"blend(" + p.name + "," + q.name + "," + std::to_string(theta) + ")", p.grid,
                         std::make_shared<BlendedCoefficients>(theta, p.coeffs, q.coeffs), {}, b};
    out.initial = [phi = p.initial, psi = q.initial, theta, om](const Vec2& x) {
        return theta * phi(x) + om * psi(x);
    };
    return out;
}

LinearizedCoefficients assemble_linearized(const ParabolicProblem& p, const ParabolicProblem& q, double theta,
                                           const ScalarField& u_theta, double t) {
    require_theta(theta);
    require_compatible(p, q);
    const Grid& g = u_theta.grid;
    if (!(g == p.grid)) throw Error(ErrorKind::DimMismatch, "u_theta grid differs from the problem grid");
    const CoefficientSet& cp = *p.coeffs;
    const CoefficientSet& cq = *q.coeffs;
    const int dim = g.dim();
    const double th = theta, om = 1.0 - theta;

    const ScalarField lap = laplacian(u_theta);
    const VectorField grad = gradient(u_theta);
    LinearizedCoefficients out(g);
    bool finite = true;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Vec2 x = g.center(i);
        const double u = u_theta[i];
        const Vec2 du = grad.at(i);
        const double d2u = lap[i];

        const double a = cp.a(t, x, u, du), b = cq.a(t, x, u, du);
        const Vec2 aq = cp.a_q(t, x, u, du), bq = cq.a_q(t, x, u, du);
        const Vec2 fu = cp.f_u(t, x, u), gu = cq.f_u(t, x, u);
        const Vec2 fuu = cp.f_uu(t, x, u), guu = cq.f_uu(t, x, u);
        const Vec2 hq = cp.h_q(t, x, u, du), kq = cq.h_q(t, x, u, du);

        out.alpha[i] = th * a + om * b;

        double gamma = (th * cp.a_u(t, x, u, du) + om * cq.a_u(t, x, u, du)) * d2u +
                       th * cp.div_x_f_u(t, x, u) + om * cq.div_x_f_u(t, x, u) + th * cp.h_u(t, x, u, du) +
                       om * cq.h_u(t, x, u, du);
        double sigma = (a - b) * d2u + cp.div_x_f(t, x, u) - cq.div_x_f(t, x, u) + cp.h(t, x, u, du) -
                       cq.h(t, x, u, du);
        for (int d = 0; d < dim; ++d) {
            const double beta = (th * aq[d] + om * bq[d]) * d2u + th * fu[d] + om * gu[d] + th * hq[d] + om * kq[d];
            out.beta.components[static_cast<std::size_t>(d)][i] = beta;
            gamma += (th * fuu[d] + om * guu[d]) * du[d];
            sigma += (fu[d] - gu[d]) * du[d];
            finite = finite && std::isfinite(beta);
        }
        out.gamma[i] = gamma;
        out.sigma[i] = sigma;
        finite = finite && std::isfinite(out.alpha[i]) && std::isfinite(gamma) && std::isfinite(sigma);
    }
    if (!finite) throw Error(ErrorKind::NonFinite, "linearized coefficients are not finite at t = " + std::to_string(t));
    return out;
}

StepControl pair_control(const ParabolicProblem& p, const ParabolicProblem& q, const StepControl& control) {
    require_compatible(p, q);
    StepControl out = control;
    out.dt_max = stable_dt(p.grid, std::max(p.bounds.a_sup, q.bounds.a_sup), control);
    return out;
}

HomotopyRun solve_sensitivity(const ParabolicProblem& p, const ParabolicProblem& q, double theta, double t_end,
                              const StepControl& control, std::span<const double> output_times) {
    const StepControl shared = pair_control(p, q, control);
    const ParabolicProblem blended = blend(p, q, theta);
    Trajectory u_theta = solve(blended, t_end, shared, output_times);
    const AssembledSchedule schedule(p, q, theta, u_theta);
    const ScalarField z0 = p.initial_field() - q.initial_field();
    Trajectory z = solve_linear(schedule, z0, t_end, shared, output_times);
    return HomotopyRun{theta, std::move(u_theta), std::move(z)};
}

ScalarField fd_sensitivity(const ParabolicProblem& p, const ParabolicProblem& q, double theta, double delta,
                           const StepControl& control, double t) {
    if (!(delta > 0.0)) throw Error(ErrorKind::RangeError, "delta must be positive");
    require_theta(theta - delta);
    require_theta(theta + delta);
    const StepControl shared = pair_control(p, q, control);
    const double stop[] = {t};
    const Trajectory up = solve(blend(p, q, theta + delta), t, shared, stop);
    const Trajectory down = solve(blend(p, q, theta - delta), t, shared, stop);
    return (1.0 / (2.0 * delta)) * (up.final_state() - down.final_state());
}

QuadratureRule QuadratureRule::gauss_legendre(int count) {
    if (count < 1) throw Error(ErrorKind::RangeError, "quadrature needs at least one node");
    QuadratureRule rule;
    const int n = count;
    std::vector<std::pair<double, double>> pts;
    for (int i = 1; i <= n; ++i) {
        double x = std::cos(std::numbers::pi * (i - 0.25) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            if (n == 1) p0 = 1.0;
            // p1 = P_n(x), p0 = P_{n-1}(x)
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        pts.emplace_back(0.5 * (1.0 + x), 0.5 * w);
    }
    std::sort(pts.begin(), pts.end());
    double total = 0.0;
    for (const auto& [node, w] : pts) total += w;
    for (const auto& [node, w] : pts) {
        rule.nodes.push_back(node);
        rule.weights.push_back(w / total);
    }
    return rule;
}

double ThetaSamples::curve_length(const Region& region, double p, std::size_t time_index) const {
    double sum = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) sum += rule.weights[k] * lp_norm(z[k][time_index], region, p);
    return sum;
}

double ThetaSamples::sup_norm(std::size_t time_index) const {
    double m = 0.0;
    for (const auto& per_node : z) m = std::max(m, per_node[time_index].sup_norm());
    return m;
}

ThetaSamples sample_sensitivities(const ParabolicProblem& p, const ParabolicProblem& q, const QuadratureRule& rule,
                                  std::span<const double> times, const StepControl& control, int threads) {
    if (times.empty()) throw Error(ErrorKind::EmptyList, "no output times requested");
    const double t_end = *std::max_element(times.begin(), times.end());
    ThetaSamples out{rule, std::vector<double>(times.begin(), times.end()), {}};
    out.z.resize(rule.nodes.size());

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t k = next++; k < rule.nodes.size(); k = next++) {
            try {
                const HomotopyRun run = solve_sensitivity(p, q, rule.nodes[k], t_end, control, times);
                std::vector<ScalarField> at_times;
                for (double t : times) at_times.push_back(t == 0.0 ? run.z_trajectory.snapshots.front()
                                                                   : run.z_trajectory.at(t));
                out.z[k] = std::move(at_times);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const int workers = std::clamp(threads, 1, static_cast<int>(rule.nodes.size()));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

double curve_length(const ParabolicProblem& p, const ParabolicProblem& q, const Region& region, double exponent,
                    double t, const QuadratureRule& rule, const StepControl& control) {
    const double times[] = {t};
    return sample_sensitivities(p, q, rule, times, control).curve_length(region, exponent, 0);
}

double fit_sensitivity_growth(const ThetaSamples& samples, double phi_psi_sup) {
    double c1 = 0.0;
    for (std::size_t i = 0; i < samples.times.size(); ++i) {
        const double t = samples.times[i];
        if (t <= 0.0) continue;
        c1 = std::max(c1, (samples.sup_norm(i) - phi_psi_sup) / t);
    }
    return c1;
}

}  // namespace parastab
