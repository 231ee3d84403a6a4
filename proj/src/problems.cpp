#include "parastab/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "parastab/error.hpp"

namespace parastab {

double halton(std::uint64_t index, std::uint32_t base) {
    double result = 0.0;
    double scale = 1.0 / base;
    while (index > 0) {
        result += static_cast<double>(index % base) * scale;
        index /= base;
        scale /= base;
    }
    return result;
}

namespace {

struct BoxPoint {
    double t;
    Vec2 x;
    double u;
    Vec2 q;
};

/// i-th Halton point of the box; x is a cell of the region jittered inside the cell.
BoxPoint box_point(std::uint64_t i, const SampleBox& box) {
    const Grid& g = box.region.grid();
    const auto cells = box.region.cells();
    BoxPoint pt{};
    pt.t = box.t_end * halton(i, 2);
    const auto pick = std::min(cells.size() - 1, static_cast<std::size_t>(halton(i, 3) * cells.size()));
    pt.x = g.center(cells[pick]);
    pt.x[0] += (halton(i, 5) - 0.5) * g.spacing();
    if (g.dim() == 2) pt.x[1] += (halton(i, 7) - 0.5) * g.spacing();
    pt.u = box.u_max * (2.0 * halton(i, 11) - 1.0);
    pt.q = {0.0, 0.0};
    if (box.q_max) {
        pt.q[0] = *box.q_max * (2.0 * halton(i, 13) - 1.0);
        if (g.dim() == 2) pt.q[1] = *box.q_max * (2.0 * halton(i, 17) - 1.0);
    }
    return pt;
}

}  // namespace

CoeffDiffs sup_coeff_diffs(const ParabolicProblem& p, const ParabolicProblem& q, const SampleBox& r,
                           const SampleBox& r0, int samples) {
    if (samples < 1000) throw Error(ErrorKind::RangeError, "sup_coeff_diffs needs at least 1000 samples");
    if (p.grid.dim() != q.grid.dim()) throw Error(ErrorKind::DimMismatch, "problems differ in dimension");
    if (r.region.empty() || r0.region.empty()) throw Error(ErrorKind::EmptyRegion, "sampling box over empty region");
    const CoefficientSet& cp = *p.coeffs;
    const CoefficientSet& cq = *q.coeffs;
    const int dim = p.grid.dim();

    CoeffDiffs d;
    for (int s = 1; s <= samples; ++s) {
        const BoxPoint pt0 = box_point(static_cast<std::uint64_t>(s), r0);
        d.a = std::max(d.a, std::abs(cp.a(pt0.t, pt0.x, pt0.u, pt0.q) - cq.a(pt0.t, pt0.x, pt0.u, pt0.q)));
        d.h = std::max(d.h, std::abs(cp.h(pt0.t, pt0.x, pt0.u, pt0.q) - cq.h(pt0.t, pt0.x, pt0.u, pt0.q)));

        const BoxPoint pt = box_point(static_cast<std::uint64_t>(s), r);
        d.div_f = std::max(d.div_f, std::abs(cp.div_x_f(pt.t, pt.x, pt.u) - cq.div_x_f(pt.t, pt.x, pt.u)));
        const Vec2 fp = cp.f_u(pt.t, pt.x, pt.u);
        const Vec2 fq = cq.f_u(pt.t, pt.x, pt.u);
        for (int j = 0; j < dim; ++j) d.f_u = std::max(d.f_u, std::abs(fp[j] - fq[j]));
    }
    return d;
}

FieldBounds measure_bounds(const ParabolicProblem& problem, const Trajectory& trajectory) {
    FieldBounds b = problem.bounds;
    b.K1 = b.K2 = b.K3 = 0.0;
    const int dim = trajectory.grid.dim();
    for (const auto& snap : trajectory.snapshots) {
        if (!snap.all_finite()) throw Error(ErrorKind::NonFinite, "trajectory of '" + problem.name + "' is not finite");
        b.K1 = std::max(b.K1, snap.sup_norm());
        const VectorField grad = gradient(snap);
        for (const auto& comp : grad.components) b.K2 = std::max(b.K2, comp.sup_norm());
        for (int i = 0; i < dim; ++i) {
            for (int j = i; j < dim; ++j) b.K3 = std::max(b.K3, second_derivative(snap, i, j).sup_norm());
        }
    }
    return b;
}

double discrete_c2_norm(const ScalarField& field) {
    double norm = field.sup_norm();
    const VectorField grad = gradient(field);
    for (const auto& comp : grad.components) norm = std::max(norm, comp.sup_norm());
    const int dim = field.grid.dim();
    for (int i = 0; i < dim; ++i) {
        for (int j = i; j < dim; ++j) norm = std::max(norm, second_derivative(field, i, j).sup_norm());
    }
    return norm;
}

namespace {

constexpr double kFdStep = 1e-5;

struct ErrorTracker {
    DerivativeCheck result;
    void record(const char* term, double analytic, double fd) {
        const double err = std::abs(analytic - fd) / std::max(1.0, std::abs(analytic));
        if (err >= result.max_error) {
            result.max_error = err;
            result.worst_term = term;
        }
    }
};

}  // namespace

DerivativeCheck check_derivatives(const CoefficientSet& c, double extent, double t_end, double u_max,
                                  double q_max, int samples) {
    const int dim = c.dim();
    const double hs = kFdStep;
    ErrorTracker track;
    for (int s = 1; s <= samples; ++s) {
        const auto i = static_cast<std::uint64_t>(s);
        const double t = t_end * halton(i, 2);
        const Vec2 x{extent * halton(i, 3), dim == 2 ? extent * halton(i, 5) : 0.0};
        const double u = u_max * (2.0 * halton(i, 7) - 1.0);
        const Vec2 q{q_max * (2.0 * halton(i, 11) - 1.0), dim == 2 ? q_max * (2.0 * halton(i, 13) - 1.0) : 0.0};

        track.record("a_u", c.a_u(t, x, u, q), (c.a(t, x, u + hs, q) - c.a(t, x, u - hs, q)) / (2 * hs));
        track.record("h_u", c.h_u(t, x, u, q), (c.h(t, x, u + hs, q) - c.h(t, x, u - hs, q)) / (2 * hs));
        const Vec2 aq = c.a_q(t, x, u, q);
        const Vec2 hq = c.h_q(t, x, u, q);
        const Vec2 fu = c.f_u(t, x, u);
        const Vec2 fuu = c.f_uu(t, x, u);
        double div_f = 0.0, div_fu = 0.0;
        for (int j = 0; j < dim; ++j) {
            Vec2 qp = q, qm = q, xp = x, xm = x;
            qp[j] += hs;
            qm[j] -= hs;
            xp[j] += hs;
            xm[j] -= hs;
            track.record("a_q", aq[j], (c.a(t, x, u, qp) - c.a(t, x, u, qm)) / (2 * hs));
            track.record("h_q", hq[j], (c.h(t, x, u, qp) - c.h(t, x, u, qm)) / (2 * hs));
            track.record("f_u", fu[j], (c.f(t, x, u + hs)[j] - c.f(t, x, u - hs)[j]) / (2 * hs));
            track.record("f_uu", fuu[j], (c.f_u(t, x, u + hs)[j] - c.f_u(t, x, u - hs)[j]) / (2 * hs));
            div_f += (c.f(t, xp, u)[j] - c.f(t, xm, u)[j]) / (2 * hs);
            div_fu += (c.f_u(t, xp, u)[j] - c.f_u(t, xm, u)[j]) / (2 * hs);
        }
        track.record("div_x_f", c.div_x_f(t, x, u), div_f);
        track.record("div_x_f_u", c.div_x_f_u(t, x, u), div_fu);
    }
    return track.result;
}

std::pair<double, double> diffusion_range(const CoefficientSet& c, double extent, double t_end, double u_max,
                                          double q_max, int samples) {
    const int dim = c.dim();
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int s = 1; s <= samples; ++s) {
        const auto i = static_cast<std::uint64_t>(s);
        const double t = t_end * halton(i, 2);
        const Vec2 x{extent * halton(i, 3), dim == 2 ? extent * halton(i, 5) : 0.0};
        const double u = u_max * (2.0 * halton(i, 7) - 1.0);
        const Vec2 q{q_max * (2.0 * halton(i, 11) - 1.0), dim == 2 ? q_max * (2.0 * halton(i, 13) - 1.0) : 0.0};
        const double a = c.a(t, x, u, q);
        lo = std::min(lo, a);
        hi = std::max(hi, a);
    }
    return {lo, hi};
}

void check_hypotheses(const ParabolicProblem& problem, double t_end, double u_max, double q_max) {
    const double extent = problem.grid.extent();
    const DerivativeCheck deriv = check_derivatives(*problem.coeffs, extent, t_end, u_max, q_max);
    if (!deriv.passed()) {
        throw Error(ErrorKind::HypothesisViolation, "'" + problem.name + "': analytic partial " + deriv.worst_term +
                                                        " disagrees with finite differences (rel. err " +
                                                        std::to_string(deriv.max_error) + ")");
    }
    const auto [lo, hi] = diffusion_range(*problem.coeffs, extent, t_end, u_max, q_max);
    const double slack = 1e-12 * std::max(1.0, problem.bounds.a_sup);
    if (lo < problem.bounds.a_star - slack || !(lo > 0.0)) {
        throw Error(ErrorKind::HypothesisViolation,
                    "'" + problem.name + "': diffusion drops to " + std::to_string(lo) + " below declared a_*");
    }
    if (hi > problem.bounds.a_sup + slack) {
        throw Error(ErrorKind::HypothesisViolation,
                    "'" + problem.name + "': diffusion reaches " + std::to_string(hi) + " above declared a^*");
    }
    const double c2 = discrete_c2_norm(problem.initial_field());
    if (c2 > 1.1 * problem.bounds.k3) {
        throw Error(ErrorKind::HypothesisViolation, "'" + problem.name + "': initial data C2 norm " +
                                                        std::to_string(c2) + " exceeds declared k3");
    }
}

}  // namespace parastab
