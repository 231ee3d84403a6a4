#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "parastab/error.hpp"
#include "parastab/problems.hpp"
#include "parastab/solver.hpp"

using namespace parastab;
using oracle::kTwoPi;

namespace {

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an exception");
    return ErrorKind::InvalidArgument;
}

ParabolicProblem with_coeffs(const std::string& name, const Grid& g, CoefficientPtr c) {
    ParabolicProblem p{name, g, std::move(c), [](const Vec2&) { return 0.0; }, {}};
    return p;
}

CoefficientPtr constant_diffusion(int dim, double a) {
    return make_numeric_coefficients(
        dim, [a](double, const Vec2&, double, const Vec2&) { return a; },
        [](double, const Vec2&, double) { return Vec2{0.0, 0.0}; },
        [](double, const Vec2&, double, const Vec2&) { return 0.0; });
}

/// Coefficient set whose a_u is off by a constant.
class WrongPartial final : public CoefficientSet {
public:
    explicit WrongPartial(CoefficientPtr base) : b_(std::move(base)) {}
    int dim() const override { return b_->dim(); }
    double a(double t, const Vec2& x, double u, const Vec2& q) const override { return b_->a(t, x, u, q); }
    Vec2 f(double t, const Vec2& x, double u) const override { return b_->f(t, x, u); }
    double h(double t, const Vec2& x, double u, const Vec2& q) const override { return b_->h(t, x, u, q); }
    double a_u(double t, const Vec2& x, double u, const Vec2& q) const override { return b_->a_u(t, x, u, q) + 0.01; }
    Vec2 a_q(double t, const Vec2& x, double u, const Vec2& q) const override { return b_->a_q(t, x, u, q); }
    double div_x_f(double t, const Vec2& x, double u) const override { return b_->div_x_f(t, x, u); }
    Vec2 f_u(double t, const Vec2& x, double u) const override { return b_->f_u(t, x, u); }
    Vec2 f_uu(double t, const Vec2& x, double u) const override { return b_->f_uu(t, x, u); }
    double div_x_f_u(double t, const Vec2& x, double u) const override { return b_->div_x_f_u(t, x, u); }
    double h_u(double t, const Vec2& x, double u, const Vec2& q) const override { return b_->h_u(t, x, u, q); }
    Vec2 h_q(double t, const Vec2& x, double u, const Vec2& q) const override { return b_->h_q(t, x, u, q); }

private:
    CoefficientPtr b_;
};

}  // namespace

TEST_CASE("halton radical inverse") {
    CHECK(halton(1, 2) == 0.5);
    CHECK(halton(2, 2) == 0.25);
    CHECK(halton(3, 2) == 0.75);
    CHECK(halton(1, 3) == doctest::Approx(1.0 / 3.0));
    CHECK(halton(5, 3) == doctest::Approx(2.0 / 3.0 + 1.0 / 9.0));
}

TEST_CASE("catalog ids resolve and unknown ids are rejected") {
    const Grid g(1, kTwoPi, 32);
    for (const auto& id : catalog_ids()) CHECK_NOTHROW(make_catalog_problem(id, g));
    CHECK(kind_of([&] { (void)make_catalog_problem("warp_drive", g); }) == ErrorKind::UnknownCatalogId);
    try {
        (void)catalog_defaults("warp_drive", 1);
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("warp_drive") != std::string::npos);
    }
}

TEST_CASE("catalog parameters by key") {
    CatalogParams p;
    p.set("fv_y", 0.25);
    p.set("a0", 2.0);
    CHECK(p.fv[1] == 0.25);
    CHECK(p.get("a0") == 2.0);
    CHECK(kind_of([&] { p.set("bogus", 1.0); }) == ErrorKind::RangeError);
    CHECK(CatalogParams::scalar_keys().size() == 16);
}

TEST_CASE("degenerate diffusion is rejected at construction") {
    CatalogParams p = catalog_defaults("heat", 1);
    p.a0 = 0.2;
    p.au = 0.3;
    CHECK(kind_of([&] { (void)make_catalog_problem("bad", Grid(1, 1.0, 16), p); }) ==
          ErrorKind::HypothesisViolation);
}

TEST_CASE("derivative self-test passes for every catalog problem") {
    for (int dim : {1, 2}) {
        const Grid g(dim, kTwoPi, 16);
        for (const auto& id : catalog_ids()) {
            const ParabolicProblem p = make_catalog_problem(id, g);
            const DerivativeCheck c = check_derivatives(*p.coeffs, g.extent(), 1.0, 2.0, 2.0);
            INFO(id, " dim ", dim, " worst ", c.worst_term, " err ", c.max_error);
            CHECK(c.passed());
        }
    }
}

TEST_CASE("derivative self-test catches a wrong partial") {
    const Grid g(1, kTwoPi, 16);
    const ParabolicProblem p = make_catalog_problem("nonlinear_diffusion", g);
    const WrongPartial wrong(p.coeffs);
    const DerivativeCheck c = check_derivatives(wrong, g.extent(), 1.0, 2.0, 2.0);
    CHECK_FALSE(c.passed());
    CHECK(c.worst_term == "a_u");
}

TEST_CASE("ellipticity holds on the sampled box for every catalog problem") {
    for (int dim : {1, 2}) {
        const Grid g(dim, kTwoPi, 16);
        for (const auto& id : catalog_ids()) {
            const ParabolicProblem p = make_catalog_problem(id, g);
            const auto [lo, hi] = diffusion_range(*p.coeffs, g.extent(), 1.0, 3.0, 3.0);
            CHECK(lo >= p.bounds.a_star);
            CHECK(hi <= p.bounds.a_sup);
            CHECK_NOTHROW(check_hypotheses(p, 1.0, 3.0, 3.0));
        }
    }
}

TEST_CASE("initial data above the declared C2 bound is a hypothesis violation") {
    const Grid g(1, kTwoPi, 64);
    ParabolicProblem p = make_catalog_problem("heat", g);
    p.bounds.k3 = 0.5;
    CHECK(kind_of([&] { check_hypotheses(p, 1.0, 1.0, 1.0); }) == ErrorKind::HypothesisViolation);
}

TEST_CASE("measure_bounds on a constant solution") {
    const Grid g(2, 1.0, 16);
    Trajectory traj(g);
    traj.times = {0.0, 1.0};
    traj.snapshots = {ScalarField(g, -0.7), ScalarField(g, -0.7)};
    const FieldBounds b = measure_bounds(make_catalog_problem("constant", g), traj);
    CHECK(b.K1 == doctest::Approx(0.7));
    CHECK(b.K2 == 0.0);
    CHECK(b.K3 == 0.0);
}

TEST_CASE("measure_bounds on a decaying heat mode") {
    const double L = 1.0;
    const Grid g(1, L, 256);
    const ParabolicProblem p = make_catalog_problem("heat", g);
    const Trajectory traj = solve(p, 0.02, {});
    const FieldBounds b = measure_bounds(p, traj);
    const double k = kTwoPi / L;
    // analytic suprema of sin(kx) and its derivatives, attained at t = 0
    CHECK(b.K1 == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(b.K2 == doctest::Approx(k).epsilon(1e-3));
    CHECK(b.K3 == doctest::Approx(k * k).epsilon(1e-3));
    CHECK(b.K1 == doctest::Approx(traj.snapshots.front().sup_norm()));
}

TEST_CASE("measure_bounds rejects non-finite trajectories") {
    const Grid g(1, 1.0, 16);
    Trajectory traj(g);
    traj.times = {0.0};
    ScalarField bad(g, 0.0);
    bad[3] = std::nan("");
    traj.snapshots = {bad};
    CHECK(kind_of([&] { (void)measure_bounds(make_catalog_problem("heat", g), traj); }) == ErrorKind::NonFinite);
}

TEST_CASE("sup_coeff_diffs of identical problems vanishes") {
    const Grid g(2, kTwoPi, 16);
    const ParabolicProblem p = make_catalog_problem("full", g);
    const SampleBox r{1.0, Region::full(g), 1.0, std::nullopt};
    const SampleBox r0{1.0, Region::full(g), 1.0, 2.0};
    const CoeffDiffs d = sup_coeff_diffs(p, p, r, r0);
    CHECK(d.sum() == 0.0);
}

TEST_CASE("sup_coeff_diffs of a constant diffusion offset") {
    const Grid g(1, 1.0, 32);
    const double eps = 0.037;
    const auto p = with_coeffs("a", g, constant_diffusion(1, 1.0));
    const auto q = with_coeffs("b", g, constant_diffusion(1, 1.0 + eps));
    const SampleBox r{1.0, Region::full(g), 1.0, std::nullopt};
    const SampleBox r0{1.0, Region::full(g), 1.0, 1.0};
    const CoeffDiffs d = sup_coeff_diffs(p, q, r, r0);
    CHECK(d.a == doctest::Approx(eps).epsilon(1e-12));
    CHECK(d.div_f == 0.0);
    CHECK(d.f_u == 0.0);
    CHECK(d.h == 0.0);
}

TEST_CASE("sup_coeff_diffs against a dense brute-force sweep") {
    const double L = 1.0;
    const Grid g(1, L, 64);
    auto a_fn = [L](double, const Vec2& x, double u, const Vec2&) { return 1.0 + 0.1 * std::sin(kTwoPi * x[0] / L) * u; };
    const auto p = with_coeffs(
        "a", g,
        make_numeric_coefficients(
            1, a_fn, [](double, const Vec2&, double) { return Vec2{0.0, 0.0}; },
            [](double, const Vec2&, double, const Vec2&) { return 0.0; }));
    const auto q = with_coeffs("b", g, constant_diffusion(1, 1.0));
    const SampleBox r{1.0, Region::full(g), 1.0, std::nullopt};
    const SampleBox r0{1.0, Region::full(g), 1.0, 1.0};
    const CoeffDiffs d = sup_coeff_diffs(p, q, r, r0, 4096);

    // dense sweep of x ∈ [0, L), u ∈ [−1, 1]
    double dense = 0.0;
    for (int i = 0; i <= 2000; ++i) {
        for (int j = 0; j <= 200; ++j) {
            const double x = L * i / 2000.0, u = -1.0 + 2.0 * j / 200.0;
            dense = std::max(dense, std::abs(a_fn(0.0, {x, 0.0}, u, {0.0, 0.0}) - 1.0));
        }
    }
    CHECK(dense == doctest::Approx(0.1).epsilon(1e-6));
    CHECK(d.a <= dense + 1e-12);
    CHECK(d.a == doctest::Approx(dense).epsilon(0.02));
}

TEST_CASE("sup_coeff_diffs is symmetric and satisfies the triangle inequality") {
    const Grid g(2, kTwoPi, 16);
    const auto a = make_catalog_problem("convection", g);
    const auto b = make_catalog_problem("reaction", g);
    const auto c = make_catalog_problem("full", g);
    const SampleBox r{0.5, Region::ball(g, {3.0, 3.0}, 1.5), 1.5, std::nullopt};
    const SampleBox r0{0.5, Region::ball(g, {3.0, 3.0}, 1.5), 1.5, 1.0};
    const CoeffDiffs ab = sup_coeff_diffs(a, b, r, r0), ba = sup_coeff_diffs(b, a, r, r0);
    CHECK(ab.a == ba.a);
    CHECK(ab.div_f == ba.div_f);
    CHECK(ab.f_u == ba.f_u);
    CHECK(ab.h == ba.h);
    const CoeffDiffs bc = sup_coeff_diffs(b, c, r, r0), ac = sup_coeff_diffs(a, c, r, r0);
    CHECK(ac.a <= ab.a + bc.a + 1e-14);
    CHECK(ac.div_f <= ab.div_f + bc.div_f + 1e-14);
    CHECK(ac.f_u <= ab.f_u + bc.f_u + 1e-14);
    CHECK(ac.h <= ab.h + bc.h + 1e-14);
}

TEST_CASE("sup_coeff_diffs needs at least 1000 samples") {
    const Grid g(1, 1.0, 16);
    const auto p = make_catalog_problem("heat", g);
    const SampleBox r{1.0, Region::full(g), 1.0, std::nullopt};
    CHECK(kind_of([&] { (void)sup_coeff_diffs(p, p, r, r, 999); }) == ErrorKind::RangeError);
}

TEST_CASE("numeric-derivative wrapper agrees with analytic catalog partials") {
    const Grid g(2, kTwoPi, 16);
    const auto cat = make_catalog_problem("full", g);
    const auto num = make_numeric_coefficients(
        2, [c = cat.coeffs](double t, const Vec2& x, double u, const Vec2& q) { return c->a(t, x, u, q); },
        [c = cat.coeffs](double t, const Vec2& x, double u) { return c->f(t, x, u); },
        [c = cat.coeffs](double t, const Vec2& x, double u, const Vec2& q) { return c->h(t, x, u, q); });
    const Vec2 x{1.1, 2.3}, q{0.4, -0.2};
    const double t = 0.3, u = 0.7;
    CHECK(num->a_u(t, x, u, q) == doctest::Approx(cat.coeffs->a_u(t, x, u, q)).epsilon(1e-6));
    CHECK(num->div_x_f(t, x, u) == doctest::Approx(cat.coeffs->div_x_f(t, x, u)).epsilon(1e-6));
    CHECK(num->f_uu(t, x, u)[1] == doctest::Approx(cat.coeffs->f_uu(t, x, u)[1]).epsilon(1e-4));
    CHECK(num->div_x_f_u(t, x, u) == doctest::Approx(cat.coeffs->div_x_f_u(t, x, u)).epsilon(1e-4));
    CHECK(num->h_q(t, x, u, q)[0] == doctest::Approx(cat.coeffs->h_q(t, x, u, q)[0]).epsilon(1e-6));
}
