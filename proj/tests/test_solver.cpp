#include <cmath>
#include <random>

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

ParabolicProblem heat_problem(const Grid& g, double a0, std::function<double(const Vec2&)> init) {
    CatalogParams p;
    p.a0 = a0;
    ParabolicProblem prob = make_catalog_problem("heat", g, p);
    prob.initial = std::move(init);
    return prob;
}

LinearizedCoefficients constant_coeffs(const Grid& g, double alpha, double gamma, double sigma) {
    LinearizedCoefficients c(g);
    c.alpha = ScalarField(g, alpha);
    c.gamma = ScalarField(g, gamma);
    c.sigma = ScalarField(g, sigma);
    return c;
}

}  // namespace

TEST_CASE("stable_dt follows the diffusion CFL rule") {
    const Grid g1(1, 1.0, 100), g2(2, 1.0, 100);
    CHECK(stable_dt(g1, 2.0, {}) == doctest::Approx(0.5 * 1e-4 / 4.0));
    CHECK(stable_dt(g2, 2.0, {}) == doctest::Approx(0.5 * 1e-4 / 8.0));
    StepControl c;
    c.dt_max = 1e-9;
    CHECK(stable_dt(g1, 2.0, c) == 1e-9);
    c = {};
    c.cfl_fraction = 1.5;
    CHECK(kind_of([&] { (void)stable_dt(g1, 1.0, c); }) == ErrorKind::RangeError);
}

TEST_CASE("rhs of the heat equation is a times the discrete Laplacian") {
    for (int dim : {1, 2}) {
        const Grid g(dim, 2.0, 32);
        std::mt19937_64 rng(5);
        const auto u = oracle::random_field(g, rng);
        const auto prob = heat_problem(g, 1.7, [](const Vec2&) { return 0.0; });
        const auto r = rhs(prob, u, 0.3);
        const auto lap = laplacian(u);
        for (std::size_t i = 0; i < g.size(); ++i) CHECK(r[i] == doctest::Approx(1.7 * lap[i]).epsilon(1e-13));
    }
}

TEST_CASE("rhs of a pure reaction term is pointwise") {
    const Grid g(1, 1.0, 16);
    ParabolicProblem prob{"reaction", g,
                          make_numeric_coefficients(
                              1, [](double, const Vec2&, double, const Vec2&) { return 1.0; },
                              [](double, const Vec2&, double) { return Vec2{0.0, 0.0}; },
                              [](double t, const Vec2&, double u, const Vec2&) { return t - u * u; }),
                          [](const Vec2&) { return 0.0; },
                          {}};
    const ScalarField c(g, 0.5);
    const auto r = rhs(prob, c, 2.0);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(r[i] == doctest::Approx(1.75).epsilon(1e-14));
}

TEST_CASE("a constant state of a source-free problem stays put") {
    for (int dim : {1, 2}) {
        const Grid g(dim, kTwoPi, 16);
        const auto prob = make_catalog_problem("constant", g);
        const Trajectory traj = solve(prob, 0.3, {});
        for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(traj.final_state()[i] - 1.0) <= 1e-12);
    }
}

TEST_CASE("heat mode decays at the Fourier rate") {
    const double L = kTwoPi, T = 0.5;
    const Grid g(1, L, 128);
    const auto prob = heat_problem(g, 1.0, [](const Vec2& x) { return std::sin(x[0]); });
    const Trajectory traj = solve(prob, T, {});
    const auto exact = ScalarField::sample(g, [&](const Vec2& x) { return oracle::heat_factor(1.0, L, T) * std::sin(x[0]); });
    // stencil decay error k² dx²/12 · T ≈ 1e-4 relative
    CHECK(oracle::max_diff(traj.final_state(), exact) < 2e-4);
}

TEST_CASE("sup norm of a heat solution never increases") {
    const Grid g(2, 1.0, 32);
    const auto prob = heat_problem(g, 0.8, [](const Vec2& x) {
        return std::sin(kTwoPi * x[0]) + 0.5 * std::cos(2 * kTwoPi * x[1]) + 0.2 * std::sin(kTwoPi * (x[0] + x[1]));
    });
    const Trajectory traj = solve(prob, 0.05, {});
    for (std::size_t k = 1; k < traj.size(); ++k) {
        CHECK(traj.snapshots[k].sup_norm() <= traj.snapshots[k - 1].sup_norm() + 1e-12);
    }
}

TEST_CASE("superlinear reaction triggers the blow-up guard") {
    const Grid g(1, 1.0, 16);
    ParabolicProblem prob{"blowup", g,
                          make_numeric_coefficients(
                              1, [](double, const Vec2&, double, const Vec2&) { return 1.0; },
                              [](double, const Vec2&, double) { return Vec2{0.0, 0.0}; },
                              [](double, const Vec2&, double u, const Vec2&) { return u * u; }),
                          [](const Vec2&) { return 1.0; },
                          {}};
    CHECK(kind_of([&] { (void)solve(prob, 2.0, {}); }) == ErrorKind::BlowUp);
}

TEST_CASE("output times are hit exactly and store_every thins snapshots") {
    const Grid g(1, 1.0, 32);
    const auto prob = heat_problem(g, 1.0, [](const Vec2& x) { return std::sin(kTwoPi * x[0]); });
    const std::vector<double> outs = {0.0123, 0.05};
    const Trajectory traj = solve(prob, 0.1, {}, outs);
    CHECK_NOTHROW((void)traj.at(0.0123));
    CHECK_NOTHROW((void)traj.at(0.05));
    CHECK(traj.final_time() == 0.1);
    CHECK(kind_of([&] { (void)traj.at(0.0124); }) == ErrorKind::RangeError);

    const double dt = stable_dt(g, 1.0, {});
    const long steps = static_cast<long>(std::ceil(0.1 / dt));
    const Trajectory all = solve(prob, 0.1, {});
    CHECK(static_cast<long>(all.size()) == steps + 1);
    StepControl c;
    c.store_every = 4;
    const Trajectory thin = solve(prob, 0.1, c);
    CHECK(static_cast<long>(thin.size()) == 1 + steps / 4 + (steps % 4 != 0 ? 1 : 0));
    CHECK(oracle::max_diff(thin.final_state(), all.final_state()) == 0.0);
}

TEST_CASE("linear solver reproduces closed-form solutions") {
    const Grid g(1, 1.0, 64);
    const double T = 0.2;

    SUBCASE("pure diffusion of a mode") {
        const SliceSchedule s(constant_coeffs(g, 1.0, 0.0, 0.0));
        const auto z0 = ScalarField::sample(g, [](const Vec2& x) { return std::sin(kTwoPi * x[0]); });
        const Trajectory z = solve_linear(s, z0, T, {});
        // exact semi-discrete decay rate of the three-point stencil
        const double dx = g.spacing();
        const double lam = 4.0 / (dx * dx) * std::pow(std::sin(std::numbers::pi * dx), 2);
        CHECK(oracle::max_diff(z.final_state(), std::exp(-lam * T) * z0) < 1e-10);
    }
    SUBCASE("constant source") {
        const SliceSchedule s(constant_coeffs(g, 1.0, 0.0, 0.75));
        const Trajectory z = solve_linear(s, ScalarField(g, 0.0), T, {});
        CHECK(oracle::max_diff(z.final_state(), ScalarField(g, 0.75 * T)) < 1e-12);
    }
    SUBCASE("constant growth") {
        const SliceSchedule s(constant_coeffs(g, 1.0, -1.3, 0.0));
        const Trajectory z = solve_linear(s, ScalarField(g, 2.0), T, {});
        CHECK(oracle::max_diff(z.final_state(), ScalarField(g, 2.0 * std::exp(-1.3 * T))) < 1e-12);
    }
}

TEST_CASE("linear solver is linear in the initial data") {
    const Grid g(2, 1.0, 16);
    std::mt19937_64 rng(17);
    LinearizedCoefficients c(g);
    c.alpha = oracle::random_field(g, rng, 0.5, 1.5);
    c.beta.components[0] = oracle::random_field(g, rng);
    c.beta.components[1] = oracle::random_field(g, rng);
    c.gamma = oracle::random_field(g, rng);
    const SliceSchedule s(c);
    const auto z1 = oracle::random_field(g, rng), z2 = oracle::random_field(g, rng);
    const auto a = solve_linear(s, z1 + 2.0 * z2, 0.05, {}).final_state();
    const auto b = solve_linear(s, z1, 0.05, {}).final_state() + 2.0 * solve_linear(s, z2, 0.05, {}).final_state();
    CHECK(oracle::max_diff(a, b) < 1e-10);
}

TEST_CASE("slice schedule interpolates linearly in time") {
    const Grid g(1, 1.0, 8);
    SliceSchedule s({0.0, 1.0}, {constant_coeffs(g, 1.0, 0.0, 0.0), constant_coeffs(g, 3.0, 2.0, -1.0)});
    LinearizedCoefficients out(g);
    s.evaluate(0.25, out);
    CHECK(out.alpha[0] == doctest::Approx(1.5));
    CHECK(out.gamma[3] == doctest::Approx(0.5));
    CHECK(out.sigma[7] == doctest::Approx(-0.25));
    s.evaluate(5.0, out);
    CHECK(out.alpha[0] == 3.0);
    CHECK(s.alpha_sup() == 3.0);
}

TEST_CASE("self-convergence order is about two for a nonlinear problem") {
    for (const char* id : {"nonlinear_diffusion", "full"}) {
        StepControl c;
        c.cfl_fraction = 0.25;
        std::vector<ScalarField> finals;
        for (int n : {32, 64, 128}) {
            const Grid g(1, kTwoPi, n);
            finals.push_back(solve(make_catalog_problem(id, g), 0.2, c).final_state());
        }
        const double order = self_convergence_order(finals[0], finals[1], finals[2]);
        INFO(id, " order ", order);
        CHECK(order >= 1.8);
        CHECK(order <= 2.2);
    }
}
