#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "parastab/error.hpp"
#include "parastab/grid.hpp"

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

double laplacian_error_1d(int n) {
    const Grid g(1, 1.0, n);
    const auto u = ScalarField::sample(g, [](const Vec2& x) { return std::sin(kTwoPi * x[0]); });
    const auto lap = laplacian(u);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(lap[i] + kTwoPi * kTwoPi * u[i]));
    return err;
}

double laplacian_error_2d(int n) {
    const Grid g(2, 1.0, n);
    const auto u =
        ScalarField::sample(g, [](const Vec2& x) { return std::sin(kTwoPi * x[0]) * std::sin(kTwoPi * x[1]); });
    const auto lap = laplacian(u);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(lap[i] + 2 * kTwoPi * kTwoPi * u[i]));
    return err;
}

double gradient_error_1d(int n) {
    const Grid g(1, 1.0, n);
    const auto u = ScalarField::sample(g, [](const Vec2& x) { return std::sin(kTwoPi * x[0]); });
    const auto grad = gradient(u);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        err = std::max(err, std::abs(grad.components[0][i] - kTwoPi * std::cos(kTwoPi * g.center(i)[0])));
    }
    return err;
}

}  // namespace

TEST_CASE("grid construction validates its arguments") {
    CHECK(kind_of([] { Grid(3, 1.0, 16); }) == ErrorKind::RangeError);
    CHECK(kind_of([] { Grid(1, 1.0, 4); }) == ErrorKind::RangeError);
    CHECK(kind_of([] { Grid(1, 0.0, 16); }) == ErrorKind::RangeError);
    const Grid g(2, 2.0, 16);
    CHECK(g.spacing() == doctest::Approx(0.125));
    CHECK(g.size() == 256);
    CHECK(g.index(-1, 16) == g.index(15, 0));
    CHECK(g.center(g.index(0, 1))[1] == doctest::Approx(0.1875));
}

TEST_CASE("laplacian and gradient annihilate constants exactly") {
    for (int dim : {1, 2}) {
        const Grid g(dim, 3.0, 16);
        const ScalarField c(g, 2.75);
        const auto lap = laplacian(c);
        const auto grad = gradient(c);
        for (std::size_t i = 0; i < g.size(); ++i) {
            CHECK(lap[i] == 0.0);
            for (const auto& comp : grad.components) CHECK(comp[i] == 0.0);
        }
    }
}

TEST_CASE("laplacian of a Fourier mode converges at second order") {
    const double r1 = laplacian_error_1d(32) / laplacian_error_1d(64);
    const double r2 = laplacian_error_2d(32) / laplacian_error_2d(64);
    CHECK(r1 == doctest::Approx(4.0).epsilon(0.05));
    CHECK(r2 == doctest::Approx(4.0).epsilon(0.05));
    CHECK(std::log2(laplacian_error_1d(64) / laplacian_error_1d(128)) >= 1.8);
    CHECK(std::log2(laplacian_error_1d(64) / laplacian_error_1d(128)) <= 2.2);
}

TEST_CASE("gradient of a Fourier mode converges at second order") {
    const double order = std::log2(gradient_error_1d(32) / gradient_error_1d(64));
    CHECK(order >= 1.8);
    CHECK(order <= 2.2);
}

TEST_CASE("gradient of a sawtooth is exact away from the seam") {
    const Grid g(1, 2.0, 20);
    const auto u = ScalarField::sample(g, [](const Vec2& x) { return 3.0 * x[0]; });
    const auto grad = gradient(u);
    for (int i = 1; i < 19; ++i) CHECK(grad.components[0][static_cast<std::size_t>(i)] == doctest::Approx(3.0));
}

TEST_CASE("mixed second derivative of a product of modes") {
    const Grid g(2, 1.0, 64);
    const auto u =
        ScalarField::sample(g, [](const Vec2& x) { return std::sin(kTwoPi * x[0]) * std::sin(kTwoPi * x[1]); });
    const auto uxy = second_derivative(u, 0, 1);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Vec2 x = g.center(i);
        err = std::max(err, std::abs(uxy[i] - kTwoPi * kTwoPi * std::cos(kTwoPi * x[0]) * std::cos(kTwoPi * x[1])));
    }
    CHECK(err < 0.02 * kTwoPi * kTwoPi);
}

TEST_CASE("laplacian is symmetric on the torus") {
    std::mt19937_64 rng(7);
    for (int dim : {1, 2}) {
        const Grid g(dim, 1.5, 24);
        const auto u = oracle::random_field(g, rng);
        const auto v = oracle::random_field(g, rng);
        const auto lu = laplacian(u), lv = laplacian(v);
        double a = 0.0, b = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            a += u[i] * lv[i];
            b += v[i] * lu[i];
        }
        CHECK(std::abs(a - b) * g.cell_volume() < 1e-10);
    }
}

TEST_CASE("lp_norm of a constant is |c| |E|^(1/p)") {
    const Grid g(2, 2.0, 32);
    const Region e = Region::ball(g, {1.0, 1.0}, 0.6);
    const ScalarField c(g, -1.5);
    for (double p : {1.0, 1.5, 2.0, 3.0, 4.0}) {
        CHECK(lp_norm(c, e, p) == doctest::Approx(1.5 * std::pow(e.measure(), 1.0 / p)).epsilon(1e-12));
    }
    CHECK(lp_norm(c, e, kInf) == 1.5);
}

TEST_CASE("lp_norm at infinity picks out a spike") {
    const Grid g(1, 1.0, 16);
    ScalarField u(g, 0.1);
    u[5] = -7.0;
    CHECK(lp_norm(u, Region::full(g), kInf) == 7.0);
}

TEST_CASE("lp_norm matches brute-force re-summation") {
    std::mt19937_64 rng(11);
    for (int dim : {1, 2}) {
        const Grid g(dim, 3.0, 32);
        const Region e = Region::box(g, {0.2, 0.4}, {2.1, 2.5});
        for (int trial = 0; trial < 20; ++trial) {
            const auto u = oracle::random_field(g, rng);
            for (double p : {1.0, 2.0, 2.5, 4.0}) {
                const double ref = oracle::lp_sum(u, e, p);
                CHECK(std::abs(lp_norm(u, e, p) - ref) <= 1e-12 * std::max(1.0, ref));
            }
        }
    }
}

TEST_CASE("lp_norm is homogeneous and satisfies the triangle inequality") {
    std::mt19937_64 rng(13);
    const Grid g(2, 1.0, 16);
    const Region e = Region::ball(g, {0.5, 0.5}, 0.3);
    for (int trial = 0; trial < 50; ++trial) {
        const auto u = oracle::random_field(g, rng);
        const auto v = oracle::random_field(g, rng);
        for (double p : {1.0, 1.5, 2.0, 3.0, kInf}) {
            CHECK(lp_norm(-2.5 * u, e, p) == doctest::Approx(2.5 * lp_norm(u, e, p)).epsilon(1e-13));
            CHECK(lp_norm(u + v, e, p) <= lp_norm(u, e, p) + lp_norm(v, e, p) + 1e-14);
        }
    }
}

TEST_CASE("lp_norm rejects empty regions and p < 1") {
    const Grid g(1, 1.0, 16);
    const ScalarField u(g, 1.0);
    const Region empty = Region::from_mask(g, std::vector<bool>(16, false), {0.5, 0.0});
    CHECK(kind_of([&] { (void)lp_norm(u, empty, 2.0); }) == ErrorKind::EmptyRegion);
    CHECK(kind_of([&] { (void)lp_norm(u, Region::full(g), 0.5); }) == ErrorKind::BadP);
}

TEST_CASE("regions report measure and boundary cells") {
    const Grid g1(1, 4.0, 400);
    const Region b1 = Region::ball(g1, {2.0, 0.0}, 0.5);
    CHECK(b1.measure() == doctest::Approx(1.0).epsilon(1e-9));
    REQUIRE(b1.boundary().size() == 2);
    for (const auto& b : b1.boundary()) CHECK(b.exposed_faces == 1);
    CHECK(Region::full(g1).boundary().empty());

    const Grid g2(2, 4.0, 128);
    const Region b2 = Region::ball(g2, {2.0, 2.0}, 1.0);
    CHECK(b2.measure() == doctest::Approx(std::numbers::pi).epsilon(0.02));
    int faces = 0;
    for (const auto& b : b2.boundary()) faces += b.exposed_faces;
    // staircase perimeter of a lattice disk is 4/π times the circle's
    CHECK(faces * g2.spacing() == doctest::Approx(8.0).epsilon(0.03));
}

TEST_CASE("balls wrap around the torus") {
    const Grid g(1, 1.0, 100);
    const Region b = Region::ball(g, {0.0, 0.0}, 0.1);
    CHECK(b.contains(0));
    CHECK(b.contains(99));
    CHECK(b.measure() == doctest::Approx(0.2).epsilon(1e-9));
}

TEST_CASE("cell-average restriction") {
    const Grid coarse(2, 1.0, 16);
    const Grid fine = coarse.refined(2);
    std::mt19937_64 rng(3);
    const auto f = oracle::random_field(fine, rng);
    const auto r = restrict_to(f, coarse);
    // restriction preserves the integral
    double sf = 0.0, sr = 0.0;
    for (double v : f.values) sf += v * fine.cell_volume();
    for (double v : r.values) sr += v * coarse.cell_volume();
    CHECK(sf == doctest::Approx(sr).epsilon(1e-12));
    CHECK(kind_of([&] { (void)restrict_to(f, Grid(2, 1.0, 8)); }) == ErrorKind::DimMismatch);
}
