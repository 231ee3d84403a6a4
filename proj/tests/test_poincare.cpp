#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "parastab/error.hpp"
#include "parastab/poincare.hpp"

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

double max_of(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }
double min_of(const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); }

}  // namespace

TEST_CASE("ratio of a constant is one and of zero is zero") {
    for (int dim : {1, 2}) {
        const Grid g(dim, 4.0, dim == 1 ? 400 : 100);
        const Region b = Region::ball(g, {2.0, 2.0}, 1.0);
        if (dim == 1) CHECK(poincare_ratio(ScalarField(g, -3.0), b) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(poincare_ratio(ScalarField(g, 0.0), b) == 0.0);
    }
}

TEST_CASE("ratio of a full-period sine on the unit interval") {
    const Grid g(1, 1.0, 1024);
    const Region b = Region::ball(g, {0.5, 0.0}, 0.5);
    REQUIRE(b.measure() == doctest::Approx(1.0));
    const auto f = ScalarField::sample(g, [](const Vec2& x) { return std::sin(kTwoPi * x[0]); });
    // f(x0) = 0 at the center, so the ratio is ∫f² / ∫f'² = 1/(4π²)
    CHECK(poincare_ratio(f, b) == doctest::Approx(1.0 / (kTwoPi * kTwoPi)).epsilon(1e-4));
    // moving x0 to a crest adds the boundary term
    CHECK(poincare_ratio(f, b, 0.25) < poincare_ratio(f, b));
}

TEST_CASE("empty balls are rejected") {
    const Grid g(1, 1.0, 16);
    const Region empty = Region::from_mask(g, std::vector<bool>(16, false), {0.5, 0.0});
    CHECK(kind_of([&] { (void)poincare_ratio(ScalarField(g, 1.0), empty); }) == ErrorKind::EmptyRegion);
}

TEST_CASE("ball radius for a measure") {
    CHECK(ball_radius_for_measure(1, 3.0) == doctest::Approx(1.5));
    CHECK(ball_radius_for_measure(2, std::numbers::pi * 4.0) == doctest::Approx(2.0));
}

TEST_CASE("constants-only estimate is one in 1D") {
    const double sizes[] = {0.5, 2.0, 5.0};
    const PoincareResult r = estimate_lambda0(1, sizes, 3, 1, {.constants_only = true});
    CHECK(r.lambda0_estimate == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto& row : r.ratios) {
        for (double v : row) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("lambda0 dominates every sampled ratio and per-size maxima agree within a factor of 3") {
    for (int n : {1, 2}) {
        const std::vector<double> sizes = {0.5, 1.0, 2.0, 5.0};
        const PoincareResult r = estimate_lambda0(n, sizes, 24, 42);
        REQUIRE(r.max_ratios.size() == sizes.size());
        for (const auto& row : r.ratios) {
            for (double v : row) {
                CHECK(v >= 0.0);
                CHECK(v <= r.lambda0_estimate);
            }
        }
        CHECK(max_of(r.max_ratios) / min_of(r.max_ratios) <= 3.0);
        CHECK(std::isfinite(r.lambda0_estimate));
        CHECK(r.lambda0_estimate > 0.0);
    }
}

TEST_CASE("lambda0 estimate is stable when the test family doubles") {
    const std::vector<double> sizes = {0.5, 5.0};
    const double a = estimate_lambda0(1, sizes, 16, 7).lambda0_estimate;
    const double b = estimate_lambda0(1, sizes, 32, 7).lambda0_estimate;
    CHECK(b >= a);
    CHECK(b <= 1.25 * a);
}

TEST_CASE("ratio is invariant under rescaling of the ball") {
    auto profile = [](double y) { return 0.3 + std::sin(1.7 * y) + 0.4 * std::cos(3.1 * y + 0.2); };
    auto ratio_at_scale = [&](int n, double s) {
        const double L = 8.0 * s;
        const Grid g(n, L, n == 1 ? 4096 : 256);
        const Vec2 c{L / 2, L / 2};
        const Region b = Region::ball(g, c, s);
        const auto f = ScalarField::sample(g, [&](const Vec2& x) {
            double v = profile((x[0] - c[0]) / s);
            if (n == 2) v *= std::cos(0.9 * (x[1] - c[1]) / s);
            return v;
        });
        return poincare_ratio(f, b);
    };
    for (int n : {1, 2}) {
        const double base = ratio_at_scale(n, 1.0);
        for (double s : {0.5, 2.0}) CHECK(ratio_at_scale(n, s) == doctest::Approx(base).epsilon(n == 1 ? 1e-3 : 0.02));
    }
}

TEST_CASE("estimates are deterministic for a fixed seed") {
    const double sizes[] = {1.0, 3.0};
    const PoincareResult a = estimate_lambda0(2, sizes, 6, 99);
    const PoincareResult b = estimate_lambda0(2, sizes, 6, 99);
    CHECK(a.ratios == b.ratios);
    CHECK(a.to_csv() == b.to_csv());
    CHECK(a.to_csv().rfind("E_measure,max_ratio\n", 0) == 0);
    const PoincareResult c = estimate_lambda0(2, sizes, 6, 100);
    CHECK(a.ratios != c.ratios);
}
