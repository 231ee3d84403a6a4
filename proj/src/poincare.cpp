#include "parastab/poincare.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>

#include "parastab/error.hpp"

namespace parastab {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Periodic linear interpolation of a 1D field at x.
double sample_1d(const ScalarField& f, double x) {
    const Grid& g = f.grid;
    const double s = x / g.spacing() - 0.5;
    const double fl = std::floor(s);
    const double w = s - fl;
    const int i = static_cast<int>(fl);
    return (1.0 - w) * f[g.index(i)] + w * f[g.index(i + 1)];
}

}  // namespace

double ball_radius_for_measure(int n, double measure) {
    if (!(measure > 0.0)) throw Error(ErrorKind::RangeError, "ball measure must be positive");
    if (n == 1) return 0.5 * measure;
    if (n == 2) return std::sqrt(measure / std::numbers::pi);
    throw Error(ErrorKind::DimMismatch, "dimension must be 1 or 2");
}

double poincare_ratio(const ScalarField& f, const Region& ball, std::optional<double> x0) {
    if (ball.empty()) throw Error(ErrorKind::EmptyRegion, "ball has no cells");
    const Grid& g = f.grid;
    if (!(g == ball.grid())) throw Error(ErrorKind::DimMismatch, "field and ball grids differ");
    const int n = g.dim();
    const double vol = g.cell_volume();
    const VectorField grad = gradient(f);

    double mass = 0.0, energy = 0.0;
    for (std::size_t i : ball.cells()) {
        mass += f[i] * f[i];
        for (const auto& c : grad.components) energy += c[i] * c[i];
    }
    mass *= vol;
    energy *= vol;

    double boundary = 0.0;
    if (n == 1) {
        const double v = sample_1d(f, x0.value_or(ball.anchor()[0]));
        boundary = v * v;
    } else {
        for (const BoundaryCell& b : ball.boundary()) boundary += f[b.index] * f[b.index] * b.exposed_faces;
        boundary *= g.spacing();
    }

    const double m = ball.measure();
    const double denom = std::pow(m, 2.0 / n) * energy + std::pow(m, 1.0 / n) * boundary;
    if (denom == 0.0) return 0.0;
    return mass / denom;
}

ScalarField poincare_test_function(const Region& ball, double radius, std::uint64_t seed, int index, int max_modes) {
    if (max_modes < 1) throw Error(ErrorKind::RangeError, "max_modes must be >= 1");
    const Grid& g = ball.grid();
    std::mt19937_64 rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(index))));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_int_distribution<int> count(1, max_modes);
    std::uniform_int_distribution<int> wave(-3, 3);

    struct Mode {
        double amp, kx, ky, phase;
    };
    const double offset = unit(rng);
    std::vector<Mode> modes(static_cast<std::size_t>(count(rng)));
    for (auto& m : modes) {
        m.amp = unit(rng);
        m.kx = wave(rng);
        m.ky = g.dim() == 2 ? wave(rng) : 0.0;
        m.phase = std::numbers::pi * unit(rng);
    }
    const Vec2 c = ball.anchor();
    const double L = g.extent();
    return ScalarField::sample(g, [&](const Vec2& x) {
        // minimal-image offset from the center, scaled to the unit ball
        double rel[2] = {0.0, 0.0};
        for (int d = 0; d < g.dim(); ++d) {
            double dx = x[static_cast<std::size_t>(d)] - c[static_cast<std::size_t>(d)];
            dx -= L * std::round(dx / L);
            rel[d] = dx / radius;
        }
        double v = offset;
        for (const auto& m : modes) v += m.amp * std::sin(std::numbers::pi * (m.kx * rel[0] + m.ky * rel[1]) + m.phase);
        return v;
    });
}

PoincareResult estimate_lambda0(int n, std::span<const double> ball_sizes, int test_functions, std::uint64_t seed,
                                const PoincareOptions& options) {
    if (n != 1 && n != 2) throw Error(ErrorKind::DimMismatch, "dimension must be 1 or 2");
    if (ball_sizes.empty()) throw Error(ErrorKind::EmptyList, "no ball sizes");
    if (test_functions < 1) throw Error(ErrorKind::RangeError, "need at least one test function");

    double largest = 0.0;
    for (double s : ball_sizes) largest = std::max(largest, ball_radius_for_measure(n, s));
    const double extent = options.extent > 0.0 ? options.extent : 8.0 * largest;
    const int cells = options.cells_per_axis > 0 ? options.cells_per_axis : (n == 1 ? 2048 : 256);
    const Grid grid(n, extent, cells);
    const Vec2 center{0.5 * extent, n == 2 ? 0.5 * extent : 0.0};

    PoincareResult out;
    out.n = n;
    for (double size : ball_sizes) {
        const double radius = ball_radius_for_measure(n, size);
        const Region ball = Region::ball(grid, center, radius);
        if (ball.empty()) throw Error(ErrorKind::EmptyRegion, "ball of measure " + std::to_string(size) + " has no cells");
        std::vector<double> ratios;
        for (int k = 0; k < test_functions; ++k) {
            const ScalarField f = options.constants_only
                                      ? ScalarField(grid, 1.0 + 0.5 * k)
                                      : poincare_test_function(ball, radius, seed, k, options.max_modes);
            ratios.push_back(poincare_ratio(f, ball));
        }
        const double m = *std::max_element(ratios.begin(), ratios.end());
        out.ball_measures.push_back(ball.measure());
        out.max_ratios.push_back(m);
        out.ratios.push_back(std::move(ratios));
        out.lambda0_estimate = std::max(out.lambda0_estimate, m);
    }
    return out;
}

std::string PoincareResult::to_csv() const {
    std::string out = "E_measure,max_ratio\n";
    char buf[128];
    for (std::size_t i = 0; i < ball_measures.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", ball_measures[i], max_ratios[i]);
        out += buf;
    }
    return out;
}

}  // namespace parastab
