#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "parastab/grid.hpp"

namespace parastab {

/// ∫_B f² / (|B|^{2/n} ∫_B |∇f|² + |B|^{1/n} ∫_{∂B} f²), all integrals discrete.
///
/// In 1D the boundary term is |f(x₀)|², with f linearly interpolated at `x0`
/// (default: the ball anchor). In 2D it is Σ f² · exposed faces · dx over the boundary
/// cells. Returns 0 for f ≡ 0 on B. Throws EmptyRegion.
double poincare_ratio(const ScalarField& f, const Region& ball, std::optional<double> x0 = std::nullopt);

struct PoincareOptions {
    int cells_per_axis = 0;  ///< 0 picks 2048 in 1D and 256 in 2D
    double extent = 0.0;     ///< 0 picks 4 × the largest ball diameter
    int max_modes = 8;
    bool constants_only = false;
};

struct PoincareResult {
    int n = 1;
    std::vector<double> ball_measures;       ///< discrete |B| per requested size
    std::vector<std::vector<double>> ratios;  ///< ratios[ball][function]
    std::vector<double> max_ratios;          ///< per-ball maxima
    double lambda0_estimate = 0.0;

    /// "E_measure,max_ratio" rows with header.
    std::string to_csv() const;
};

/// Random band-limited test function number `index`, in coordinates relative to the ball
/// (center c, radius r): offset + Σ_k amp_k sin(π κ_k·(x − c)/r + phase_k), ≤ max_modes terms.
ScalarField poincare_test_function(const Region& ball, double radius, std::uint64_t seed, int index, int max_modes);

/// Ratios for every (ball of measure in `ball_sizes`, test function). Balls are centered
/// on one shared grid, so the discretization differs across sizes.
PoincareResult estimate_lambda0(int n, std::span<const double> ball_sizes, int test_functions, std::uint64_t seed,
                                const PoincareOptions& options = {});

/// Radius of the n-ball of measure `measure` (half-length in 1D).
double ball_radius_for_measure(int n, double measure);

}  // namespace parastab
