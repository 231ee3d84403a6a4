#pragma once

#include <cstddef>
#include <vector>

#include "parastab/grid.hpp"

namespace parastab {

/// Time-indexed discrete solution on one grid. times[0] == 0 and times are increasing.
struct Trajectory {
    Grid grid;
    std::vector<double> times;
    std::vector<ScalarField> snapshots;

    explicit Trajectory(const Grid& g) : grid(g) {}

    std::size_t size() const noexcept { return times.size(); }
    double final_time() const { return times.back(); }
    const ScalarField& final_state() const { return snapshots.back(); }

    /// Snapshot whose time matches `t` to a relative 1e-9, or throws RangeError.
    const ScalarField& at(double t) const;
    /// Linear interpolation between the bracketing snapshots.
    ScalarField interpolate(double t) const;
    /// Index k with times[k] <= t <= times[k+1] (clamped to the valid range).
    std::size_t bracket(double t) const;
};

}  // namespace parastab
