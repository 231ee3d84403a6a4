#include "parastab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "parastab/error.hpp"

namespace parastab {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::EmptyRegion: return "EmptyRegion";
        case ErrorKind::NonFinite: return "NonFinite";
        case ErrorKind::BlowUp: return "BlowUp";
        case ErrorKind::DimMismatch: return "DimMismatch";
        case ErrorKind::BadP: return "BadP";
        case ErrorKind::HypothesisViolation: return "HypothesisViolation";
        case ErrorKind::EmptyList: return "EmptyList";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::UnknownCatalogId: return "UnknownCatalogId";
        case ErrorKind::RangeError: return "RangeError";
    }
    return "Unknown";
}

Grid::Grid(int dim, double extent, int cells_per_axis)
    : dim_(dim), extent_(extent), n_(cells_per_axis) {
    if (dim != 1 && dim != 2) throw Error(ErrorKind::RangeError, "grid dim must be 1 or 2, got " + std::to_string(dim));
    if (cells_per_axis < 8) throw Error(ErrorKind::RangeError, "grid needs at least 8 cells per axis");
    if (!(extent > 0.0) || !std::isfinite(extent)) throw Error(ErrorKind::RangeError, "grid extent must be positive");
    dx_ = extent_ / n_;
    cell_volume_ = dim_ == 1 ? dx_ : dx_ * dx_;
    size_ = dim_ == 1 ? static_cast<std::size_t>(n_) : static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_);
}

Vec2 Grid::center(std::size_t idx) const noexcept {
    const auto c = coords(idx);
    Vec2 x{(c[0] + 0.5) * dx_, 0.0};
    if (dim_ == 2) x[1] = (c[1] + 0.5) * dx_;
    return x;
}

ScalarField::ScalarField(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size()) throw Error(ErrorKind::DimMismatch, "field size does not match grid");
}

ScalarField ScalarField::sample(const Grid& g, const std::function<double(const Vec2&)>& fn) {
    ScalarField out(g);
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = fn(g.center(i));
    return out;
}

bool ScalarField::all_finite() const noexcept {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

double ScalarField::sup_norm() const noexcept {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

namespace {

void require_same_grid(const ScalarField& a, const ScalarField& b) {
    if (!(a.grid == b.grid)) throw Error(ErrorKind::DimMismatch, "fields live on different grids");
}

}  // namespace

ScalarField operator+(const ScalarField& lhs, const ScalarField& rhs) {
    require_same_grid(lhs, rhs);
    ScalarField out(lhs.grid);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = lhs[i] + rhs[i];
    return out;
}

ScalarField operator-(const ScalarField& lhs, const ScalarField& rhs) {
    require_same_grid(lhs, rhs);
    ScalarField out(lhs.grid);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = lhs[i] - rhs[i];
    return out;
}

ScalarField operator*(double scale, const ScalarField& field) {
    ScalarField out(field.grid);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = scale * field[i];
    return out;
}

// ---------------------------------------------------------------------------
// Regions

Region::Region(const Grid& grid, std::vector<bool> mask, const Vec2& anchor)
    : grid_(grid), mask_(std::move(mask)), anchor_(anchor) {
    for (std::size_t idx = 0; idx < grid_.size(); ++idx) {
        if (!mask_[idx]) continue;
        cells_.push_back(idx);
        const auto c = grid_.coords(idx);
        int exposed = 0;
        for (int d = 0; d < grid_.dim(); ++d) {
            for (int s : {-1, 1}) {
                int i = c[0], j = c[1];
                (d == 0 ? i : j) += s;
                if (!mask_[grid_.index(i, j)]) ++exposed;
            }
        }
        if (exposed > 0) boundary_.push_back({idx, exposed});
    }
    measure_ = static_cast<double>(cells_.size()) * grid_.cell_volume();
}

Region Region::full(const Grid& grid) {
    const double half = 0.5 * grid.extent();
    return Region(grid, std::vector<bool>(grid.size(), true), Vec2{half, grid.dim() == 2 ? half : 0.0});
}

Region Region::ball(const Grid& grid, const Vec2& center, double radius) {
    if (!(radius > 0.0)) throw Error(ErrorKind::RangeError, "ball radius must be positive");
    const double L = grid.extent();
    std::vector<bool> mask(grid.size(), false);
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
        const Vec2 x = grid.center(idx);
        double r2 = 0.0;
        for (int d = 0; d < grid.dim(); ++d) {
            double delta = x[d] - center[d];
            delta -= L * std::round(delta / L);
            r2 += delta * delta;
        }
        mask[idx] = r2 <= radius * radius;
    }
    return Region(grid, std::move(mask), center);
}

Region Region::box(const Grid& grid, const Vec2& lo, const Vec2& hi) {
    std::vector<bool> mask(grid.size(), false);
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
        const Vec2 x = grid.center(idx);
        bool inside = true;
        for (int d = 0; d < grid.dim(); ++d) inside = inside && x[d] >= lo[d] && x[d] <= hi[d];
        mask[idx] = inside;
    }
    Vec2 mid{0.5 * (lo[0] + hi[0]), grid.dim() == 2 ? 0.5 * (lo[1] + hi[1]) : 0.0};
    return Region(grid, std::move(mask), mid);
}

Region Region::from_mask(const Grid& grid, const std::vector<bool>& mask, const Vec2& anchor) {
    if (mask.size() != grid.size()) throw Error(ErrorKind::DimMismatch, "mask size does not match grid");
    return Region(grid, mask, anchor);
}

// ---------------------------------------------------------------------------
// Stencils

ScalarField laplacian(const ScalarField& u) {
    ScalarField out(u.grid);
    laplacian_into(u, out);
    return out;
}

VectorField gradient(const ScalarField& u) {
    VectorField out(u.grid);
    gradient_into(u, out);
    return out;
}

void laplacian_into(const ScalarField& u, ScalarField& out) {
    const Grid& g = u.grid;
    const double inv = 1.0 / (g.spacing() * g.spacing());
    const int n = g.cells_per_axis();
    if (g.dim() == 1) {
        for (int i = 0; i < n; ++i) {
            out[static_cast<std::size_t>(i)] =
                (u[g.index(i - 1)] - 2.0 * u[g.index(i)] + u[g.index(i + 1)]) * inv;
        }
    } else {
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                out[g.index(i, j)] = (u[g.index(i - 1, j)] + u[g.index(i + 1, j)] + u[g.index(i, j - 1)] +
                                      u[g.index(i, j + 1)] - 4.0 * u[g.index(i, j)]) *
                                     inv;
            }
        }
    }
}

void gradient_into(const ScalarField& u, VectorField& out) {
    const Grid& g = u.grid;
    const double inv = 0.5 / g.spacing();
    const int n = g.cells_per_axis();
    if (g.dim() == 1) {
        for (int i = 0; i < n; ++i) {
            out.components[0][static_cast<std::size_t>(i)] = (u[g.index(i + 1)] - u[g.index(i - 1)]) * inv;
        }
    } else {
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                const std::size_t idx = g.index(i, j);
                out.components[0][idx] = (u[g.index(i + 1, j)] - u[g.index(i - 1, j)]) * inv;
                out.components[1][idx] = (u[g.index(i, j + 1)] - u[g.index(i, j - 1)]) * inv;
            }
        }
    }
}

ScalarField second_derivative(const ScalarField& u, int axis_i, int axis_j) {
    const Grid& g = u.grid;
    if (axis_i < 0 || axis_j < 0 || axis_i >= g.dim() || axis_j >= g.dim()) {
        throw Error(ErrorKind::RangeError, "derivative axis out of range");
    }
    const double dx = g.spacing();
    ScalarField out(g);
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        const auto c = g.coords(idx);
        auto at = [&](int di, int dj) { return u[g.index(c[0] + di, c[1] + dj)]; };
        auto shift = [](int axis, int s) { return axis == 0 ? std::array<int, 2>{s, 0} : std::array<int, 2>{0, s}; };
        if (axis_i == axis_j) {
            const auto p = shift(axis_i, 1);
            const auto m = shift(axis_i, -1);
            out[idx] = (at(p[0], p[1]) - 2.0 * u[idx] + at(m[0], m[1])) / (dx * dx);
        } else {
            out[idx] = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * dx * dx);
        }
    }
    return out;
}

double lp_norm(const ScalarField& u, const Region& region, double p) {
    if (region.empty()) throw Error(ErrorKind::EmptyRegion, "L^p norm over an empty region");
    if (!(p >= 1.0)) throw Error(ErrorKind::BadP, "p must be >= 1");
    if (!(u.grid == region.grid())) throw Error(ErrorKind::DimMismatch, "region and field grids differ");
    if (std::isinf(p)) {
        double m = 0.0;
        for (std::size_t idx : region.cells()) m = std::max(m, std::abs(u[idx]));
        return m;
    }
    double sum = 0.0;
    if (p == 1.0) {
        for (std::size_t idx : region.cells()) sum += std::abs(u[idx]);
        return sum * u.grid.cell_volume();
    }
    if (p == 2.0) {
        for (std::size_t idx : region.cells()) sum += u[idx] * u[idx];
        return std::sqrt(sum * u.grid.cell_volume());
    }
    for (std::size_t idx : region.cells()) sum += std::pow(std::abs(u[idx]), p);
    return std::pow(sum * u.grid.cell_volume(), 1.0 / p);
}

ScalarField restrict_to(const ScalarField& fine, const Grid& coarse) {
    const Grid& g = fine.grid;
    if (g.dim() != coarse.dim() || g.cells_per_axis() != 2 * coarse.cells_per_axis() ||
        g.extent() != coarse.extent()) {
        throw Error(ErrorKind::DimMismatch, "restriction needs a grid refined by exactly 2");
    }
    ScalarField out(coarse);
    for (std::size_t idx = 0; idx < coarse.size(); ++idx) {
        const auto c = coarse.coords(idx);
        if (coarse.dim() == 1) {
            out[idx] = 0.5 * (fine[g.index(2 * c[0])] + fine[g.index(2 * c[0] + 1)]);
        } else {
            out[idx] = 0.25 * (fine[g.index(2 * c[0], 2 * c[1])] + fine[g.index(2 * c[0] + 1, 2 * c[1])] +
                               fine[g.index(2 * c[0], 2 * c[1] + 1)] + fine[g.index(2 * c[0] + 1, 2 * c[1] + 1)]);
        }
    }
    return out;
}

}  // namespace parastab
