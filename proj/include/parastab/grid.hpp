#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace parastab {

/// Spatial point / small vector. Only the first `dim` entries are meaningful;
/// unused entries stay zero.
using Vec2 = std::array<double, 2>;

/// Symbolic p = infinity for `lp_norm`.
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Cell-centered periodic grid on [0, L)^dim, dim in {1, 2}.
class Grid {
public:
    Grid(int dim, double extent, int cells_per_axis);

    int dim() const noexcept { return dim_; }
    double extent() const noexcept { return extent_; }
    int cells_per_axis() const noexcept { return n_; }
    double spacing() const noexcept { return dx_; }
    /// dx^dim, the midpoint-quadrature weight of one cell.
    double cell_volume() const noexcept { return cell_volume_; }
    std::size_t size() const noexcept { return size_; }

    int wrap(int i) const noexcept {
        const int r = i % n_;
        return r < 0 ? r + n_ : r;
    }
    /// Linear index of (i, j) with periodic wrap; j ignored in 1D.
    std::size_t index(int i, int j = 0) const noexcept {
        return dim_ == 1 ? static_cast<std::size_t>(wrap(i))
                         : static_cast<std::size_t>(wrap(i)) +
                               static_cast<std::size_t>(n_) * static_cast<std::size_t>(wrap(j));
    }
    std::array<int, 2> coords(std::size_t idx) const noexcept {
        if (dim_ == 1) return {static_cast<int>(idx), 0};
        return {static_cast<int>(idx % static_cast<std::size_t>(n_)),
                static_cast<int>(idx / static_cast<std::size_t>(n_))};
    }
    Vec2 center(std::size_t idx) const noexcept;

    /// Same grid with every axis refined by `factor`.
    Grid refined(int factor) const { return Grid(dim_, extent_, n_ * factor); }

    bool operator==(const Grid& other) const noexcept {
        return dim_ == other.dim_ && n_ == other.n_ && extent_ == other.extent_;
    }

private:
    int dim_;
    double extent_;
    int n_;
    double dx_;
    double cell_volume_;
    std::size_t size_;
};

struct ScalarField {
    Grid grid;
    std::vector<double> values;

    explicit ScalarField(const Grid& g) : grid(g), values(g.size(), 0.0) {}
    ScalarField(const Grid& g, std::vector<double> v);
    ScalarField(const Grid& g, double constant) : grid(g), values(g.size(), constant) {}

    static ScalarField sample(const Grid& g, const std::function<double(const Vec2&)>& fn);

    std::size_t size() const noexcept { return values.size(); }
    double& operator[](std::size_t i) noexcept { return values[i]; }
    double operator[](std::size_t i) const noexcept { return values[i]; }

    bool all_finite() const noexcept;
    double sup_norm() const noexcept;
};

ScalarField operator+(const ScalarField& lhs, const ScalarField& rhs);
ScalarField operator-(const ScalarField& lhs, const ScalarField& rhs);
ScalarField operator*(double scale, const ScalarField& field);

struct VectorField {
    Grid grid;
    std::vector<ScalarField> components;

    explicit VectorField(const Grid& g) : grid(g), components(static_cast<std::size_t>(g.dim()), ScalarField(g)) {}

    /// Components at one cell, packed into a Vec2.
    Vec2 at(std::size_t idx) const noexcept {
        Vec2 v{0.0, 0.0};
        for (std::size_t d = 0; d < components.size(); ++d) v[d] = components[d][idx];
        return v;
    }
};

/// Boundary cell of a region: a member cell with `exposed_faces` neighbors outside.
struct BoundaryCell {
    std::size_t index;
    int exposed_faces;
};

/// Subdomain E of the grid: a cell mask with its measure and boundary cells.
class Region {
public:
    static Region full(const Grid& grid);
    /// Cells whose centers lie within `radius` (periodic minimal-image distance) of `center`.
    static Region ball(const Grid& grid, const Vec2& center, double radius);
    /// Cells whose centers lie in the axis-aligned box [lo, hi] (no wrap).
    static Region box(const Grid& grid, const Vec2& lo, const Vec2& hi);
    static Region from_mask(const Grid& grid, const std::vector<bool>& mask, const Vec2& anchor);

    const Grid& grid() const noexcept { return grid_; }
    std::span<const std::size_t> cells() const noexcept { return cells_; }
    std::span<const BoundaryCell> boundary() const noexcept { return boundary_; }
    bool contains(std::size_t idx) const noexcept { return mask_[idx]; }
    bool empty() const noexcept { return cells_.empty(); }
    /// |E| = cell count * dx^dim.
    double measure() const noexcept { return measure_; }
    /// Ball center, box center, or torus center for the full region.
    const Vec2& anchor() const noexcept { return anchor_; }

private:
    Region(const Grid& grid, std::vector<bool> mask, const Vec2& anchor);

    Grid grid_;
    std::vector<bool> mask_;
    std::vector<std::size_t> cells_;
    std::vector<BoundaryCell> boundary_;
    double measure_;
    Vec2 anchor_;
};

/// Five-point (2D) / three-point (1D) central Laplacian with periodic wrap.
ScalarField laplacian(const ScalarField& u);
/// Second-order central differences per axis.
VectorField gradient(const ScalarField& u);
/// Allocation-free variants; `out` must live on u's grid.
void laplacian_into(const ScalarField& u, ScalarField& out);
void gradient_into(const ScalarField& u, VectorField& out);
/// Discrete d^2u/dx_i dx_j; the diagonal uses the three-point stencil.
ScalarField second_derivative(const ScalarField& u, int axis_i, int axis_j);

/// (sum over E of |u|^p dx^dim)^(1/p); p = kInf gives the max over E.
/// Throws EmptyRegion for an empty E and BadP for p < 1.
double lp_norm(const ScalarField& u, const Region& region, double p);

/// Cell-average restriction from a grid refined by 2 onto `coarse`.
ScalarField restrict_to(const ScalarField& fine, const Grid& coarse);

}  // namespace parastab
