#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "parastab/grid.hpp"
#include "parastab/trajectory.hpp"

namespace parastab {

/// Coefficients of u_t = a(t,x,u,q) Δu + Div_x f(t,x,u) + h(t,x,u,q) together with
/// the partial derivatives the linearized equation needs. `q` is the slot where ∇u sits.
///
/// Implementations must be pure and reentrant.
class CoefficientSet {
public:
    virtual ~CoefficientSet() = default;

    virtual int dim() const = 0;

    virtual double a(double t, const Vec2& x, double u, const Vec2& q) const = 0;
    virtual Vec2 f(double t, const Vec2& x, double u) const = 0;
    virtual double h(double t, const Vec2& x, double u, const Vec2& q) const = 0;

    virtual double a_u(double t, const Vec2& x, double u, const Vec2& q) const = 0;
    virtual Vec2 a_q(double t, const Vec2& x, double u, const Vec2& q) const = 0;
    /// Σ_j ∂f_j/∂x_j at fixed u.
    virtual double div_x_f(double t, const Vec2& x, double u) const = 0;
    virtual Vec2 f_u(double t, const Vec2& x, double u) const = 0;
    virtual Vec2 f_uu(double t, const Vec2& x, double u) const = 0;
    /// Σ_j ∂²f_j/∂x_j∂u.
    virtual double div_x_f_u(double t, const Vec2& x, double u) const = 0;
    virtual double h_u(double t, const Vec2& x, double u, const Vec2& q) const = 0;
    virtual Vec2 h_q(double t, const Vec2& x, double u, const Vec2& q) const = 0;
};

using CoefficientPtr = std::shared_ptr<const CoefficientSet>;

/// Hypothesis constants (declared) and solution bounds (measured).
struct FieldBounds {
    double a_star = 1.0;
    double a_sup = 1.0;
    double k1 = 1.0;
    double k2 = 1.0;
    double k3 = 1.0;
    double K1 = 0.0;
    double K2 = 0.0;
    double K3 = 0.0;
};

struct ParabolicProblem {
    std::string name;
    Grid grid;
    CoefficientPtr coeffs;
    std::function<double(const Vec2&)> initial;
    FieldBounds bounds;

    ScalarField initial_field() const { return ScalarField::sample(grid, initial); }
};

/// Box [0,T] x E x [-u_max, u_max] (R), optionally x [-q_max, q_max]^n (R0).
struct SampleBox {
    double t_end;
    Region region;
    double u_max;
    std::optional<double> q_max;
};

/// The four sup-norm coefficient differences driving the stability estimate.
struct CoeffDiffs {
    double a = 0.0;     ///< ‖a − b‖ over R0
    double div_f = 0.0; ///< ‖∇_x·f − ∇_x·g‖ over R
    double f_u = 0.0;   ///< ‖f_u − g_u‖ (vector max-norm) over R
    double h = 0.0;     ///< ‖h − k‖ over R0

    double sum() const noexcept { return a + div_f + f_u + h; }
};

/// Sup-norm estimates by deterministic Halton sampling of the boxes. The a- and
/// h-terms use `r0` (gradient slot sampled), the f-terms use `r`.
CoeffDiffs sup_coeff_diffs(const ParabolicProblem& p, const ParabolicProblem& q, const SampleBox& r,
                           const SampleBox& r0, int samples = 4096);

/// K1 = sup|u|, K2 = max_i sup|∂_i u|, K3 = max_ij sup|∂_ij u| over all snapshots,
/// using the discrete stencils. Declared constants are copied from the problem.
FieldBounds measure_bounds(const ParabolicProblem& problem, const Trajectory& trajectory);

/// Discrete C² norm max(sup|φ|, max_i sup|∂_iφ|, max_ij sup|∂_ijφ|) of a field.
double discrete_c2_norm(const ScalarField& field);

/// Analytic partials versus central differences of the base functions.
struct DerivativeCheck {
    double max_error = 0.0;  ///< max of |analytic − fd| / max(1, |analytic|)
    std::string worst_term;
    bool passed(double tolerance = 1e-5) const noexcept { return max_error <= tolerance; }
};

/// Probes `samples` Halton points of [0,t_end] x [0,L)^n x [-u_max,u_max] x [-q_max,q_max]^n.
DerivativeCheck check_derivatives(const CoefficientSet& coeffs, double extent, double t_end, double u_max,
                                  double q_max, int samples = 100);

/// Minimum and maximum of a over the sampled box.
std::pair<double, double> diffusion_range(const CoefficientSet& coeffs, double extent, double t_end,
                                          double u_max, double q_max, int samples = 1000);

/// Throws HypothesisViolation when derivative consistency, ellipticity or the
/// declared C² bound of the initial data fail on the sampled box.
void check_hypotheses(const ParabolicProblem& problem, double t_end, double u_max, double q_max);

// ---------------------------------------------------------------------------
// Catalog

/// amp * sin(2π (kx x + ky y) / L + phase)
struct FourierMode {
    double amp = 1.0;
    double kx = 1.0;
    double ky = 0.0;
    double phase = 0.0;
};

/// amp * exp(-|x - c|² / (2 width²)), periodic minimal-image distance.
struct Bump {
    double amp = 1.0;
    Vec2 center{0.0, 0.0};
    double width = 0.5;
};

/// Parameters of the built-in coefficient family, with S(x) = sin(2π x₁/L),
/// s(r) = r / (1 + r):
///
///   a   = a0 + ax S(x) + au sin(u) + aq s(|q|²)
///   f_j = fv_j u + fw_j (1 − cos u) + fs_j sin(2π x_j/L) sin(u)
///   h   = h0 + hx S(x) + hu sin(u) + hq s(|q|²) + ht sin(t)
///   φ   = offset + Σ modes + Σ bumps
struct CatalogParams {
    double a0 = 1.0;
    double ax = 0.0;
    double au = 0.0;
    double aq = 0.0;
    Vec2 fv{0.0, 0.0};
    Vec2 fw{0.0, 0.0};
    Vec2 fs{0.0, 0.0};
    double h0 = 0.0;
    double hx = 0.0;
    double hu = 0.0;
    double hq = 0.0;
    double ht = 0.0;
    double offset = 0.0;
    std::vector<FourierMode> modes;
    std::vector<Bump> bumps;

    /// Scalar parameter by name ("a0", "fv_x", ...). Throws RangeError for unknown names.
    void set(std::string_view key, double value);
    double get(std::string_view key) const;
    static const std::vector<std::string>& scalar_keys();
};

/// Identifiers accepted by `catalog_defaults` / `make_catalog_problem`.
const std::vector<std::string>& catalog_ids();
/// Preset parameters for a catalog id on a grid of dimension `dim`. Throws UnknownCatalogId.
CatalogParams catalog_defaults(std::string_view id, int dim);

/// Builds the analytic coefficient set and initial data, with declared bounds.
ParabolicProblem make_catalog_problem(const std::string& name, const Grid& grid, const CatalogParams& params);
ParabolicProblem make_catalog_problem(std::string_view id, const Grid& grid);

CoefficientPtr make_catalog_coefficients(int dim, double extent, const CatalogParams& params);

/// Coefficient set from plain functions; partials by central differences.
CoefficientPtr make_numeric_coefficients(
    int dim, std::function<double(double, const Vec2&, double, const Vec2&)> a,
    std::function<Vec2(double, const Vec2&, double)> f,
    std::function<double(double, const Vec2&, double, const Vec2&)> h);

/// Radical-inverse (Halton) coordinate of `index` in `base`.
double halton(std::uint64_t index, std::uint32_t base);

}  // namespace parastab
