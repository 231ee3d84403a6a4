#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "parastab/error.hpp"
#include "parastab/problems.hpp"

namespace parastab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// s(r) = r / (1 + r) evaluated at r = |q|², and its q-gradient.
double saturate(const Vec2& q) {
    const double r = q[0] * q[0] + q[1] * q[1];
    return r / (1.0 + r);
}

Vec2 saturate_grad(const Vec2& q) {
    const double r = q[0] * q[0] + q[1] * q[1];
    const double w = 2.0 / ((1.0 + r) * (1.0 + r));
    return {w * q[0], w * q[1]};
}

/// sin/cos of ω x_j and of u for the most recent arguments. Every coefficient at one cell
/// shares x and u, so consecutive calls (and both ends of a blend) hit the cache.
struct TrigCache {
    double omega = 0.0;
    Vec2 x{std::numeric_limits<double>::quiet_NaN(), 0.0};
    Vec2 sin_x{0.0, 0.0};
    Vec2 cos_x{0.0, 0.0};
    double u = std::numeric_limits<double>::quiet_NaN();
    double sin_u = 0.0;
    double cos_u = 0.0;
    double t = std::numeric_limits<double>::quiet_NaN();
    double sin_t = 0.0;
};

thread_local TrigCache trig_cache;

const TrigCache& trig_x(double omega, const Vec2& x) {
    TrigCache& c = trig_cache;
    if (c.omega != omega || c.x != x) {
        c.omega = omega;
        c.x = x;
        for (std::size_t j = 0; j < 2; ++j) {
            c.sin_x[j] = std::sin(omega * x[j]);
            c.cos_x[j] = std::cos(omega * x[j]);
        }
    }
    return c;
}

const TrigCache& trig_u(double u) {
    TrigCache& c = trig_cache;
    if (c.u != u) {
        c.u = u;
        c.sin_u = std::sin(u);
        c.cos_u = std::cos(u);
    }
    return c;
}

double cached_sin_t(double t) {
    TrigCache& c = trig_cache;
    if (c.t != t) {
        c.t = t;
        c.sin_t = std::sin(t);
    }
    return c.sin_t;
}

class CatalogCoefficients final : public CoefficientSet {
public:
    CatalogCoefficients(int dim, double extent, const CatalogParams& p)
        : dim_(dim), omega_(kTwoPi / extent), p_(p) {
        if (dim_ == 1) {
            p_.fv[1] = p_.fw[1] = p_.fs[1] = 0.0;
        }
        for (int j = 0; j < 2; ++j) {
            has_fs_ = has_fs_ || p_.fs[j] != 0.0;
            has_flux_ = has_flux_ || p_.fv[j] != 0.0 || p_.fw[j] != 0.0 || p_.fs[j] != 0.0;
        }
    }

    int dim() const override { return dim_; }

    double a(double, const Vec2& x, double u, const Vec2& q) const override {
        double v = p_.a0;
        if (p_.ax != 0.0) v += p_.ax * s(x);
        if (p_.au != 0.0) v += p_.au * trig_u(u).sin_u;
        if (p_.aq != 0.0) v += p_.aq * saturate(q);
        return v;
    }
    Vec2 f(double, const Vec2& x, double u) const override {
        Vec2 out{0.0, 0.0};
        if (!has_flux_) return out;
        const TrigCache& tu = trig_u(u);
        const double su = tu.sin_u, cu = tu.cos_u;
        for (int j = 0; j < dim_; ++j) {
            out[j] = p_.fv[j] * u + p_.fw[j] * (1.0 - cu) + sx(x, j) * su;
        }
        return out;
    }
    double h(double t, const Vec2& x, double u, const Vec2& q) const override {
        double v = p_.h0;
        if (p_.hx != 0.0) v += p_.hx * s(x);
        if (p_.hu != 0.0) v += p_.hu * trig_u(u).sin_u;
        if (p_.hq != 0.0) v += p_.hq * saturate(q);
        if (p_.ht != 0.0) v += p_.ht * cached_sin_t(t);
        return v;
    }

    double a_u(double, const Vec2&, double u, const Vec2&) const override {
        return p_.au != 0.0 ? p_.au * trig_u(u).cos_u : 0.0;
    }
    Vec2 a_q(double, const Vec2&, double, const Vec2& q) const override {
        if (p_.aq == 0.0) return {0.0, 0.0};
        const Vec2 g = saturate_grad(q);
        return {p_.aq * g[0], dim_ == 2 ? p_.aq * g[1] : 0.0};
    }
    double div_x_f(double, const Vec2& x, double u) const override {
        if (!has_fs_) return 0.0;
        const double c = cx_sum(x);
        return c * trig_u(u).sin_u;
    }
    Vec2 f_u(double, const Vec2& x, double u) const override {
        Vec2 out{0.0, 0.0};
        if (!has_flux_) return out;
        const TrigCache& tu = trig_u(u);
        const double su = tu.sin_u, cu = tu.cos_u;
        for (int j = 0; j < dim_; ++j) out[j] = p_.fv[j] + p_.fw[j] * su + sx(x, j) * cu;
        return out;
    }
    Vec2 f_uu(double, const Vec2& x, double u) const override {
        Vec2 out{0.0, 0.0};
        if (!has_flux_) return out;
        const TrigCache& tu = trig_u(u);
        const double su = tu.sin_u, cu = tu.cos_u;
        for (int j = 0; j < dim_; ++j) out[j] = p_.fw[j] * cu - sx(x, j) * su;
        return out;
    }
    double div_x_f_u(double, const Vec2& x, double u) const override {
        if (!has_fs_) return 0.0;
        const double c = cx_sum(x);
        return c * trig_u(u).cos_u;
    }
    double h_u(double, const Vec2&, double u, const Vec2&) const override {
        return p_.hu != 0.0 ? p_.hu * trig_u(u).cos_u : 0.0;
    }
    Vec2 h_q(double, const Vec2&, double, const Vec2& q) const override {
        if (p_.hq == 0.0) return {0.0, 0.0};
        const Vec2 g = saturate_grad(q);
        return {p_.hq * g[0], dim_ == 2 ? p_.hq * g[1] : 0.0};
    }

private:
    double s(const Vec2& x) const { return trig_x(omega_, x).sin_x[0]; }
    /// fs_j sin(ω x_j), skipping the trig call when fs_j = 0.
    double sx(const Vec2& x, int j) const {
        return p_.fs[j] != 0.0 ? p_.fs[j] * trig_x(omega_, x).sin_x[static_cast<std::size_t>(j)] : 0.0;
    }
    /// Σ_j fs_j ω cos(ω x_j).
    double cx_sum(const Vec2& x) const {
        double sum = 0.0;
        for (int j = 0; j < dim_; ++j) {
            if (p_.fs[j] != 0.0) sum += p_.fs[j] * omega_ * trig_x(omega_, x).cos_x[static_cast<std::size_t>(j)];
        }
        return sum;
    }

    int dim_;
    double omega_;
    CatalogParams p_;
    bool has_flux_ = false;
    bool has_fs_ = false;
};

struct KeyRef {
    const char* name;
    double CatalogParams::*scalar;
    Vec2 CatalogParams::*vector;
    int component;
};

const std::vector<KeyRef>& key_table() {
    static const std::vector<KeyRef> table = {
        {"a0", &CatalogParams::a0, nullptr, 0},   {"ax", &CatalogParams::ax, nullptr, 0},
        {"au", &CatalogParams::au, nullptr, 0},   {"aq", &CatalogParams::aq, nullptr, 0},
        {"fv_x", nullptr, &CatalogParams::fv, 0}, {"fv_y", nullptr, &CatalogParams::fv, 1},
        {"fw_x", nullptr, &CatalogParams::fw, 0}, {"fw_y", nullptr, &CatalogParams::fw, 1},
        {"fs_x", nullptr, &CatalogParams::fs, 0}, {"fs_y", nullptr, &CatalogParams::fs, 1},
        {"h0", &CatalogParams::h0, nullptr, 0},   {"hx", &CatalogParams::hx, nullptr, 0},
        {"hu", &CatalogParams::hu, nullptr, 0},   {"hq", &CatalogParams::hq, nullptr, 0},
        {"ht", &CatalogParams::ht, nullptr, 0},   {"offset", &CatalogParams::offset, nullptr, 0},
    };
    return table;
}

const KeyRef& find_key(std::string_view key) {
    for (const auto& k : key_table()) {
        if (key == k.name) return k;
    }
    throw Error(ErrorKind::RangeError, "unknown catalog parameter '" + std::string(key) + "'");
}

double periodic_delta(double d, double extent) { return d - extent * std::round(d / extent); }

double mode_value(const FourierMode& m, const Vec2& x, double omega) {
    return m.amp * std::sin(omega * (m.kx * x[0] + m.ky * x[1]) + m.phase);
}

/// Declared C² bound of the initial data: max over derivative orders 0..2 of a sup bound.
double initial_c2_bound(const CatalogParams& p, double omega) {
    double c0 = std::abs(p.offset), c1 = 0.0, c2 = 0.0;
    for (const auto& m : p.modes) {
        const double k = omega * std::max(std::abs(m.kx), std::abs(m.ky));
        c0 += std::abs(m.amp);
        c1 += std::abs(m.amp) * k;
        c2 += std::abs(m.amp) * k * k;
    }
    for (const auto& b : p.bumps) {
        c0 += std::abs(b.amp);
        c1 += std::abs(b.amp) / b.width;
        c2 += std::abs(b.amp) / (b.width * b.width);
    }
    return std::max({c0, c1, c2});
}

}  // namespace

void CatalogParams::set(std::string_view key, double value) {
    const KeyRef& k = find_key(key);
    if (k.scalar) {
        this->*k.scalar = value;
    } else {
        (this->*k.vector)[static_cast<std::size_t>(k.component)] = value;
    }
}

double CatalogParams::get(std::string_view key) const {
    const KeyRef& k = find_key(key);
    return k.scalar ? this->*k.scalar : (this->*k.vector)[static_cast<std::size_t>(k.component)];
}

const std::vector<std::string>& CatalogParams::scalar_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> out;
        for (const auto& k : key_table()) out.emplace_back(k.name);
        return out;
    }();
    return keys;
}

const std::vector<std::string>& catalog_ids() {
    static const std::vector<std::string> ids = {"constant", "heat", "nonlinear_diffusion", "gradient_diffusion",
                                                 "convection", "reaction", "full"};
    return ids;
}

CatalogParams catalog_defaults(std::string_view id, int dim) {
    CatalogParams p;
    const FourierMode base{1.0, 1.0, dim == 2 ? 1.0 : 0.0, 0.0};
    if (id == "constant") {
        p.offset = 1.0;
        return p;
    }
    p.modes = {base};
    if (id == "heat") {
        return p;
    }
    if (id == "nonlinear_diffusion") {
        p.au = 0.2;
        p.ax = 0.1;
        return p;
    }
    if (id == "gradient_diffusion") {
        p.aq = 0.3;
        return p;
    }
    if (id == "convection") {
        p.fv = {0.5, dim == 2 ? 0.3 : 0.0};
        p.fw = {0.3, dim == 2 ? 0.2 : 0.0};
        p.fs = {0.1, dim == 2 ? 0.1 : 0.0};
        return p;
    }
    if (id == "reaction") {
        p.h0 = 0.1;
        p.hx = 0.1;
        p.hu = 0.3;
        p.hq = 0.1;
        p.ht = 0.1;
        return p;
    }
    if (id == "full") {
        p.ax = 0.1;
        p.au = 0.1;
        p.aq = 0.2;
        p.fv = {0.3, dim == 2 ? 0.2 : 0.0};
        p.fw = {0.2, dim == 2 ? 0.1 : 0.0};
        p.fs = {0.1, dim == 2 ? 0.1 : 0.0};
        p.hx = 0.1;
        p.hu = 0.2;
        p.hq = 0.1;
        return p;
    }
    throw Error(ErrorKind::UnknownCatalogId, "unknown catalog problem '" + std::string(id) + "'");
}

CoefficientPtr make_catalog_coefficients(int dim, double extent, const CatalogParams& params) {
    return std::make_shared<CatalogCoefficients>(dim, extent, params);
}

ParabolicProblem make_catalog_problem(const std::string& name, const Grid& grid, const CatalogParams& params) {
    const double omega = kTwoPi / grid.extent();
    const double extent = grid.extent();

    FieldBounds b;
    b.a_star = params.a0 - std::abs(params.ax) - std::abs(params.au) - std::max(0.0, -params.aq);
    b.a_sup = params.a0 + std::abs(params.ax) + std::abs(params.au) + std::max(0.0, params.aq);
    if (!(b.a_star > 0.0)) {
        throw Error(ErrorKind::HypothesisViolation,
                    "problem '" + name + "' is not strictly parabolic (declared a_* = " + std::to_string(b.a_star) + ")");
    }
    // Crude declared bounds: sums of sup-norms of every derivative up to third order.
    const double w3 = 1.0 + omega + omega * omega + omega * omega * omega;
    b.k1 = std::abs(params.a0) + std::abs(params.ax) * w3 + 4.0 * std::abs(params.au) + 8.0 * std::abs(params.aq);
    double k2 = std::abs(params.hx) * w3 + 2.0 * std::abs(params.hu) + 2.0 * std::abs(params.hq);
    for (int j = 0; j < grid.dim(); ++j) {
        k2 = std::max(k2, std::abs(params.fv[j]) + 2.0 * std::abs(params.fw[j]) + std::abs(params.fs[j]) * w3);
    }
    b.k2 = std::max(k2, 1e-12);
    b.k3 = std::max(initial_c2_bound(params, omega), 1e-12);

    ParabolicProblem problem{name, grid, make_catalog_coefficients(grid.dim(), extent, params), {}, b};
    problem.initial = [params, omega, extent, dim = grid.dim()](const Vec2& x) {
        double v = params.offset;
        for (const auto& m : params.modes) v += mode_value(m, x, omega);
        for (const auto& bump : params.bumps) {
            double r2 = 0.0;
            for (int d = 0; d < dim; ++d) {
                const double dd = periodic_delta(x[d] - bump.center[d], extent);
                r2 += dd * dd;
            }
            v += bump.amp * std::exp(-r2 / (2.0 * bump.width * bump.width));
        }
        return v;
    };
    return problem;
}

ParabolicProblem make_catalog_problem(std::string_view id, const Grid& grid) {
    return make_catalog_problem(std::string(id), grid, catalog_defaults(id, grid.dim()));
}

// ---------------------------------------------------------------------------

namespace {

using ScalarFn = std::function<double(double, const Vec2&, double, const Vec2&)>;
using FluxFn = std::function<Vec2(double, const Vec2&, double)>;

constexpr double kStep = 1e-5;

class NumericCoefficients final : public CoefficientSet {
public:
    NumericCoefficients(int dim, ScalarFn a, FluxFn f, ScalarFn h)
        : dim_(dim), a_(std::move(a)), f_(std::move(f)), h_(std::move(h)) {}

    int dim() const override { return dim_; }
    double a(double t, const Vec2& x, double u, const Vec2& q) const override { return a_(t, x, u, q); }
    Vec2 f(double t, const Vec2& x, double u) const override { return f_(t, x, u); }
    double h(double t, const Vec2& x, double u, const Vec2& q) const override { return h_(t, x, u, q); }

    double a_u(double t, const Vec2& x, double u, const Vec2& q) const override {
        return (a_(t, x, u + kStep, q) - a_(t, x, u - kStep, q)) / (2.0 * kStep);
    }
    Vec2 a_q(double t, const Vec2& x, double u, const Vec2& q) const override { return grad_q(a_, t, x, u, q); }
    double div_x_f(double t, const Vec2& x, double u) const override {
        double sum = 0.0;
        for (int j = 0; j < dim_; ++j) {
            Vec2 xp = x, xm = x;
            xp[j] += kStep;
            xm[j] -= kStep;
            sum += (f_(t, xp, u)[j] - f_(t, xm, u)[j]) / (2.0 * kStep);
        }
        return sum;
    }
    Vec2 f_u(double t, const Vec2& x, double u) const override {
        const Vec2 p = f_(t, x, u + kStep), m = f_(t, x, u - kStep);
        return {(p[0] - m[0]) / (2.0 * kStep), (p[1] - m[1]) / (2.0 * kStep)};
    }
    Vec2 f_uu(double t, const Vec2& x, double u) const override {
        constexpr double s = 1e-4;
        const Vec2 p = f_(t, x, u + s), c = f_(t, x, u), m = f_(t, x, u - s);
        return {(p[0] - 2.0 * c[0] + m[0]) / (s * s), (p[1] - 2.0 * c[1] + m[1]) / (s * s)};
    }
    double div_x_f_u(double t, const Vec2& x, double u) const override {
        constexpr double s = 1e-4;
        double sum = 0.0;
        for (int j = 0; j < dim_; ++j) {
            Vec2 xp = x, xm = x;
            xp[j] += s;
            xm[j] -= s;
            sum += (f_(t, xp, u + s)[j] - f_(t, xp, u - s)[j] - f_(t, xm, u + s)[j] + f_(t, xm, u - s)[j]) /
                   (4.0 * s * s);
        }
        return sum;
    }
    double h_u(double t, const Vec2& x, double u, const Vec2& q) const override {
        return (h_(t, x, u + kStep, q) - h_(t, x, u - kStep, q)) / (2.0 * kStep);
    }
    Vec2 h_q(double t, const Vec2& x, double u, const Vec2& q) const override { return grad_q(h_, t, x, u, q); }

private:
    Vec2 grad_q(const ScalarFn& fn, double t, const Vec2& x, double u, const Vec2& q) const {
        Vec2 out{0.0, 0.0};
        for (int j = 0; j < dim_; ++j) {
            Vec2 qp = q, qm = q;
            qp[j] += kStep;
            qm[j] -= kStep;
            out[j] = (fn(t, x, u, qp) - fn(t, x, u, qm)) / (2.0 * kStep);
        }
        return out;
    }

    int dim_;
    ScalarFn a_;
    FluxFn f_;
    ScalarFn h_;
};

}  // namespace

CoefficientPtr make_numeric_coefficients(int dim, ScalarFn a, FluxFn f, ScalarFn h) {
    if (dim != 1 && dim != 2) throw Error(ErrorKind::RangeError, "dim must be 1 or 2");
    return std::make_shared<NumericCoefficients>(dim, std::move(a), std::move(f), std::move(h));
}

}  // namespace parastab
