#pragma once

#include "sympb/boundary.hpp"
#include "sympb/core.hpp"
#include "sympb/roots.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <set>
#include <vector>

namespace sympb {

enum class TableKind { SupportFunction, PolarRadius };
enum class ParamKind { TangentAngle, PolarAngle };

/// One term a cos(k x) + b sin(k x). The k = 0 cosine coefficient is the
/// constant term; a k = 0 sine coefficient must be zero.
struct Harmonic {
    int k = 0;
    double cos_coeff = 0.0;
    double sin_coeff = 0.0;

    friend bool operator==(const Harmonic&, const Harmonic&) = default;
};

struct TableSpec {
    TableKind kind = TableKind::SupportFunction;
    std::vector<Harmonic> harmonics;
    std::optional<Vec2> origin_override;

    friend bool operator==(const TableSpec& a, const TableSpec& b) {
        if (a.kind != b.kind || a.harmonics != b.harmonics) return false;
        if (a.origin_override.has_value() != b.origin_override.has_value()) return false;
        return !a.origin_override || *a.origin_override == *b.origin_override;
    }

    static TableSpec support(std::vector<Harmonic> h) {
        return {TableKind::SupportFunction, std::move(h), std::nullopt};
    }
    static TableSpec polar(std::vector<Harmonic> h) {
        return {TableKind::PolarRadius, std::move(h), std::nullopt};
    }
    static TableSpec circle(double radius = 1.0) { return support({{0, radius, 0.0}}); }
};

/// Value and first three derivatives of a trigonometric polynomial.
struct Jet {
    double v = 0.0, d1 = 0.0, d2 = 0.0, d3 = 0.0;
};

inline Jet eval_harmonics(const std::vector<Harmonic>& hs, double x) {
    Jet j;
    for (const auto& h : hs) {
        double k = h.k;
        double c = std::cos(k * x);
        double s = std::sin(k * x);
        double a = h.cos_coeff;
        double b = h.sin_coeff;
        j.v += a * c + b * s;
        j.d1 += k * (-a * s + b * c);
        j.d2 += -k * k * (a * c + b * s);
        j.d3 += -k * k * k * (-a * s + b * c);
    }
    return j;
}

/// (p, p', p'', p''') of the support function at theta.
inline Jet eval_support(const TableSpec& spec, double theta) {
    if (spec.kind != TableKind::SupportFunction)
        throw KindMismatch("eval_support: table is not given by a support function");
    return eval_harmonics(spec.harmonics, theta);
}

enum class ConvexityClass { StronglyConvex, StrictlyConvexWithFlatPoints, Invalid };

struct ConvexityReport {
    ConvexityClass cls = ConvexityClass::Invalid;
    double min_curvature = 0.0;
    std::vector<double> flat_points;
    std::string reason;
};

inline constexpr double kCurvatureTol = 1e-9;
inline constexpr int kConvexityScan = 4096;

namespace detail {

/// Unvalidated curve built from a TableSpec. The support-function curve is
/// gamma(theta) = p' e_theta - p J e_theta around (0, 0); the polar curve is
/// r(u) (cos u, sin u) around the pole (0, 0).
class HarmonicCurve {
public:
    explicit HarmonicCurve(const TableSpec& spec) : spec_(spec) {}

    Vec2 point(double t) const {
        Jet j = eval_harmonics(spec_.harmonics, t);
        double c = std::cos(t), s = std::sin(t);
        if (spec_.kind == TableKind::SupportFunction) return {j.v * c - j.d1 * s, j.v * s + j.d1 * c};
        return {j.v * c, j.v * s};
    }
    Vec2 tangent(double t) const {
        Jet j = eval_harmonics(spec_.harmonics, t);
        double c = std::cos(t), s = std::sin(t);
        if (spec_.kind == TableKind::SupportFunction) return (j.v + j.d2) * Vec2(-s, c);
        return j.d1 * Vec2(c, s) + j.v * Vec2(-s, c);
    }
    Vec2 second(double t) const {
        Jet j = eval_harmonics(spec_.harmonics, t);
        double c = std::cos(t), s = std::sin(t);
        Vec2 e(-s, c);
        if (spec_.kind == TableKind::SupportFunction)
            return (j.d1 + j.d3) * e + (j.v + j.d2) * rot90(e);
        return (j.d2 - j.v) * Vec2(c, s) + 2.0 * j.d1 * e;
    }
    double curvature(double t) const {
        if (spec_.kind == TableKind::SupportFunction) {
            Jet j = eval_harmonics(spec_.harmonics, t);
            return 1.0 / (j.v + j.d2);
        }
        Jet j = eval_harmonics(spec_.harmonics, t);
        double num = j.v * j.v + 2.0 * j.d1 * j.d1 - j.v * j.d2;
        double den = std::pow(j.v * j.v + j.d1 * j.d1, 1.5);
        return num / den;
    }
    double tangent_angle(double t) const {
        if (spec_.kind == TableKind::SupportFunction) return t;
        Jet j = eval_harmonics(spec_.harmonics, t);
        return t + std::atan2(j.v, j.d1) - 0.5 * pi;
    }

    const TableSpec& spec() const { return spec_; }

private:
    TableSpec spec_;
};

inline bool odd_harmonics_vanish(const TableSpec& spec) {
    return std::all_of(spec.harmonics.begin(), spec.harmonics.end(), [](const Harmonic& h) {
        return h.k % 2 == 0 || (h.cos_coeff == 0.0 && h.sin_coeff == 0.0);
    });
}

inline void check_harmonics(const TableSpec& spec) {
    if (spec.harmonics.empty()) throw TableError("table: no harmonics given");
    std::set<int> seen;
    for (const auto& h : spec.harmonics) {
        if (h.k < 0) throw TableError("table: harmonic order must be >= 0");
        if (!std::isfinite(h.cos_coeff) || !std::isfinite(h.sin_coeff))
            throw TableError("table: non-finite harmonic coefficient");
        if (h.k == 0 && h.sin_coeff != 0.0) throw TableError("table: k = 0 sine term must vanish");
        if (!seen.insert(h.k).second) throw TableError("table: duplicate harmonic order");
    }
}

}  // namespace detail

/// Dense curvature scan refined by local minimization. Runs on the raw spec
/// so that invalid tables can be diagnosed before construction.
inline ConvexityReport convexity_report(const TableSpec& spec) {
    detail::check_harmonics(spec);
    ConvexityReport rep;
    const int n = kConvexityScan;
    std::vector<double> u(n), f(n), rho(n);
    for (int i = 0; i < n; ++i) {
        u[i] = two_pi * i / n;
        f[i] = eval_harmonics(spec.harmonics, u[i]).v;
    }
    if (*std::min_element(f.begin(), f.end()) <= 0.0) {
        rep.cls = ConvexityClass::Invalid;
        rep.min_curvature = -std::numeric_limits<double>::infinity();
        rep.reason = spec.kind == TableKind::SupportFunction ? "support function not positive"
                                                             : "polar radius not positive";
        return rep;
    }

    detail::HarmonicCurve curve(spec);
    if (spec.kind == TableKind::SupportFunction) {
        // curvature = 1 / rho with rho = p + p''; the scan watches rho itself
        // since 1/rho hides sign changes
        auto rho_at = [&](double x) {
            Jet j = eval_harmonics(spec.harmonics, x);
            return j.v + j.d2;
        };
        double rmin = std::numeric_limits<double>::infinity();
        double rmax = 0.0;
        for (int i = 0; i < n; ++i) {
            rho[i] = rho_at(u[i]);
            rmax = std::max(rmax, rho[i]);
        }
        for (int i = 0; i < n; ++i) {
            double prev = rho[(i + n - 1) % n], next = rho[(i + 1) % n];
            if (rho[i] <= prev && rho[i] <= next) {
                auto [x, v] = roots::minimize(rho_at, u[i] - two_pi / n, u[i] + two_pi / n);
                (void)x;
                rmin = std::min(rmin, v);
            }
        }
        if (!(rmin > 0.0)) {
            rep.cls = ConvexityClass::Invalid;
            rep.min_curvature = -std::numeric_limits<double>::infinity();
            rep.reason = "radius of curvature p + p'' not positive";
            return rep;
        }
        rep.min_curvature = 1.0 / rmax;
        rep.cls = rep.min_curvature > kCurvatureTol ? ConvexityClass::StronglyConvex
                                                    : ConvexityClass::StrictlyConvexWithFlatPoints;
        return rep;
    }

    auto kappa = [&](double x) { return curve.curvature(x); };
    std::vector<double> k(n);
    for (int i = 0; i < n; ++i) k[i] = kappa(u[i]);
    double kmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        double prev = k[(i + n - 1) % n], next = k[(i + 1) % n];
        if (!(k[i] <= prev && k[i] <= next)) continue;
        auto [x, v] = roots::minimize(kappa, u[i] - two_pi / n, u[i] + two_pi / n);
        kmin = std::min(kmin, v);
        if (v <= kCurvatureTol) {
            double xw = wrap_2pi(x);
            bool dup = std::any_of(rep.flat_points.begin(), rep.flat_points.end(),
                                   [&](double y) { return circle_distance(y, xw) < 1e-6; });
            if (!dup) rep.flat_points.push_back(xw);
        }
    }
    std::sort(rep.flat_points.begin(), rep.flat_points.end());
    rep.min_curvature = kmin;
    if (kmin < -kCurvatureTol) {
        rep.cls = ConvexityClass::Invalid;
        rep.reason = "negative curvature";
        rep.flat_points.clear();
    } else if (kmin > kCurvatureTol) {
        rep.cls = ConvexityClass::StronglyConvex;
    } else {
        rep.cls = ConvexityClass::StrictlyConvexWithFlatPoints;
    }
    return rep;
}

/// A validated, immutable strictly convex table.
class BilliardTable {
public:
    explicit BilliardTable(TableSpec spec) : curve_(spec) {
        convexity_ = convexity_report(spec);
        if (convexity_.cls == ConvexityClass::Invalid)
            throw TableError("table rejected: " + convexity_.reason);
        symmetric_geometry_ = detail::odd_harmonics_vanish(spec);
        origin_ = spec.origin_override.value_or(Vec2::Zero());

        const int n = 4096;
        double len = 0.0;
        double inside = std::numeric_limits<double>::infinity();
        double reach = 0.0;
        for (int i = 0; i < n; ++i) {
            double t = two_pi * i / n;
            Vec2 g = curve_.point(t);
            Vec2 d = curve_.tangent(t);
            len += d.norm();
            inside = std::min(inside, det(d, origin_ - g));
            reach = std::max(reach, (g - origin_).norm());
        }
        perimeter_ = len * two_pi / n;
        scale_ = reach;
        if (!(inside > 0.0)) throw TableError("table rejected: origin not inside the domain");
    }

    Vec2 point(double t) const { return curve_.point(t); }
    Vec2 tangent(double t) const { return curve_.tangent(t); }
    Vec2 second(double t) const { return curve_.second(t); }
    Vec2 origin() const { return origin_; }
    double curvature(double t) const { return curve_.curvature(t); }

    double star(double t) const {
        if (spec().kind == TableKind::SupportFunction || symmetric_geometry_) return t + pi;
        return find_star(curve_, t);
    }
    double tangent_angle(double t) const { return curve_.tangent_angle(t); }
    double param_at_tangent_angle(double theta) const {
        if (spec().kind == TableKind::SupportFunction) return theta;
        return invert_tangent_angle(curve_, theta);
    }

    const TableSpec& spec() const { return curve_.spec(); }
    TableKind kind() const { return spec().kind; }
    ParamKind param_kind() const {
        return kind() == TableKind::SupportFunction ? ParamKind::TangentAngle : ParamKind::PolarAngle;
    }
    double period() const { return two_pi; }
    double perimeter() const { return perimeter_; }
    /// max |gamma - origin|; the length scale used for tolerances
    double scale() const { return scale_; }
    const ConvexityReport& convexity() const { return convexity_; }

    /// The curve is invariant under the point reflection through (0, 0).
    bool symmetric_geometry() const { return symmetric_geometry_; }
    std::optional<Vec2> symmetry_center() const {
        if (symmetric_geometry_) return Vec2::Zero();
        return std::nullopt;
    }
    /// Symmetric curve with the origin at the symmetry center.
    bool centrally_symmetric() const { return symmetric_geometry_ && origin_.norm() == 0.0; }

    /// Same curve, different origin.
    BilliardTable with_origin(const Vec2& o) const {
        TableSpec s = spec();
        s.origin_override = o;
        return BilliardTable(std::move(s));
    }

    /// o lies strictly on the left of every tangent line.
    bool contains(const Vec2& o, int samples = 1024) const {
        for (int i = 0; i < samples; ++i) {
            double t = two_pi * i / samples;
            if (!(det(tangent(t), o - point(t)) > 0.0)) return false;
        }
        return true;
    }

private:
    detail::HarmonicCurve curve_;
    ConvexityReport convexity_;
    Vec2 origin_ = Vec2::Zero();
    bool symmetric_geometry_ = false;
    double perimeter_ = 0.0;
    double scale_ = 1.0;
};

static_assert(Boundary<BilliardTable>);

inline double curvature(const BilliardTable& table, double t) { return table.curvature(t); }
inline Vec2 boundary_point(const BilliardTable& table, double t) { return table.point(t); }
inline Vec2 boundary_tangent(const BilliardTable& table, double t) { return table.tangent(t); }
inline Vec2 boundary_second(const BilliardTable& table, double t) { return table.second(t); }
inline double star(const BilliardTable& table, double t) { return table.star(t); }
inline ConvexityReport convexity_report(const BilliardTable& table) { return table.convexity(); }

}  // namespace sympb
