#pragma once

#include "sympb/core.hpp"
#include "sympb/roots.hpp"

#include <Eigen/Dense>

#include <concepts>

namespace sympb {

/// A 2pi-periodic, counterclockwise C^2 parametrization of a strictly convex
/// curve together with the origin used by the generating function.
///
/// `star(t)` returns the lifted opposite-tangent parameter in (t, t + 2pi).
/// `tangent_angle(t)` is the continuous tangent-direction angle theta with
/// gamma'(t) parallel to e_theta = (-sin theta, cos theta); it advances by
/// exactly 2pi per turn. `param_at_tangent_angle` is its inverse.
template <class B>
concept Boundary = requires(const B& b, double t) {
    { b.point(t) } -> std::convertible_to<Vec2>;
    { b.tangent(t) } -> std::convertible_to<Vec2>;
    { b.second(t) } -> std::convertible_to<Vec2>;
    { b.origin() } -> std::convertible_to<Vec2>;
    { b.star(t) } -> std::convertible_to<double>;
    { b.tangent_angle(t) } -> std::convertible_to<double>;
    { b.param_at_tangent_angle(t) } -> std::convertible_to<double>;
};

/// e_theta = (-sin theta, cos theta).
inline Vec2 unit_tangent(double theta) { return {-std::sin(theta), std::cos(theta)}; }

/// Tangent angle of the direction v, lifted to lie within pi of `near`.
inline double direction_angle(const Vec2& v, double near) {
    double raw = std::atan2(-v.x(), v.y());
    return near + wrap_pm_pi(raw - near);
}

/// Signed curvature det(g', g'') / |g'|^3 of any parametrized curve.
template <Boundary B>
double signed_curvature(const B& b, double t) {
    Vec2 d1 = b.tangent(t);
    Vec2 d2 = b.second(t);
    double n = d1.norm();
    return det(d1, d2) / (n * n * n);
}

/// Opposite-tangent parameter by a 64-point scan of det(gamma'(t), gamma'(u))
/// over u in (t, t + 2pi) followed by bracketed refinement.
template <class Curve>
double find_star(const Curve& c, double t) {
    Vec2 d0 = c.tangent(t);
    auto f = [&](double u) { return det(d0, c.tangent(u)); };
    constexpr int kScan = 64;
    double h = two_pi / kScan;
    auto br = roots::first_sign_change(f, t + 0.5 * h, t + two_pi - 0.5 * h, kScan - 1, false);
    if (!br) throw GeometryError("star: no opposite tangent found (curve not strictly convex?)");
    return roots::bracketed(f, br->a, br->b, br->fa, br->fb, "star");
}

/// Inverse of a continuous, strictly increasing tangent-angle function with
/// |theta(u) - u - offset| < pi.
template <class Curve>
double invert_tangent_angle(const Curve& c, double theta, double offset = 0.0) {
    auto f = [&](double u) { return c.tangent_angle(u) - theta; };
    double mid = theta - offset;
    return roots::bracketed(f, mid - pi, mid + pi, "tangent-angle inverse");
}

/// Image of a circle under an orientation-preserving affine map,
/// gamma(t) = center + A (cos t, sin t). Used for ellipses and for affine
/// covariance checks; its natural origin is the center.
class AffineCircle {
public:
    AffineCircle(Mat2 a, Vec2 center, Vec2 origin)
        : a_(std::move(a)), center_(std::move(center)), origin_(std::move(origin)) {
        if (!(a_.determinant() > 0.0))
            throw TableError("AffineCircle: linear part must preserve orientation");
        offset_ = wrap_pm_pi(std::atan2(-a_(0, 1), a_(1, 1)));
    }
    AffineCircle(Mat2 a, Vec2 center) : AffineCircle(a, center, center) {}

    static AffineCircle unit_circle() { return {Mat2::Identity(), Vec2::Zero()}; }

    Vec2 point(double t) const { return center_ + a_ * Vec2(std::cos(t), std::sin(t)); }
    Vec2 tangent(double t) const { return a_ * Vec2(-std::sin(t), std::cos(t)); }
    Vec2 second(double t) const { return a_ * Vec2(-std::cos(t), -std::sin(t)); }
    Vec2 origin() const { return origin_; }
    double star(double t) const { return t + pi; }
    double tangent_angle(double t) const { return direction_angle(tangent(t), t + offset_); }
    double param_at_tangent_angle(double theta) const {
        return invert_tangent_angle(*this, theta, offset_);
    }

    const Mat2& linear() const { return a_; }
    const Vec2& center() const { return center_; }

private:
    Mat2 a_;
    Vec2 center_;
    Vec2 origin_;
    double offset_ = 0.0;  // tangent angle minus parameter at t = 0
};

static_assert(Boundary<AffineCircle>);

}  // namespace sympb
