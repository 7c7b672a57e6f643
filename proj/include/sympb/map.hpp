#pragma once

// Conservative and dissipative symplectic billiard maps, chart changes and
// the exact differential. Everything is written against the Boundary
// concept; no assumption on the parametrization beyond C^2 regularity.

#include "sympb/boundary.hpp"
#include "sympb/core.hpp"
#include "sympb/roots.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <utility>

namespace sympb {

/// Corner chart (t1, t2). t2 is a lift: t2 - t1 is the forward gap in
/// [0, star(t1) - t1] on the closure of the phase space.
struct Corner {
    double t1 = 0.0;
    double t2 = 0.0;
    double gap() const { return t2 - t1; }
};

/// Twist chart (t, s) with s = -L_1(t1, t2).
struct TwistPoint {
    double t = 0.0;
    double s = 0.0;
};

/// Plot chart (theta, psi): tangent angle of the first point and the
/// tangent-angle difference psi in (0, pi).
struct PlotPoint {
    double theta = 0.0;
    double psi = 0.0;
};

enum class Chart { Corner, Twist, Plot };

/// A state in any chart together with the unwrapped first coordinate.
struct PhasePoint {
    Chart chart = Chart::Twist;
    double a = 0.0;
    double b = 0.0;
    double lift = 0.0;
};

/// Generating function L(t1, t2) = det(gamma(t1) - O, gamma(t2) - O) and its
/// partial derivatives.
struct LPartials {
    double L = 0.0;
    double L1 = 0.0;
    double L2 = 0.0;
    double L11 = 0.0;
    double L12 = 0.0;
    double L22 = 0.0;
};

template <Boundary B>
LPartials generating_L(const B& b, double t1, double t2) {
    const Vec2 o = b.origin();
    const Vec2 g1 = b.point(t1) - o;
    const Vec2 g2 = b.point(t2) - o;
    const Vec2 d1 = b.tangent(t1);
    const Vec2 d2 = b.tangent(t2);
    LPartials l;
    l.L = det(g1, g2);
    l.L1 = det(d1, g2);
    l.L2 = det(g1, d2);
    l.L11 = det(b.second(t1), g2);
    l.L12 = det(d1, d2);
    l.L22 = det(g1, b.second(t2));
    return l;
}

/// L_1(t1, t2) = det(gamma'(t1), gamma(t2) - O).
template <Boundary B>
double L1(const B& b, double t1, double t2) {
    return det(b.tangent(t1), b.point(t2) - b.origin());
}

/// L_2(t1, t2) = det(gamma(t1) - O, gamma'(t2)).
template <Boundary B>
double L2(const B& b, double t1, double t2) {
    return det(b.point(t1) - b.origin(), b.tangent(t2));
}

struct PhaseBounds {
    double psi1 = 0.0;  ///< lower boundary -L_1(t, t*), negative
    double psi2 = 0.0;  ///< upper boundary -L_1(t, t), positive
};

template <Boundary B>
PhaseBounds phase_bounds(const B& b, double t) {
    return {-L1(b, t, b.star(t)), -L1(b, t, t)};
}

/// max |s| over the phase cylinder, estimated on a uniform grid.
template <Boundary B>
double phase_band_max(const B& b, int samples = 512) {
    double m = 0.0;
    for (int i = 0; i < samples; ++i) {
        auto pb = phase_bounds(b, two_pi * i / samples);
        m = std::max({m, std::abs(pb.psi1), std::abs(pb.psi2)});
    }
    return m;
}

/// Corner -> twist chart. Accepts the closure of the phase space.
template <Boundary B>
TwistPoint to_twist(const B& b, const Corner& c) {
    const double gap = c.gap();
    const double star_gap = b.star(c.t1) - c.t1;
    const double slack = 1e-12 * (1.0 + std::abs(c.t1));
    if (gap < -slack || gap > star_gap + slack)
        throw ChartError("to_twist: corner is not positive admissible");
    return {wrap_2pi(c.t1), -L1(b, c.t1, c.t2)};
}

/// Twist -> corner chart: the unique t2 in (t, t*) with -L_1(t, t2) = s. The
/// returned t2 is lifted relative to the returned t1 = x.t (unchanged).
template <Boundary B>
Corner from_twist(const B& b, const TwistPoint& x) {
    const double t = x.t;
    const double ts = b.star(t);
    const Vec2 o = b.origin();
    const Vec2 d = b.tangent(t);
    auto h = [&](double u) { return -det(d, b.point(u) - o) - x.s; };
    const double h0 = h(t);
    const double h1 = h(ts);
    if (!(h0 > 0.0) || !(h1 < 0.0)) throw ChartError("from_twist: s outside (psi1(t), psi2(t))");
    return {t, roots::bracketed(h, t, ts, h0, h1, "from_twist")};
}

template <Boundary B>
PlotPoint to_plot(const B& b, const Corner& c) {
    const double th1 = b.tangent_angle(c.t1);
    const double th2 = b.tangent_angle(c.t2);
    return {wrap_2pi(th1), th2 - th1};
}

template <Boundary B>
PlotPoint to_plot(const B& b, const TwistPoint& x) {
    return to_plot(b, from_twist(b, x));
}

template <Boundary B>
Corner from_plot(const B& b, const PlotPoint& p) {
    if (!(p.psi > 0.0 && p.psi < pi)) throw ChartError("from_plot: psi must lie in (0, pi)");
    const double t1 = b.param_at_tangent_angle(p.theta);
    double t2 = b.param_at_tangent_angle(p.theta + p.psi);
    return {t1, t2};
}

template <Boundary B>
TwistPoint plot_to_twist(const B& b, const PlotPoint& p) {
    return to_twist(b, from_plot(b, p));
}

/// Convert a PhasePoint into another chart. The lift is carried over.
template <Boundary B>
PhasePoint convert(const B& b, const PhasePoint& p, Chart target) {
    Corner c;
    switch (p.chart) {
        case Chart::Corner: c = {p.a, p.b}; break;
        case Chart::Twist: c = from_twist(b, TwistPoint{p.a, p.b}); break;
        case Chart::Plot: c = from_plot(b, PlotPoint{p.a, p.b}); break;
    }
    PhasePoint out{target, 0.0, 0.0, p.lift};
    switch (target) {
        case Chart::Corner: out.a = c.t1; out.b = c.t2; break;
        case Chart::Twist: {
            auto x = to_twist(b, c);
            out.a = x.t;
            out.b = x.s;
            break;
        }
        case Chart::Plot: {
            auto q = to_plot(b, c);
            out.a = q.theta;
            out.b = q.psi;
            break;
        }
    }
    return out;
}

/// One step of T_lambda in the twist chart together with the corner it went
/// through. `gap` is the positive advance t2 - t1 used for lift tracking.
struct TwistStep {
    TwistPoint next;
    Corner corner;
    double gap = 0.0;
};

/// T_lambda(t1, s1) = (t2, lambda L_2(t1, t2)) where (t1, t2) = phi^{-1}(t1, s1).
template <Boundary B>
TwistStep step_twist(const B& b, double lambda, const TwistPoint& x) {
    Corner c = from_twist(b, x);
    TwistStep out;
    out.corner = c;
    out.gap = c.gap();
    out.next = {wrap_2pi(c.t2), lambda * L2(b, c.t1, c.t2)};
    return out;
}

inline void check_lambda(double lambda) {
    if (!(lambda > 0.0 && lambda <= 1.0)) throw DomainError("lambda must lie in (0, 1]");
}

/// Corner-chart step of T_lambda: (t1, t2) -> (t2, t3) with
/// gamma(t3) - lambda gamma(t1) tangent at gamma(t2) (vectors from O).
/// The returned t3 is lifted so that t3 - t2 is the forward gap.
template <Boundary B>
Corner step_dissipative(const B& b, double lambda, const Corner& c) {
    check_lambda(lambda);
    const double gap = c.gap();
    const double star_gap = b.star(c.t1) - c.t1;
    const double edge = 1e-13 * (1.0 + std::abs(c.t1));
    if (gap < -edge || gap > star_gap + edge)
        throw ChartError("step: corner is not positive admissible");
    if (lambda == 1.0) {
        // continuous extension to the boundary of the phase space
        if (std::abs(gap) <= edge) return {c.t2, c.t2};
        if (std::abs(gap - star_gap) <= edge) return {c.t2, c.t1 + two_pi};
    }
    const double s2 = lambda * L2(b, c.t1, c.t2);
    Corner next = from_twist(b, TwistPoint{c.t2, s2});
    return {c.t2, next.t2};
}

template <Boundary B>
Corner step_conservative(const B& b, const Corner& c) {
    return step_dissipative(b, 1.0, c);
}

/// Residual det(gamma'(t2), (gamma(t3) - O) - lambda (gamma(t1) - O)) of a
/// corner step; zero exactly when the step satisfies the tangency condition.
template <Boundary B>
double step_residual(const B& b, double lambda, double t1, double t2, double t3) {
    const Vec2 o = b.origin();
    return det(b.tangent(t2), (b.point(t3) - o) - lambda * (b.point(t1) - o));
}

/// Inverse of T_lambda in the twist chart: T^{-1}(t2, s2 / lambda). Fails with
/// ChartError when s2 / lambda leaves the phase band (points outside the
/// image of T_lambda have no preimage).
template <Boundary B>
TwistPoint step_inverse(const B& b, double lambda, const TwistPoint& x) {
    check_lambda(lambda);
    const double s = x.s / lambda;
    const double t2 = x.t;
    const Vec2 d2 = b.tangent(t2);
    const Vec2 o = b.origin();
    // L_2(u, t2) increases from psi1(t2) at u = t2* - 2pi to psi2(t2) at u = t2
    auto h = [&](double u) { return det(b.point(u) - o, d2) - s; };
    const double lo = b.star(t2) - two_pi;
    const double hlo = h(lo);
    const double hhi = h(t2);
    if (!(hlo < 0.0) || !(hhi > 0.0)) throw ChartError("step_inverse: point has no preimage");
    const double t1 = roots::bracketed(h, lo, t2, hlo, hhi, "step_inverse");
    return {wrap_2pi(t1), -L1(b, t1, t2)};
}

/// DT_lambda in the twist chart with the L-ingredients it was built from.
struct Jacobian2 {
    Mat2 m = Mat2::Zero();
    double L11 = 0.0;
    double L12 = 0.0;
    double L22 = 0.0;
};

/// DT_lambda(t1, s1) = -(1/L12) [[L11, 1], [lambda (L11 L22 - L12^2), lambda L22]]
/// at (t1, t2) = phi^{-1}(t1, s1).
template <Boundary B>
Jacobian2 differential(const B& b, double lambda, const Corner& c) {
    const LPartials l = generating_L(b, c.t1, c.t2);
    if (!(l.L12 > 0.0)) throw ChartError("differential: L12 <= 0, twist condition violated");
    Jacobian2 j;
    j.L11 = l.L11;
    j.L12 = l.L12;
    j.L22 = l.L22;
    const double k = -1.0 / l.L12;
    j.m << k * l.L11, k, k * lambda * (l.L11 * l.L22 - l.L12 * l.L12), k * lambda * l.L22;
    return j;
}

template <Boundary B>
Jacobian2 differential(const B& b, double lambda, const TwistPoint& x) {
    return differential(b, lambda, from_twist(b, x));
}

}  // namespace sympb
