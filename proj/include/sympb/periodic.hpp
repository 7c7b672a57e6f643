#pragma once

// 4-periodic orbits of centrally symmetric tables, their stability under
// dissipation, and unstable manifolds of the saddle ones.

#include "sympb/boundary.hpp"
#include "sympb/core.hpp"
#include "sympb/map.hpp"
#include "sympb/roots.hpp"
#include "sympb/table.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace sympb {

namespace detail {

inline void require_symmetric_support(const BilliardTable& table, const char* what) {
    if (table.kind() != TableKind::SupportFunction)
        throw KindMismatch(std::string(what) + ": needs a support-function table");
    if (!table.symmetric_geometry())
        throw GeometryError(std::string(what) + ": needs a centrally symmetric table");
}

inline double log_derivative(const TableSpec& spec, double theta) {
    Jet j = eval_support(spec, theta);
    return j.d1 / j.v;
}

}  // namespace detail

/// Tangent angle of the second vertex of the inscribed parallelogram
/// starting at theta1: arctan(p'/p(theta1)) + pi/2 + theta1.
inline double second_angle(const BilliardTable& table, double theta1) {
    return std::atan(detail::log_derivative(table.spec(), theta1)) + 0.5 * pi + theta1;
}

/// G(theta) = (p'/p)(second_angle(theta)) + (p'/p)(theta). Its zeros are the
/// first angles of 4-periodic orbits.
inline double g_function(const BilliardTable& table, double theta) {
    detail::require_symmetric_support(table, "g_function");
    return detail::log_derivative(table.spec(), second_angle(table, theta)) +
           detail::log_derivative(table.spec(), theta);
}

struct PeriodicOrbit4 {
    double theta1 = 0.0;
    double theta2 = 0.0;
    double residual = 0.0;       ///< |G(theta1)|
    double closure_error = 0.0;  ///< max corner error after four conservative steps
    double quad_area = 0.0;
    bool degenerate = false;     ///< tangential zero of G
};

struct FourPeriodicResult {
    bool radon_family = false;  ///< G vanishes identically: a curve of 4-periodic points
    std::vector<PeriodicOrbit4> orbits;
    std::vector<double> rejected;  ///< roots of G that failed the closure check
};

/// The four corners (theta1, theta2), (theta2, theta1 + pi), ... in the
/// table's own parameter, lifted so that each corner advances the previous.
inline std::array<Corner, 4> orbit_corners(const BilliardTable& table, const PeriodicOrbit4& o) {
    double a = table.param_at_tangent_angle(o.theta1);
    double b = table.param_at_tangent_angle(o.theta2);
    while (b <= a) b += two_pi;
    while (b > a + pi) b -= two_pi;  // symmetric tables have star(t) = t + pi
    return {Corner{a, b}, Corner{b, a + pi}, Corner{a + pi, b + pi}, Corner{b + pi, a + two_pi}};
}

/// Twist-chart points of the orbit in order.
inline std::array<TwistPoint, 4> orbit_points(const BilliardTable& table, const PeriodicOrbit4& o) {
    auto cs = orbit_corners(table, o);
    std::array<TwistPoint, 4> out;
    for (int i = 0; i < 4; ++i) out[i] = to_twist(table, cs[i]);
    return out;
}

struct FourPeriodicOptions {
    int scan = 2048;
    double closure_tol = 1e-9;
    double degenerate_tol = 1e-10;
};

namespace detail {

inline PeriodicOrbit4 make_orbit(const BilliardTable& table, double theta1, bool degenerate) {
    PeriodicOrbit4 o;
    o.theta1 = wrap_2pi(theta1);
    if (o.theta1 >= pi) o.theta1 -= pi;
    o.theta2 = second_angle(table, o.theta1);
    o.residual = std::abs(g_function(table, o.theta1));
    o.degenerate = degenerate;
    auto cs = orbit_corners(table, o);
    Corner c = cs[0];
    double err = 0.0;
    double area = 0.0;
    for (int i = 0; i < 4; ++i) {
        area += det(table.point(cs[i].t1), table.point(cs[i].t2));
        c = step_conservative(table, c);
        const Corner& want = i < 3 ? cs[i + 1] : Corner{cs[0].t1 + two_pi, cs[0].t2 + two_pi};
        err = std::max({err, std::abs(c.t1 - want.t1), std::abs(c.t2 - want.t2)});
    }
    o.closure_error = err;
    o.quad_area = 0.5 * area;
    return o;
}

}  // namespace detail

/// All 4-periodic orbits of a centrally symmetric support-function table,
/// from a uniform scan of G on [0, pi) with refinement of every sign change
/// and of every near-tangential zero. Each orbit is reported once, under the
/// smaller of its two first angles modulo pi.
inline FourPeriodicResult find_4periodic(const BilliardTable& table, const FourPeriodicOptions& opt = {}) {
    detail::require_symmetric_support(table, "find_4periodic");
    const int n = opt.scan;
    const double h = pi / n;
    auto g = [&](double x) { return g_function(table, x); };

    std::vector<double> x(n), v(n);
    double gmax = 0.0, qmax = 0.0;
    for (int i = 0; i < n; ++i) {
        x[i] = h * i;
        v[i] = g(x[i]);
        gmax = std::max(gmax, std::abs(v[i]));
        qmax = std::max(qmax, std::abs(detail::log_derivative(table.spec(), x[i])));
    }
    FourPeriodicResult res;
    if (gmax < 1e-9 * std::max(1.0, qmax)) {
        res.radon_family = true;
        return res;
    }

    const double zero_tol = 1e-14 * std::max(1.0, qmax);
    auto sgn = [&](double y) { return std::abs(y) <= zero_tol ? 0 : (y > 0 ? 1 : -1); };

    struct Root {
        double x;
        bool degenerate;
    };
    std::vector<Root> roots_found;
    for (int i = 0; i < n; ++i) {
        const int j = (i + 1) % n;
        const double xj = i + 1 == n ? pi : x[j];
        const int si = sgn(v[i]), sj = sgn(v[j]);
        const int sp = sgn(v[(i + n - 1) % n]);
        if (si == 0) {
            roots_found.push_back({x[i], sp == sj});
        } else if (si * sj < 0) {
            roots_found.push_back({roots::bracketed(g, x[i], xj, v[i], v[j], "find_4periodic"), false});
        } else if (sj != 0 && si == sp && si == sj) {
            // local extremum of |G| that may touch zero without a sign change
            double a = std::abs(v[i]);
            if (a <= std::abs(v[(i + n - 1) % n]) && a <= std::abs(v[j])) {
                auto [xm, gm] = roots::minimize([&](double y) { return std::abs(g(y)); }, x[i] - h, x[i] + h);
                if (gm < opt.degenerate_tol) roots_found.push_back({xm, true});
            }
        }
    }

    for (const auto& r : roots_found) {
        PeriodicOrbit4 o = detail::make_orbit(table, r.x, r.degenerate);
        if (o.closure_error > opt.closure_tol) {
            res.rejected.push_back(o.theta1);
            continue;
        }
        const double partner = wrap_2pi(o.theta2);
        bool dup = std::any_of(res.orbits.begin(), res.orbits.end(), [&](const PeriodicOrbit4& q) {
            return std::abs(wrap_pm_pi(2.0 * (q.theta1 - o.theta1))) < 2e-8 ||
                   std::abs(wrap_pm_pi(2.0 * (q.theta1 - partner))) < 2e-8;
        });
        if (!dup) res.orbits.push_back(o);
    }
    return res;
}

/// k12 = L11 L22 / L12^2 at a 4-periodic pair of tangent angles. For
/// support-function tables the closed form in p, p' and rho is evaluated as
/// well and the two must agree.
inline double k12_of(const BilliardTable& table, double theta1, double theta2) {
    const Vec2 c = table.symmetry_center().value_or(table.origin());
    const double t1 = table.param_at_tangent_angle(theta1);
    const double t2 = table.param_at_tangent_angle(theta2);
    const Vec2 g1 = table.point(t1) - c, g2 = table.point(t2) - c;
    const double l11 = det(table.second(t1), g2);
    const double l22 = det(g1, table.second(t2));
    const double l12 = det(table.tangent(t1), table.tangent(t2));
    const double via_l = l11 * l22 / (l12 * l12);
    if (table.kind() != TableKind::SupportFunction) return via_l;

    Jet a = eval_support(table.spec(), theta1);
    Jet b = eval_support(table.spec(), theta2);
    const double via_p = (a.d1 * a.d1 + a.v * a.v) * (b.d1 * b.d1 + b.v * b.v) /
                         ((a.v + a.d2) * (b.v + b.d2) * a.v * b.v);
    if (std::abs(via_p - via_l) > 1e-6 * std::max(1.0, std::abs(via_p)))
        throw ConsistencyError("k12_of: the angles do not form a 4-periodic pair");
    return via_p;
}

inline double k12_of(const BilliardTable& table, const PeriodicOrbit4& o) {
    return k12_of(table, o.theta1, o.theta2);
}

enum class StabilityType { Saddle, Parabolic, SinkRealNode, SinkFocus, SinkDegenerate };

inline const char* to_string(StabilityType t) {
    switch (t) {
        case StabilityType::Saddle: return "Saddle";
        case StabilityType::Parabolic: return "Parabolic";
        case StabilityType::SinkRealNode: return "SinkRealNode";
        case StabilityType::SinkFocus: return "SinkFocus";
        case StabilityType::SinkDegenerate: return "SinkDegenerate";
    }
    return "?";
}

struct StabilityReport {
    double k12 = 0.0;
    double lambda = 0.0;
    std::array<std::complex<double>, 2> mu;   ///< eigenvalues of the half-period matrix A
    std::array<std::complex<double>, 2> mu4;  ///< multipliers of T^4, mu4 = mu^2
    StabilityType type = StabilityType::Saddle;
    std::optional<double> lambda_minus;
};

inline double lambda_minus(double k12) {
    const double r = std::sqrt(1.0 - k12);
    return (1.0 - r) / (1.0 + r);
}

/// Eigenvalues of A = DT^2 along a symmetric 4-orbit from
/// x^2 - [(1 + lambda)^2 k12 - 2 lambda] x + lambda^2 and the resulting type.
/// Eigenvalues are ordered by modulus, then by value.
inline StabilityReport classify(double k12, double lambda, double tie_tol = 1e-12) {
    if (!(k12 > 0.0) || !std::isfinite(k12)) throw DomainError("classify: k12 must be positive");
    check_lambda(lambda);
    StabilityReport r;
    r.k12 = k12;
    r.lambda = lambda;
    const double tr = (1.0 + lambda) * (1.0 + lambda) * k12 - 2.0 * lambda;
    const double dt = lambda * lambda;
    const double disc = tr * tr - 4.0 * dt;

    bool double_root = false;
    if (std::abs(k12 - 1.0) <= tie_tol) {
        r.type = StabilityType::Parabolic;
    } else if (k12 > 1.0) {
        r.type = StabilityType::Saddle;
    } else {
        r.lambda_minus = lambda_minus(k12);
        if (std::abs(lambda - *r.lambda_minus) <= tie_tol) {
            r.type = StabilityType::SinkDegenerate;
            double_root = true;
        } else if (lambda < *r.lambda_minus) {
            r.type = StabilityType::SinkRealNode;
        } else if (std::abs(tr) <= tie_tol) {
            r.type = StabilityType::SinkDegenerate;  // A has eigenvalues +-i lambda
        } else {
            r.type = StabilityType::SinkFocus;
        }
    }

    using C = std::complex<double>;
    if (double_root) {
        r.mu = {C(0.5 * tr, 0.0), C(0.5 * tr, 0.0)};
    } else if (disc >= 0.0) {
        // stable pairing: the larger root from the quadratic formula, the
        // smaller from the product
        const double big = 0.5 * (tr + std::copysign(std::sqrt(disc), tr));
        const double small = dt / big;
        r.mu = {C(small, 0.0), C(big, 0.0)};
        if (std::abs(r.mu[0]) > std::abs(r.mu[1])) std::swap(r.mu[0], r.mu[1]);
    } else {
        const double im = 0.5 * std::sqrt(-disc);
        r.mu = {C(0.5 * tr, -im), C(0.5 * tr, im)};
    }
    r.mu4 = {r.mu[0] * r.mu[0], r.mu[1] * r.mu[1]};
    if (std::abs(r.mu4[0]) > std::abs(r.mu4[1])) std::swap(r.mu4[0], r.mu4[1]);
    return r;
}

inline StabilityReport classify(const BilliardTable& table, const PeriodicOrbit4& o, double lambda) {
    return classify(k12_of(table, o), lambda);
}

/// DT^4_lambda at the first orbit point, as a product of four differentials.
inline Mat2 orbit_differential(const BilliardTable& table, const PeriodicOrbit4& o, double lambda) {
    auto cs = orbit_corners(table, o);
    Mat2 m = Mat2::Identity();
    for (const auto& c : cs) m = differential(table, lambda, c).m * m;
    return m;
}

/// T^4_lambda in the twist chart with the first coordinate kept continuous:
/// the lifted advance is added and one full turn is removed.
inline TwistPoint step4_lifted(const BilliardTable& table, double lambda, TwistPoint x) {
    double lift = x.t;
    for (int k = 0; k < 4; ++k) {
        TwistStep st = step_twist(table, lambda, x);
        lift += st.gap;
        x = st.next;
    }
    return {lift - two_pi, x.s};
}

struct ManifoldOptions {
    double seed_distance = 1e-7;
    double chord_tol = 1e-4;
    int max_iterations = 1000;
    double converged_length = 1e-12;
    int max_points = 200000;
};

/// Both branches of the unstable manifold of a saddle 4-orbit under T^4,
/// as polylines in the twist chart (first coordinate lifted near theta1).
struct UnstableManifold {
    TwistPoint fixed_point;
    Vec2 direction;  ///< unit unstable eigenvector in the twist chart
    double multiplier = 0.0;
    std::array<std::vector<TwistPoint>, 2> branches;
    std::array<bool, 2> left_phase_space{false, false};
};

/// Grows each branch from a fundamental segment seeded at `seed_distance`
/// along the unstable eigenvector, iterating T^4 and inserting points where
/// consecutive images are more than `chord_tol` apart. Each branch stops once
/// its accumulated arc length reaches `arc_budget`, once its images shrink to
/// a point, or once an image leaves the phase space.
inline UnstableManifold unstable_manifold_sample(const BilliardTable& table, double lambda,
                                                 const PeriodicOrbit4& orbit, double arc_budget,
                                                 const ManifoldOptions& opt = {}) {
    StabilityReport rep = classify(table, orbit, lambda);
    if (rep.type != StabilityType::Saddle) throw NotSaddle("unstable_manifold_sample: orbit is not a saddle");

    UnstableManifold out;
    const TwistPoint p0 = orbit_points(table, orbit)[0];
    out.fixed_point = p0;
    Eigen::EigenSolver<Mat2> es(orbit_differential(table, orbit, lambda));
    int iu = std::abs(es.eigenvalues()(0)) > std::abs(es.eigenvalues()(1)) ? 0 : 1;
    out.multiplier = es.eigenvalues()(iu).real();
    Vec2 v = es.eigenvectors().col(iu).real().normalized();
    out.direction = v;

    auto dist = [](const TwistPoint& a, const TwistPoint& b) { return std::hypot(a.t - b.t, a.s - b.s); };
    const double mu = out.multiplier;

    for (int branch = 0; branch < 2; ++branch) {
        const double sign = branch == 0 ? 1.0 : -1.0;
        auto seed = [&](double sigma) {
            double d = opt.seed_distance * std::pow(mu, sigma);
            return TwistPoint{p0.t + sign * d * v.x(), p0.s + sign * d * v.y()};
        };
        auto image = [&](double sigma, int k) {
            TwistPoint x = seed(sigma);
            for (int i = 0; i < k; ++i) x = step4_lifted(table, lambda, x);
            return x;
        };

        std::vector<TwistPoint>& poly = out.branches[branch];
        poly.push_back(seed(0.0));
        std::vector<double> sig{0.0, 0.5, 1.0};
        std::vector<TwistPoint> pts;
        for (double s : sig) pts.push_back(seed(s));
        double arc = 0.0;
        try {
            for (int k = 0; k < opt.max_iterations; ++k) {
                if (k > 0)
                    for (auto& x : pts) x = step4_lifted(table, lambda, x);
                // refine until every chord is short enough
                for (std::size_t i = 0; i + 1 < sig.size();) {
                    if (dist(pts[i], pts[i + 1]) > opt.chord_tol && sig[i + 1] - sig[i] > 1e-13) {
                        double m = 0.5 * (sig[i] + sig[i + 1]);
                        sig.insert(sig.begin() + static_cast<long>(i) + 1, m);
                        pts.insert(pts.begin() + static_cast<long>(i) + 1, image(m, k));
                    } else {
                        ++i;
                    }
                }
                double seg = 0.0;
                for (std::size_t i = 1; i < pts.size(); ++i) {
                    seg += dist(pts[i - 1], pts[i]);
                    poly.push_back(pts[i]);
                    arc += dist(pts[i - 1], pts[i]);
                    if (arc >= arc_budget) break;
                }
                if (arc >= arc_budget || static_cast<int>(poly.size()) >= opt.max_points) break;
                if (k > 0 && seg < opt.converged_length) break;
                // thin the parameter set where the images have contracted
                std::vector<double> ks{sig.front()};
                std::vector<TwistPoint> kp{pts.front()};
                for (std::size_t i = 1; i + 1 < sig.size(); ++i) {
                    if (dist(kp.back(), pts[i]) > 0.25 * opt.chord_tol) {
                        ks.push_back(sig[i]);
                        kp.push_back(pts[i]);
                    }
                }
                ks.push_back(sig.back());
                kp.push_back(pts.back());
                sig = std::move(ks);
                pts = std::move(kp);
            }
        } catch (const ChartError&) {
            out.left_phase_space[branch] = true;
        }
    }
    return out;
}

}  // namespace sympb
