#pragma once

// Birkhoff periodic orbits of rotation type p/q found as maxima of the
// discrete action sum_i L(t_i, t_{i+1}) (twice the area of the inscribed
// polygon), and the compatible origin built from a maximal 4-orbit.

#include "sympb/boundary.hpp"
#include "sympb/map.hpp"
#include "sympb/roots.hpp"
#include "sympb/table.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <vector>

namespace sympb {

struct BirkhoffOrbit {
    int p = 1;
    int q = 4;
    std::vector<double> t;  ///< lifted, strictly increasing; t[q] := t[0] + 2 pi p
    double action = 0.0;
    double gradient_norm = 0.0;
    int sweeps = 0;
};

struct ActionOptions {
    int max_sweeps = 20000;
    double sweep_tol = 1e-12;
    int newton_steps = 8;
    double gradient_tol = 1e-13;
};

namespace detail {

template <Boundary B>
double action_gradient(const B& b, double prev, double cur, double next) {
    return det(b.tangent(cur), b.point(next) - b.point(prev));
}

}  // namespace detail

/// Monotone cyclic coordinate ascent from `init`, then Newton polish on the
/// gradient of the action. Each coordinate update puts gamma(t_i) at the
/// point of its arc farthest from the chord of its neighbours, so the action
/// never decreases.
template <Boundary B>
BirkhoffOrbit maximize_action(const B& b, int p, int q, std::vector<double> init,
                              const ActionOptions& opt = {}) {
    if (q < 3 || p < 1 || 2 * p >= q) throw DomainError("maximize_action: need q >= 3, 0 < p < q/2");
    if (static_cast<int>(init.size()) != q) throw DomainError("maximize_action: wrong seed size");
    std::vector<double>& t = init;
    const double wrap = two_pi * p;
    auto at = [&](int i) {
        if (i < 0) return t[i + q] - wrap;
        if (i >= q) return t[i - q] + wrap;
        return t[i];
    };

    BirkhoffOrbit out;
    out.p = p;
    out.q = q;
    int sweep = 0;
    for (; sweep < opt.max_sweeps; ++sweep) {
        double moved = 0.0;
        for (int i = 0; i < q; ++i) {
            const double prev = at(i - 1);
            const double next = at(i + 1);
            const Vec2 chord = b.point(next) - b.point(prev);
            auto f = [&](double u) { return det(b.tangent(u), chord); };
            double u = roots::bracketed(f, prev, next, "action coordinate ascent");
            moved = std::max(moved, std::abs(u - t[i]));
            t[i] = u;
        }
        if (moved < opt.sweep_tol) break;
    }
    out.sweeps = sweep;

    for (int it = 0; it < opt.newton_steps; ++it) {
        Eigen::VectorXd g(q);
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(q, q);
        for (int i = 0; i < q; ++i) {
            const double prev = at(i - 1), cur = t[i], next = at(i + 1);
            g(i) = detail::action_gradient(b, prev, cur, next);
            h(i, i) = det(b.second(cur), b.point(next) - b.point(prev));
            h(i, (i + 1) % q) += det(b.tangent(cur), b.tangent(next));
            h(i, (i + q - 1) % q) += det(b.tangent(prev), b.tangent(cur));
        }
        if (g.cwiseAbs().maxCoeff() < opt.gradient_tol) break;
        Eigen::VectorXd step = h.fullPivLu().solve(-g);
        if (!step.allFinite() || step.cwiseAbs().maxCoeff() > 1e-3) break;
        for (int i = 0; i < q; ++i) t[i] += step(i);
    }

    double action = 0.0, gmax = 0.0;
    const Vec2 o = b.origin();
    for (int i = 0; i < q; ++i) {
        action += det(b.point(t[i]) - o, b.point(at(i + 1)) - o);
        gmax = std::max(gmax, std::abs(detail::action_gradient(b, at(i - 1), t[i], at(i + 1))));
    }
    out.t = t;
    out.action = action;
    out.gradient_norm = gmax;
    return out;
}

/// Multistart search for action-maximizing p/q orbits. Distinct orbits are
/// returned by decreasing action.
template <Boundary B>
std::vector<BirkhoffOrbit> birkhoff_orbits(const B& b, int p, int q, int starts = 8,
                                           const ActionOptions& opt = {}) {
    std::vector<BirkhoffOrbit> found;
    for (int k = 0; k < starts; ++k) {
        double t0 = two_pi * k / (static_cast<double>(starts) * q);
        std::vector<double> init(q);
        for (int i = 0; i < q; ++i) init[i] = t0 + two_pi * p * i / q;
        BirkhoffOrbit orb = maximize_action(b, p, q, init, opt);
        if (orb.gradient_norm > 1e-9) continue;
        bool dup = std::any_of(found.begin(), found.end(), [&](const BirkhoffOrbit& o) {
            for (double a : o.t) {
                double best = pi;
                for (double c : orb.t) best = std::min(best, circle_distance(a, c));
                if (best > 1e-7) return false;
            }
            return true;
        });
        if (!dup) found.push_back(std::move(orb));
    }
    std::sort(found.begin(), found.end(),
              [](const BirkhoffOrbit& a, const BirkhoffOrbit& c) { return a.action > c.action; });
    return found;
}

/// Intersection of the diagonals of the quadrilateral a b c d.
inline Vec2 diagonal_intersection(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    // a + x (c - a) = b + y (d - b)
    Mat2 m;
    m.col(0) = c - a;
    m.col(1) = b - d;
    Vec2 xy = m.fullPivLu().solve(b - a);
    return a + xy.x() * (c - a);
}

/// An origin making one conservative 4-periodic orbit lie on the zero
/// section: the symmetry center for centrally symmetric tables, otherwise the
/// diagonal intersection of the maximal-area inscribed quadrilateral.
inline Vec2 compatible_origin(const BilliardTable& table) {
    if (auto c = table.symmetry_center()) return *c;
    auto orbits = birkhoff_orbits(table, 1, 4);
    if (orbits.empty()) throw SearchError("compatible_origin: no 4-periodic orbit found");
    const auto& t = orbits.front().t;
    Vec2 o = diagonal_intersection(table.point(t[0]), table.point(t[1]), table.point(t[2]),
                                   table.point(t[3]));
    if (!table.contains(o)) throw SearchError("compatible_origin: diagonal point not interior");
    return o;
}

}  // namespace sympb
