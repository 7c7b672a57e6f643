#pragma once

// Attractor approximations for T_lambda: orbit clouds, the cone-field test,
// the graph transform in the strong-dissipation regime, rotation intervals,
// zero-section intersections and an empirical non-graph certificate.

#include "sympb/boundary.hpp"
#include "sympb/core.hpp"
#include "sympb/map.hpp"
#include "sympb/parallel.hpp"
#include "sympb/roots.hpp"
#include "sympb/spline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace sympb {

struct CloudPoint {
    double theta = 0.0;  ///< tangent angle in [0, 2 pi)
    double psi = 0.0;    ///< tangent-angle gap in (0, pi)
    double s = 0.0;      ///< twist-chart fiber coordinate
    int seed_id = 0;
    int n = 0;           ///< iterate index, >= n0
    double lift = 0.0;   ///< unwrapped boundary parameter
};

struct AttractorCloud {
    std::vector<CloudPoint> points;  ///< grouped by seed, increasing n
    double lambda = 1.0;
    int n = 0;
    int n0 = 0;
    std::string table_id;
    std::vector<double> seed_psi0;   ///< initial psi of each seed (for coloring)
    std::vector<bool> terminated;    ///< orbit left the chart before n
    std::vector<std::size_t> seed_offset;  ///< points of seed i: [offset[i], offset[i+1])
    double s_scale = 1.0;            ///< max |s| over the phase cylinder
};

/// Seeds uniform in theta in [0, 2 pi) and psi in (margin, pi - margin),
/// converted to the twist chart. Deterministic for a given rng seed.
template <Boundary B>
std::vector<TwistPoint> random_plot_seeds(const B& b, int count, std::uint64_t rng_seed,
                                          std::vector<double>* psi0 = nullptr, double margin = 0.05) {
    std::mt19937_64 rng(rng_seed);
    std::uniform_real_distribution<double> ut(0.0, two_pi), up(margin, pi - margin);
    std::vector<TwistPoint> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        double th = ut(rng);
        double ps = up(rng);
        out.push_back(plot_to_twist(b, PlotPoint{th, ps}));
        if (psi0) psi0->push_back(ps);
    }
    return out;
}

/// Orbits of T_lambda from each seed, keeping iterates n0..n. An orbit that
/// leaves the chart (numerically, at the phase-space boundary) is flagged and
/// truncated.
template <Boundary B>
AttractorCloud iterate_cloud(const B& b, double lambda, const std::vector<TwistPoint>& seeds, int n, int n0,
                             int threads = 1) {
    if (seeds.empty()) throw ConfigError("iterate_cloud: empty seed list");
    if (n0 < 0 || n <= n0) throw ConfigError("iterate_cloud: need n > n0 >= 0");
    check_lambda(lambda);

    std::vector<std::vector<CloudPoint>> per(seeds.size());
    std::vector<char> term(seeds.size(), 0);
    parallel_for(seeds.size(), threads, [&](std::size_t i) {
        TwistPoint x = seeds[i];
        double lift = x.t;
        auto& out = per[i];
        out.reserve(static_cast<std::size_t>(n - n0 + 1));
        try {
            for (int k = 0; k <= n; ++k) {
                Corner c = from_twist(b, x);
                if (k >= n0) {
                    PlotPoint q = to_plot(b, c);
                    out.push_back({q.theta, q.psi, x.s, static_cast<int>(i), k, lift});
                }
                if (k == n) break;
                lift += c.gap();
                x = {wrap_2pi(c.t2), lambda * L2(b, c.t1, c.t2)};
            }
        } catch (const ChartError&) {
            term[i] = 1;
        }
    });

    AttractorCloud cloud;
    cloud.lambda = lambda;
    cloud.n = n;
    cloud.n0 = n0;
    cloud.s_scale = phase_band_max(b);
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        cloud.seed_offset.push_back(cloud.points.size());
        cloud.points.insert(cloud.points.end(), per[i].begin(), per[i].end());
        cloud.terminated.push_back(term[i] != 0);
    }
    cloud.seed_offset.push_back(cloud.points.size());
    return cloud;
}

// ---------------------------------------------------------------------------
// Cone field

struct ConeResult {
    bool pass = true;
    std::optional<TwistPoint> failing;
    double worst_ratio = 0.0;  ///< max |image slope| / alpha over the checked samples
    int samples = 0;
};

/// Pushes the cone edges (1, +-alpha) through DT_lambda at a grid of states
/// in S x [-band_M, band_M] (restricted to the phase space) and requires the
/// image slope to be at most mu0 * alpha with a forward-pointing image. Stops
/// at the first failing state.
template <Boundary B>
ConeResult cone_check(const B& b, double lambda, double alpha, double band_M, int n_t = 256, int n_s = 64,
                      double mu0 = 0.9) {
    ConeResult res;
    for (int i = 0; i < n_t; ++i) {
        const double t = two_pi * i / n_t;
        const PhaseBounds pb = phase_bounds(b, t);
        for (int j = 0; j < n_s; ++j) {
            const double s = -band_M + 2.0 * band_M * (j + 0.5) / n_s;
            if (!(s > pb.psi1 && s < pb.psi2)) continue;
            const TwistPoint x{t, s};
            const Mat2 m = differential(b, lambda, x).m;
            ++res.samples;
            for (double a : {alpha, -alpha}) {
                const Vec2 w = m * Vec2(1.0, a);
                const double ratio = w.x() > 0.0 ? std::abs(w.y()) / (alpha * w.x())
                                                 : std::numeric_limits<double>::infinity();
                res.worst_ratio = std::max(res.worst_ratio, ratio);
                if (ratio > mu0) {
                    res.pass = false;
                    res.failing = x;
                    return res;
                }
            }
        }
    }
    return res;
}

/// Band on which the strong-dissipation cone test is run: the image of the
/// phase space lies in |s| <= lambda M.
template <Boundary B>
double absorbing_band(const B& b, double lambda) {
    return lambda * phase_band_max(b);
}

/// Largest lambda in (lo, hi] passing the cone test on the absorbing band,
/// by bisection (the test is monotone in practice, not in theory).
template <Boundary B>
double largest_contracting_lambda(const B& b, double alpha = 0.5, double lo = 1e-3, double hi = 1.0,
                                  int iterations = 40) {
    const double M = phase_band_max(b);
    auto ok = [&](double lam) { return cone_check(b, lam, alpha, lam * M).pass; };
    if (ok(hi)) return hi;
    if (!ok(lo)) throw NotContracted("largest_contracting_lambda: cone test fails already at the lower bound");
    for (int i = 0; i < iterations; ++i) {
        double mid = 0.5 * (lo + hi);
        (ok(mid) ? lo : hi) = mid;
    }
    return lo;
}

// ---------------------------------------------------------------------------
// Graph transform

struct AttractorGraph {
    std::vector<double> t;      ///< uniform parameter grid 2 pi j / N
    std::vector<double> eta;    ///< graph values (twist s units)
    std::vector<double> theta;  ///< tangent angle at each node
    double lambda = 0.0;
    double sup_change = 0.0;
    double slope_bound = 0.0;   ///< cone parameter alpha
    double max_slope = 0.0;     ///< max |eta(t_{j+1}) - eta(t_j)| / dt
    int sweeps = 0;
    std::vector<double> history;  ///< sup change of each sweep
    PeriodicSpline spline;

    double operator()(double x) const { return spline(x); }
};

struct GraphOptions {
    double alpha = 0.5;
    int max_sweeps = 500;
    int threads = 1;
};

/// Fixed point of the graph transform eta -> p2 T(g^{-1}(t), eta(g^{-1}(t)))
/// with g(t) = p1 T(t, eta(t)), from eta = 0 until the sup-norm change drops
/// below tol. Requires the cone test on the absorbing band.
template <Boundary B>
AttractorGraph graph_transform_fixed_point(const B& b, double lambda, int grid_size, double tol,
                                           const GraphOptions& opt = {}) {
    check_lambda(lambda);
    if (grid_size < 16) throw ConfigError("graph_transform_fixed_point: grid too small");
    const double band = absorbing_band(b, lambda);
    ConeResult cone = cone_check(b, lambda, opt.alpha, band);
    if (!cone.pass) throw NotContracted("graph transform: cone test fails; lower lambda");

    const int n = grid_size;
    const double h = two_pi / n;
    AttractorGraph g;
    g.lambda = lambda;
    g.slope_bound = opt.alpha;
    g.t.resize(n);
    g.theta.resize(n);
    for (int j = 0; j < n; ++j) {
        g.t[j] = h * j;
        g.theta[j] = wrap_2pi(b.tangent_angle(g.t[j]));
    }
    g.eta.assign(n, 0.0);

    std::vector<double> gv(n + 1), next(n);
    for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
        g.spline = PeriodicSpline(g.eta);
        auto advance = [&](double u) {
            try {
                return u + from_twist(b, TwistPoint{u, g.spline(u)}).gap();
            } catch (const ChartError&) {
                throw NotContracted("graph transform: graph left the phase space");
            }
        };
        parallel_for(static_cast<std::size_t>(n), opt.threads, [&](std::size_t j) { gv[j] = advance(g.t[j]); });
        gv[n] = gv[0] + two_pi;
        for (int j = 0; j < n; ++j)
            if (!(gv[j + 1] > gv[j])) throw NotContracted("graph transform: base map not monotone");

        parallel_for(static_cast<std::size_t>(n), opt.threads, [&](std::size_t k) {
            double target = g.t[k];
            while (target < gv[0]) target += two_pi;
            while (target >= gv[0] + two_pi) target -= two_pi;
            auto it = std::upper_bound(gv.begin(), gv.end(), target);
            const int j = static_cast<int>(it - gv.begin()) - 1;
            const double a = h * j, c = h * (j + 1);
            const double u = roots::bracketed([&](double x) { return advance(x) - target; }, a, c,
                                              gv[j] - target, gv[j + 1] - target, "graph preimage");
            Corner cr = from_twist(b, TwistPoint{u, g.spline(u)});
            next[k] = lambda * L2(b, cr.t1, cr.t2);
        });

        double change = 0.0;
        for (int j = 0; j < n; ++j) change = std::max(change, std::abs(next[j] - g.eta[j]));
        g.eta = next;
        g.history.push_back(change);
        g.sup_change = change;
        g.sweeps = sweep + 1;
        if (change < tol) break;
    }
    g.spline = PeriodicSpline(g.eta);
    if (!(g.sup_change < tol)) throw NotContracted("graph transform: no convergence within the sweep limit");
    for (int j = 0; j < n; ++j)
        g.max_slope = std::max(g.max_slope, std::abs(g.eta[(j + 1) % n] - g.eta[j]) / h);
    return g;
}

/// max over `probes` off-grid states (t, eta(t)) of |s' - eta(t')| where
/// (t', s') = T_lambda(t, eta(t)).
template <Boundary B>
double invariance_residual(const B& b, const AttractorGraph& g, int probes = 1024) {
    double worst = 0.0;
    for (int i = 0; i < probes; ++i) {
        double t = two_pi * (i + 0.5) / probes;
        TwistStep st = step_twist(b, g.lambda, TwistPoint{t, g(t)});
        worst = std::max(worst, std::abs(st.next.s - g(st.next.t)));
    }
    return worst;
}

struct ZeroHits {
    bool whole_circle = false;  ///< eta vanishes identically (within tol)
    std::vector<double> theta;  ///< tangent angles of the zeros, increasing in [0, 2 pi)
    bool empty_violation = false;  ///< no zero found although the graph must meet s = 0
};

/// Zeros of the graph: sign changes of the interpolant on a grid eight times
/// finer than the nodes, refined by bracketed root finding, plus tangential
/// touches with |eta| < tol.
template <Boundary B>
ZeroHits zero_section_hits(const B& b, const AttractorGraph& g, double tol) {
    ZeroHits hits;
    double emax = 0.0;
    for (double e : g.eta) emax = std::max(emax, std::abs(e));
    if (emax < tol) {
        hits.whole_circle = true;
        return hits;
    }
    const int m = 8 * static_cast<int>(g.eta.size());
    const double h = two_pi / m;
    std::vector<double> ts;
    double x0 = 0.0, f0 = g(0.0);
    for (int i = 1; i <= m; ++i) {
        double x1 = h * i, f1 = g(x1);
        if (f0 == 0.0) {
            ts.push_back(x0);
        } else if ((f0 < 0.0) != (f1 < 0.0) && f1 != 0.0) {
            ts.push_back(roots::bracketed([&](double x) { return g(x); }, x0, x1, f0, f1, "zero hit"));
        } else if (std::abs(f0) < tol) {
            double fp = g(x0 - h);
            if (std::abs(f0) <= std::abs(fp) && std::abs(f0) <= std::abs(f1) && (fp < 0.0) == (f0 < 0.0)) {
                auto [xm, vm] = roots::minimize([&](double x) { return std::abs(g(x)); }, x0 - h, x1);
                if (vm < tol) ts.push_back(xm);
            }
        }
        x0 = x1;
        f0 = f1;
    }
    for (double t : ts) hits.theta.push_back(wrap_2pi(b.tangent_angle(t)));
    std::sort(hits.theta.begin(), hits.theta.end());
    hits.empty_violation = hits.theta.empty();
    return hits;
}

// ---------------------------------------------------------------------------
// Rotation numbers and non-graph certificate

struct RotationInterval {
    double rho_minus = 0.0;
    double rho_plus = 0.0;
    int n_used = 0;               ///< iterates in each averaging window
    std::vector<double> per_seed;  ///< finite-time average per surviving seed
};

/// Finite-time rotation averages (lift advance) / (2 pi n) over the second
/// half of the post-transient iterates; the interval spans their min and max.
inline RotationInterval rotation_interval(const AttractorCloud& cloud) {
    if (cloud.n - cloud.n0 < 1000) throw ConfigError("rotation_interval: need n - n0 >= 1000");
    const int start = cloud.n0 + (cloud.n - cloud.n0) / 2;
    RotationInterval r;
    r.n_used = cloud.n - start;
    const std::size_t seeds = cloud.seed_offset.size() - 1;
    for (std::size_t i = 0; i < seeds; ++i) {
        if (cloud.terminated[i]) continue;
        const std::size_t a = cloud.seed_offset[i], e = cloud.seed_offset[i + 1];
        if (e - a != static_cast<std::size_t>(cloud.n - cloud.n0 + 1)) continue;
        const double l0 = cloud.points[a + static_cast<std::size_t>(start - cloud.n0)].lift;
        const double l1 = cloud.points[e - 1].lift;
        r.per_seed.push_back((l1 - l0) / (two_pi * r.n_used));
    }
    if (r.per_seed.empty()) throw ConfigError("rotation_interval: no complete orbit in the cloud");
    auto [lo, hi] = std::minmax_element(r.per_seed.begin(), r.per_seed.end());
    r.rho_minus = *lo;
    r.rho_plus = *hi;
    return r;
}

struct NonGraphWitness {
    CloudPoint low;
    CloudPoint high;
    double gap = 0.0;  ///< high.s - low.s
};

/// Two cloud points in one theta bin whose s values differ by at least
/// s_gap * s_scale (the phase-band maximum). Returns the widest such pair.
inline std::optional<NonGraphWitness> non_graph_witness(const AttractorCloud& cloud, double bin_width,
                                                        double s_gap) {
    if (!(bin_width > 0.0)) throw ConfigError("non_graph_witness: bin width must be positive");
    const int bins = static_cast<int>(std::ceil(two_pi / bin_width));
    std::vector<int> lo(bins, -1), hi(bins, -1);
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        const auto& p = cloud.points[i];
        int k = std::min(bins - 1, static_cast<int>(p.theta / bin_width));
        if (lo[k] < 0 || p.s < cloud.points[lo[k]].s) lo[k] = static_cast<int>(i);
        if (hi[k] < 0 || p.s > cloud.points[hi[k]].s) hi[k] = static_cast<int>(i);
    }
    std::optional<NonGraphWitness> best;
    for (int k = 0; k < bins; ++k) {
        if (lo[k] < 0) continue;
        double gap = cloud.points[hi[k]].s - cloud.points[lo[k]].s;
        if (gap >= s_gap * cloud.s_scale && (!best || gap > best->gap))
            best = NonGraphWitness{cloud.points[lo[k]], cloud.points[hi[k]], gap};
    }
    return best;
}

}  // namespace sympb
