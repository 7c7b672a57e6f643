#include "test_support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace sympb;
using namespace sympb::testing;

namespace {

// Hand-written p'/p for p = 1 + eps cos 2 theta.
double q_oval(double x, double eps = 0.1) { return -2.0 * eps * std::sin(2 * x) / (1 + eps * std::cos(2 * x)); }

double g_oval(double x) {
    double th2 = std::atan(q_oval(x)) + pi / 2 + x;
    return q_oval(th2) + q_oval(x);
}

// Transversal zeros of the oracle G on [0, pi), from a staggered scan.
int count_sign_changes(int n = 2048) {
    int count = 0;
    double h = pi / n;
    double prev = g_oval(0.5 * h);
    for (int i = 1; i <= n; ++i) {
        double cur = g_oval((i % n + 0.5) * h);
        if ((prev < 0) != (cur < 0)) ++count;
        prev = cur;
    }
    return count;
}

double point_to_polyline(const TwistPoint& p, const std::vector<TwistPoint>& poly) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
        Vec2 a(poly[i].t, poly[i].s), b(poly[i + 1].t, poly[i + 1].s), x(p.t, p.s);
        Vec2 d = b - a;
        double u = d.squaredNorm() > 0 ? std::clamp((x - a).dot(d) / d.squaredNorm(), 0.0, 1.0) : 0.0;
        best = std::min(best, (a + u * d - x).norm());
    }
    return best;
}

const PeriodicOrbit4& axis_orbit(const FourPeriodicResult& r) {
    for (const auto& o : r.orbits)
        if (circle_distance(2 * o.theta1, 0.0) < 1e-8) return o;
    throw std::runtime_error("axis orbit missing");
}

const PeriodicOrbit4& other_orbit(const FourPeriodicResult& r) {
    for (const auto& o : r.orbits)
        if (circle_distance(2 * o.theta1, 0.0) > 1e-3) return o;
    throw std::runtime_error("second orbit missing");
}

}  // namespace

TEST(GFunction, Examples) {
    BilliardTable circle(TableSpec::circle());
    for (double x : {0.0, 0.7, 2.0}) EXPECT_EQ(g_function(circle, x), 0.0);
    BilliardTable oval(oval_spec());
    EXPECT_NEAR(g_function(oval, 0.0), 0.0, 1e-15);
    EXPECT_NEAR(g_function(oval, pi / 8), g_oval(pi / 8), 1e-14);
    EXPECT_GT(std::abs(g_function(oval, pi / 8)), 1e-3);
    // pi-periodic
    EXPECT_NEAR(g_function(oval, 0.4), g_function(oval, 0.4 + pi), 1e-14);
}

TEST(GFunction, Preconditions) {
    EXPECT_THROW(g_function(BilliardTable(fig3_spec()), 0.1), KindMismatch);
    EXPECT_THROW(g_function(BilliardTable(fig2_spec()), 0.1), GeometryError);
    EXPECT_THROW(find_4periodic(BilliardTable(fig2_spec())), GeometryError);
}

TEST(Find4Periodic, Oval) {
    BilliardTable oval(oval_spec());
    auto r = find_4periodic(oval);
    ASSERT_FALSE(r.radon_family);
    EXPECT_TRUE(r.rejected.empty());
    // each orbit has two first angles modulo pi
    EXPECT_EQ(2 * static_cast<int>(r.orbits.size()), count_sign_changes());
    const auto& o = axis_orbit(r);
    EXPECT_LT(o.residual, 1e-10);
    EXPECT_LT(o.closure_error, 1e-9);
    EXPECT_NEAR(o.theta2, pi / 2, 1e-12);
    for (const auto& q : r.orbits) {
        EXPECT_LT(q.residual, 1e-10);
        EXPECT_LT(q.closure_error, 1e-9);
        EXPECT_FALSE(q.degenerate);
    }
    // the other orbit is the minimax one: smaller area
    EXPECT_LT(other_orbit(r).quad_area, o.quad_area);
}

TEST(Find4Periodic, RadonCircle) {
    auto r = find_4periodic(BilliardTable(TableSpec::circle()));
    EXPECT_TRUE(r.radon_family);
    EXPECT_TRUE(r.orbits.empty());
}

TEST(Find4Periodic, Figure1Table) {
    BilliardTable t(fig1_spec());
    auto r = find_4periodic(t);
    ASSERT_FALSE(r.radon_family);
    ASSERT_FALSE(r.orbits.empty());
    for (const auto& o : r.orbits) {
        EXPECT_LT(o.closure_error, 1e-9);
        EXPECT_NO_THROW(k12_of(t, o));
        // zero section with the center as origin
        for (const auto& p : orbit_points(t, o)) EXPECT_NEAR(p.s, 0.0, 1e-12);
    }
}

TEST(K12, Values) {
    BilliardTable circle(TableSpec::circle());
    EXPECT_NEAR(k12_of(circle, 0.0, pi / 2), 1.0, 1e-14);
    BilliardTable oval(oval_spec());
    EXPECT_NEAR(k12_of(oval, 0.0, pi / 2), 0.99 / 0.91, 1e-8);
    EXPECT_THROW(k12_of(oval, 0.3, 0.3 + pi / 2), ConsistencyError);
}

TEST(K12, DualFormulaOnAllOrbits) {
    for (auto spec : {oval_spec(0.1), oval_spec(0.2), fig1_spec()}) {
        BilliardTable t(spec);
        for (const auto& o : find_4periodic(t).orbits) {
            auto l = generating_L(t, o.theta1, orbit_corners(t, o)[0].t2);
            double via_l = l.L11 * l.L22 / (l.L12 * l.L12);
            EXPECT_NEAR(k12_of(t, o), via_l, 1e-8);
        }
    }
}

TEST(Classify, Parabolic) {
    auto r = classify(1.0, 0.5);
    EXPECT_EQ(r.type, StabilityType::Parabolic);
    EXPECT_NEAR(r.mu[0].real(), 0.25, 1e-12);
    EXPECT_NEAR(r.mu[1].real(), 1.0, 1e-12);
    EXPECT_NEAR(r.mu4[0].real(), 0.0625, 1e-12);
    EXPECT_NEAR(r.mu4[1].real(), 1.0, 1e-12);
}

TEST(Classify, SinkCases) {
    EXPECT_NEAR(lambda_minus(0.75), 1.0 / 3.0, 1e-15);
    auto d = classify(0.75, 1.0 / 3.0);
    EXPECT_EQ(d.type, StabilityType::SinkDegenerate);
    ASSERT_TRUE(d.lambda_minus);
    for (auto m : d.mu4) EXPECT_NEAR(std::abs(m - 1.0 / 9.0), 0.0, 1e-12);
    // companion matrix check of the double root of A
    Mat2 comp;
    double tr = (16.0 / 9.0) * 0.75 - 2.0 / 3.0;
    comp << 0.0, -1.0 / 9.0, 1.0, tr;
    Eigen::EigenSolver<Mat2> es(comp);
    for (int i = 0; i < 2; ++i) EXPECT_NEAR(std::abs(es.eigenvalues()(i) - d.mu[0]), 0.0, 1e-7);

    auto f = classify(0.75, 0.6);
    EXPECT_EQ(f.type, StabilityType::SinkFocus);
    EXPECT_NEAR(std::abs(f.mu4[0]), 0.36, 1e-12);
    EXPECT_NEAR(std::abs(f.mu4[1]), 0.36, 1e-12);
    EXPECT_GT(std::abs(f.mu[0].imag()), 0.0);

    auto n = classify(0.75, 0.2);
    EXPECT_EQ(n.type, StabilityType::SinkRealNode);
    double l4 = std::pow(0.2, 4);
    EXPECT_LT(l4, n.mu4[0].real());
    EXPECT_LT(n.mu4[0].real(), n.mu4[1].real());
    EXPECT_LT(n.mu4[1].real(), 1.0);

    double lam = 0.5;
    auto iv = classify(2 * lam / ((1 + lam) * (1 + lam)), lam);
    EXPECT_EQ(iv.type, StabilityType::SinkDegenerate);
    for (auto m : iv.mu4) EXPECT_NEAR(std::abs(m + lam * lam), 0.0, 1e-12);
}

TEST(Classify, Errors) {
    EXPECT_THROW(classify(0.0, 0.5), DomainError);
    EXPECT_THROW(classify(-1.0, 0.5), DomainError);
    EXPECT_THROW(classify(1.2, 0.0), DomainError);
    EXPECT_THROW(classify(1.2, 1.5), DomainError);
}

TEST(Classify, EigenvalueIdentitiesAndSaddleOrdering) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uk(0.01, 3.0), ul(0.001, 0.999);
    for (int i = 0; i < 1000; ++i) {
        double k = uk(rng), lam = ul(rng);
        auto r = classify(k, lam);
        auto prod = r.mu[0] * r.mu[1];
        auto sum = r.mu[0] + r.mu[1];
        EXPECT_NEAR(std::abs(prod - lam * lam), 0.0, 1e-9);
        EXPECT_NEAR(std::abs(sum - ((1 + lam) * (1 + lam) * k - 2 * lam)), 0.0, 1e-9);
        if (k > 1.0) {
            EXPECT_EQ(r.type, StabilityType::Saddle);
            double m1 = r.mu4[0].real(), m2 = r.mu4[1].real();
            EXPECT_GT(m1, 0.0);
            EXPECT_LT(m1, std::pow(lam, 4) + 1e-9);
            EXPECT_GT(m2, 1.0 - 1e-9);
        } else {
            EXPECT_NE(r.type, StabilityType::Saddle);
        }
    }
}

TEST(Orbits, SurviveDissipation) {
    BilliardTable oval(oval_spec());
    auto r = find_4periodic(oval);
    for (const auto& o : r.orbits) {
        auto pts = orbit_points(oval, o);
        for (double lam : {0.1, 0.5, 0.9}) {
            for (int i = 0; i < 4; ++i) {
                auto nx = step_twist(oval, lam, pts[i]).next;
                EXPECT_LT(circle_distance(nx.t, pts[(i + 1) % 4].t), 1e-9);
                EXPECT_NEAR(nx.s, 0.0, 1e-9);
            }
        }
    }
}

TEST(Orbits, DifferentialMatchesClassification) {
    BilliardTable oval(oval_spec());
    for (const auto& o : find_4periodic(oval).orbits) {
        for (double lam : {0.05, 0.5, 0.9}) {
            auto rep = classify(oval, o, lam);
            Eigen::EigenSolver<Mat2> es(orbit_differential(oval, o, lam));
            std::array<std::complex<double>, 2> ev{es.eigenvalues()(0), es.eigenvalues()(1)};
            if (std::abs(ev[0]) > std::abs(ev[1])) std::swap(ev[0], ev[1]);
            for (int i = 0; i < 2; ++i) {
                // conjugate pairs may come in either order
                double err = std::min(std::abs(ev[i] - rep.mu4[i]), std::abs(ev[i] - std::conj(rep.mu4[i])));
                EXPECT_LT(err, 1e-8 * std::max(1.0, std::abs(rep.mu4[i])));
            }
        }
    }
}

TEST(UnstableManifold, RejectsSinks) {
    BilliardTable oval(oval_spec());
    auto r = find_4periodic(oval);
    EXPECT_THROW(unstable_manifold_sample(oval, 0.05, other_orbit(r), 1.0), NotSaddle);
}

TEST(UnstableManifold, ConnectsToSinksAndIsInvariant) {
    BilliardTable oval(oval_spec());
    auto r = find_4periodic(oval);
    const double lam = 0.05;
    auto m = unstable_manifold_sample(oval, lam, axis_orbit(r), 20.0);
    auto sink = orbit_points(oval, other_orbit(r));
    for (int b = 0; b < 2; ++b) {
        const auto& poly = m.branches[b];
        ASSERT_GT(poly.size(), 10u);
        EXPECT_FALSE(m.left_phase_space[b]);
        // omega-limit: the end of each branch sits on the sink orbit
        const auto& end = poly.back();
        double best = 1e9;
        for (const auto& p : sink) best = std::min(best, std::hypot(wrap_pm_pi(end.t - p.t), end.s - p.s));
        EXPECT_LT(best, 1e-4) << "branch " << b;
        // set invariance: images of the polyline stay on the polyline
        double worst = 0.0;
        for (std::size_t i = 0; i < poly.size(); i += 7) {
            TwistPoint img = step4_lifted(oval, lam, poly[i]);
            worst = std::max(worst, point_to_polyline(img, poly));
        }
        EXPECT_LT(worst, 1e-4) << "branch " << b;
    }
}
