#include "test_support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace sympb;
using namespace sympb::testing;

TEST(GeneratingL, Examples) {
    BilliardTable c(TableSpec::circle());
    EXPECT_NEAR(generating_L(c, 0.0, pi / 2).L, 1.0, 1e-15);
    BilliardTable t(fig1_spec());
    for (double u : {0.0, 1.3, 4.0}) EXPECT_DOUBLE_EQ(generating_L(t, u, u).L, 0.0);
}

TEST(GeneratingL, PartialsMatchFiniteDifferences) {
    BilliardTable t(fig1_spec());
    const double h = 1e-5;
    auto L = [&](double a, double b) { return generating_L(t, a, b).L; };
    for (auto [a, b] : {std::pair{0.0, pi / 2}, std::pair{1.0, 2.2}, std::pair{4.0, 5.5}}) {
        auto l = generating_L(t, a, b);
        double L1 = (L(a + h, b) - L(a - h, b)) / (2 * h);
        double L2 = (L(a, b + h) - L(a, b - h)) / (2 * h);
        // second partials from differences of the analytic first partials
        double L11 = (generating_L(t, a + h, b).L1 - generating_L(t, a - h, b).L1) / (2 * h);
        double L12 = (generating_L(t, a, b + h).L1 - generating_L(t, a, b - h).L1) / (2 * h);
        double L22 = (generating_L(t, a, b + h).L2 - generating_L(t, a, b - h).L2) / (2 * h);
        auto rel = [](double x, double y) { return std::abs(x - y) / std::max(1.0, std::abs(y)); };
        EXPECT_LT(rel(L1, l.L1), 1e-7);
        EXPECT_LT(rel(L2, l.L2), 1e-7);
        EXPECT_LT(rel(L11, l.L11), 1e-7);
        EXPECT_LT(rel(L12, l.L12), 1e-7);
        EXPECT_LT(rel(L22, l.L22), 1e-7);
        EXPECT_NEAR(l.L12, det(t.tangent(a), t.tangent(b)), 1e-15);
    }
}

TEST(StepConservative, CircleAdvancesByEqualChords) {
    BilliardTable c(TableSpec::circle());
    for (double a1 : {0.0, 1.0, 5.0})
        for (double delta : {0.2, 1.0, 2.5}) {
            Corner n = step_conservative(c, Corner{a1, a1 + delta});
            EXPECT_NEAR(n.t1, a1 + delta, 1e-15);
            EXPECT_NEAR(n.t2, a1 + 2 * delta, 1e-13);
        }
}

TEST(StepConservative, BoundaryIsFixed) {
    BilliardTable t(fig1_spec());
    Corner n = step_conservative(t, Corner{1.0, 1.0});
    EXPECT_DOUBLE_EQ(n.t1, 1.0);
    EXPECT_DOUBLE_EQ(n.t2, 1.0);
    Corner m = step_conservative(t, Corner{1.0, 1.0 + pi});
    EXPECT_DOUBLE_EQ(m.t1, 1.0 + pi);
    EXPECT_DOUBLE_EQ(m.t2, 1.0 + two_pi);
    // approaching the diagonal, the image approaches it too
    Corner k = step_conservative(t, Corner{1.0, 1.0 + 1e-4});
    EXPECT_LT(k.gap(), 1e-3);
}

TEST(StepConservative, MatchesChordScanOracle) {
    // the line through gamma(t1) with direction gamma'(t2) hits the curve again at t3
    for (const auto& spec : {fig1_spec(), fig2_spec(), fig3_spec()}) {
        BilliardTable t(spec);
        std::mt19937_64 rng(7);
        for (int i = 0; i < 40; ++i) {
            TwistPoint x = random_twist(t, rng);
            Corner c = from_twist(t, x);
            Vec2 d = t.tangent(c.t2);
            Vec2 g1 = t.point(c.t1);
            double oracle = scan_root([&](double u) { return det(d, t.point(u) - g1); },
                                      c.t2 + 1e-9, c.t1 + two_pi - 1e-9, 20000);
            Corner n = step_conservative(t, c);
            EXPECT_NEAR(n.t2, oracle, 1e-11);
            EXPECT_LE(std::abs(step_residual(t, 1.0, c.t1, c.t2, n.t2)), 1e-12 * t.scale());
        }
    }
}

TEST(StepDissipative, MatchesScanOracleAndTangency) {
    BilliardTable t(fig2_spec());
    std::mt19937_64 rng(11);
    for (double lambda : {0.3, 0.71, 0.95}) {
        for (int i = 0; i < 30; ++i) {
            Corner c = from_twist(t, random_twist(t, rng));
            Vec2 d = t.tangent(c.t2);
            Vec2 base = lambda * t.point(c.t1);
            // f < 0 just after t2; the next zero is t3
            double oracle = scan_root([&](double u) { return det(d, t.point(u) - base); },
                                      c.t2 + 1e-9, c.t2 + two_pi - 1e-9, 20000);
            Corner n = step_dissipative(t, lambda, c);
            EXPECT_NEAR(n.t2, oracle, 1e-11);
            EXPECT_GT(n.gap(), 0.0);
            EXPECT_LT(n.gap(), t.star(n.t1) - n.t1);
        }
    }
}

TEST(StepDissipative, LambdaOneIsConservative) {
    BilliardTable t(fig1_spec());
    std::mt19937_64 rng(3);
    for (int i = 0; i < 50; ++i) {
        Corner c = from_twist(t, random_twist(t, rng));
        Corner a = step_dissipative(t, 1.0, c);
        // independent route: the chord construction through gamma(t1)
        Vec2 d = t.tangent(c.t2);
        Vec2 g1 = t.point(c.t1);
        double b = scan_root([&](double u) { return det(d, t.point(u) - g1); }, c.t2 + 1e-9,
                             c.t1 + two_pi - 1e-9, 20000);
        EXPECT_NEAR(a.t2, b, 1e-12);
    }
}

TEST(StepDissipative, CircleClosedForm) {
    BilliardTable c(TableSpec::circle());
    const double lambda = 0.6;
    double alpha = 0.3, s = 0.8;
    TwistPoint x{alpha, s};
    for (int i = 0; i < 50; ++i) {
        TwistStep st = step_twist(c, lambda, x);
        alpha += std::acos(s);
        s *= lambda;
        EXPECT_NEAR(circle_distance(st.next.t, alpha), 0.0, 1e-12);
        EXPECT_NEAR(st.next.s, s, 1e-14);
        x = st.next;
    }
}

TEST(StepDissipative, RejectsBadInput) {
    BilliardTable t(fig1_spec());
    EXPECT_THROW(step_dissipative(t, 0.0, Corner{0.0, 1.0}), DomainError);
    EXPECT_THROW(step_dissipative(t, 1.5, Corner{0.0, 1.0}), DomainError);
    EXPECT_THROW(step_dissipative(t, 0.5, Corner{0.0, 4.0}), ChartError);
}

TEST(Charts, CircleExamples) {
    BilliardTable c(TableSpec::circle());
    EXPECT_NEAR(to_twist(c, Corner{0.0, pi / 2}).s, 0.0, 1e-15);
    BilliardTable t(fig1_spec());
    for (double u : {0.0, 2.0}) EXPECT_DOUBLE_EQ(to_twist(t, Corner{u, u}).s, phase_bounds(t, u).psi2);
    EXPECT_THROW(to_twist(t, Corner{0.0, 4.0}), ChartError);
    EXPECT_THROW(from_twist(t, TwistPoint{0.0, 5.0}), ChartError);
    EXPECT_THROW(from_plot(t, PlotPoint{0.0, 0.0}), ChartError);
    EXPECT_THROW(from_plot(t, PlotPoint{0.0, pi}), ChartError);
}

TEST(Charts, RoundTrip) {
    for (const auto& spec : {fig1_spec(), fig3_spec()}) {
        BilliardTable t(spec);
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> ut(0.0, two_pi), uw(0.01, 0.99);
        double worst = 0.0;
        for (int i = 0; i < 10000; ++i) {
            double t1 = ut(rng);
            Corner c{t1, t1 + uw(rng) * (t.star(t1) - t1)};
            TwistPoint x = to_twist(t, c);
            Corner back = from_twist(t, x);
            worst = std::max(worst, std::abs(back.t2 - c.t2));
            PlotPoint p = to_plot(t, c);
            ASSERT_GT(p.psi, 0.0);
            ASSERT_LT(p.psi, pi);
            // compared in plot coordinates: inverting the tangent angle at a
            // zero-curvature point is cubically ill-conditioned in t
            PlotPoint pp = to_plot(t, from_plot(t, p));
            worst = std::max(worst, circle_distance(pp.theta, p.theta));
            worst = std::max(worst, std::abs(pp.psi - p.psi));
        }
        EXPECT_LT(worst, 1e-10);
    }
}

TEST(Charts, PhasePointConversionKeepsLift) {
    BilliardTable t(fig3_spec());
    PhasePoint p{Chart::Plot, 1.0, 1.2, 17.5};
    PhasePoint q = convert(t, convert(t, p, Chart::Twist), Chart::Plot);
    EXPECT_NEAR(q.a, p.a, 1e-10);
    EXPECT_NEAR(q.b, p.b, 1e-10);
    EXPECT_EQ(q.lift, 17.5);
}

TEST(PhaseBounds, Examples) {
    BilliardTable c(TableSpec::circle());
    for (double u : {0.0, 1.0, 3.0}) {
        auto pb = phase_bounds(c, u);
        EXPECT_NEAR(pb.psi1, -1.0, 1e-15);
        EXPECT_NEAR(pb.psi2, 1.0, 1e-15);
    }
    BilliardTable t(oval_spec());
    BilliardTable n(fig2_spec());
    for (int i = 0; i < 1024; ++i) {
        double u = two_pi * i / 1024;
        auto pb = phase_bounds(t, u);
        EXPECT_NEAR(pb.psi1, -pb.psi2, 1e-10);
        auto pn = phase_bounds(n, u);
        EXPECT_LT(pn.psi1, 0.0);
        EXPECT_GT(pn.psi2, 0.0);
    }
}

TEST(Differential, DeterminantAndStructure) {
    BilliardTable t(fig2_spec());
    std::mt19937_64 rng(9);
    for (int i = 0; i < 200; ++i) {
        Corner c = from_twist(t, random_twist(t, rng));
        Jacobian2 j1 = differential(t, 1.0, c);
        for (double lambda : {0.25, 0.5, 1.0}) {
            Jacobian2 j = differential(t, lambda, c);
            EXPECT_NEAR(j.m.determinant(), lambda, 1e-8);
            EXPECT_DOUBLE_EQ(j.m(0, 0), j1.m(0, 0));
            EXPECT_DOUBLE_EQ(j.m(0, 1), j1.m(0, 1));
            EXPECT_NEAR(j.m(1, 0), lambda * j1.m(1, 0), 1e-12 * std::abs(j1.m(1, 0)) + 1e-300);
            EXPECT_NEAR(j.m(1, 1), lambda * j1.m(1, 1), 1e-12 * std::abs(j1.m(1, 1)) + 1e-300);
            // negative twist: dt2/ds1 = -1/L12 < 0
            EXPECT_LT(j.m(0, 1), 0.0);
        }
    }
}

TEST(Differential, MatchesFiniteDifferences) {
    BilliardTable t(fig1_spec());
    std::mt19937_64 rng(13);
    const double h = 1e-6;
    for (int i = 0; i < 100; ++i) {
        TwistPoint x = random_twist(t, rng, 0.1);
        const double lambda = 0.7;
        auto F = [&](TwistPoint y) {
            TwistStep st = step_twist(t, lambda, y);
            return Vec2(y.t + st.gap, st.next.s);
        };
        Mat2 fd;
        fd.col(0) = (F({x.t + h, x.s}) - F({x.t - h, x.s})) / (2 * h);
        fd.col(1) = (F({x.t, x.s + h}) - F({x.t, x.s - h})) / (2 * h);
        Mat2 an = differential(t, lambda, x).m;
        EXPECT_LE((fd - an).cwiseAbs().maxCoeff(), 1e-5 * an.cwiseAbs().maxCoeff());
    }
}

TEST(Differential, SecondIterateIsNegativeTwist) {
    BilliardTable t(fig3_spec());
    std::mt19937_64 rng(17);
    for (int i = 0; i < 200; ++i) {
        TwistPoint x = random_twist(t, rng);
        TwistStep st = step_twist(t, 1.0, x);
        Mat2 d2 = differential(t, 1.0, st.next).m * differential(t, 1.0, x).m;
        EXPECT_LT(d2(0, 1), 0.0);
    }
}

TEST(Map, InverseUndoesStep) {
    BilliardTable t(fig2_spec());
    std::mt19937_64 rng(19);
    for (double lambda : {0.4, 1.0}) {
        for (int i = 0; i < 100; ++i) {
            TwistPoint x = random_twist(t, rng);
            TwistPoint y = step_twist(t, lambda, x).next;
            TwistPoint z = step_inverse(t, lambda, y);
            EXPECT_LE(circle_distance(z.t, x.t), 1e-10);
            EXPECT_NEAR(z.s, x.s, 1e-10);
        }
    }
}

TEST(Map, AffineImageHasSameItinerary) {
    AffineCircle circle = AffineCircle::unit_circle();
    Mat2 a;
    a << 2.0, 0.7, -0.3, 0.8;
    AffineCircle ellipse(a, Vec2(0.4, -1.1));
    Corner c{0.2, 1.5};
    Corner e = c;
    for (int i = 0; i < 200; ++i) {
        c = step_conservative(circle, c);
        e = step_conservative(ellipse, e);
        ASSERT_NEAR(c.t2, e.t2, 1e-9);
    }
}

TEST(Map, CentralSymmetryCommutes) {
    BilliardTable t(oval_spec());
    std::mt19937_64 rng(23);
    for (int i = 0; i < 200; ++i) {
        TwistPoint x = random_twist(t, rng);
        TwistPoint a = step_twist(t, 0.6, TwistPoint{x.t + pi, x.s}).next;
        TwistPoint b = step_twist(t, 0.6, x).next;
        EXPECT_LE(circle_distance(a.t, b.t + pi), 1e-10);
        EXPECT_NEAR(a.s, b.s, 1e-10);
    }
}

TEST(Map, AreaContraction) {
    // area of the image of a small box from its mapped boundary polygon
    BilliardTable t(fig1_spec());
    const double lambda = 0.6;
    const TwistPoint c{1.0, 0.1};
    const double w = 0.02;
    const int n = 100000;
    std::vector<Vec2> poly;
    poly.reserve(n);
    double ref_t = 0.0;
    for (int i = 0; i < n; ++i) {
        double u = 4.0 * i / n;  // perimeter parameter
        int side = static_cast<int>(u);
        double f = u - side;
        Vec2 p;
        switch (side) {
            case 0: p = {-w + 2 * w * f, -w}; break;
            case 1: p = {w, -w + 2 * w * f}; break;
            case 2: p = {w - 2 * w * f, w}; break;
            default: p = {-w, w - 2 * w * f}; break;
        }
        TwistStep st = step_twist(t, lambda, TwistPoint{c.t + p.x(), c.s + p.y()});
        double tt = c.t + p.x() + st.gap;
        if (i == 0) ref_t = tt;
        poly.emplace_back(ref_t + wrap_pm_pi(tt - ref_t), st.next.s);
    }
    double area = 0.0;
    for (int i = 0; i < n; ++i) area += det(poly[i], poly[(i + 1) % n]);
    area = 0.5 * std::abs(area);
    EXPECT_NEAR(area / (4 * w * w), lambda, 0.02 * lambda);
}
