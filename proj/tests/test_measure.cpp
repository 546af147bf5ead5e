#include <gtest/gtest.h>

#include <cmath>

#include "hdiff/error.hpp"
#include "hdiff/measure.hpp"

using namespace hdiff;

TEST(SpeedMeasure, ReflectingEvaluation) {
    const auto m = measures::reflecting_bm();
    EXPECT_DOUBLE_EQ(m(0.5), 0.5);
    EXPECT_DOUBLE_EQ(m(0.0), 0.0);
    EXPECT_DOUBLE_EQ(m(3.0), 1.0);
    EXPECT_DOUBLE_EQ(m.total_mass(), 1.0);
    EXPECT_DOUBLE_EQ(m.pi0(), 1.0);
}

TEST(SpeedMeasure, AbsorbedIsInfiniteAtL) {
    const auto m = measures::absorbed_bm();
    EXPECT_EQ(m(1.0), kInf);
    EXPECT_DOUBLE_EQ(m(0.25), 0.25);
    EXPECT_EQ(m.pi0(), 0.0);
}

TEST(SpeedMeasure, IntegrateConstantAndIdentity) {
    const auto m = measures::reflecting_bm();
    EXPECT_NEAR(m.integrate([](double) { return 1.0; }, 0.0, 1.0), 1.0, 1e-14);
    EXPECT_NEAR(m.integrate([](double y) { return y; }, 0.0, 1.0), 0.5, 1e-14);
}

TEST(SpeedMeasure, IntegrateAtomEndpointConventions) {
    const SpeedMeasure m({DensityPiece{0.0, 1.0, LinearDensity{1.0, 0.0}}}, {Atom{0.5, 2.0}}, 1.0,
                         kInf);
    auto sq = [](double y) { return y * y; };
    EXPECT_NEAR(m.integrate(sq, 0.0, 0.5), 1.0 / 24.0 + 0.5, 1e-14);
    EXPECT_NEAR(m.integrate(sq, 0.0, 0.5, Endpoints::LeftClosedRightOpen), 1.0 / 24.0, 1e-14);
    EXPECT_NEAR(m.integrate(sq, 0.5, 1.0), 7.0 / 24.0, 1e-14);
    EXPECT_NEAR(m.integrate(sq, 0.5, 1.0, Endpoints::Closed), 7.0 / 24.0 + 0.5, 1e-14);
    EXPECT_DOUBLE_EQ(m(0.5), 2.5);
}

TEST(SpeedMeasure, PowerPieceMomentsMatchQuadrature) {
    // density (1 + y)^{-2.5} on [0, inf)
    const SpeedMeasure m({DensityPiece{0.0, kInf, PowerDensity{1.0, -1.0, -2.5}}}, {}, kInf, kInf);
    EXPECT_NEAR(m.total_mass(), 1.0 / 1.5, 1e-14);
    EXPECT_NEAR(m.moment(1, 0.0, kInf), 1.0 / 0.5 - 1.0 / 1.5, 1e-13);
    EXPECT_EQ(m.moment(2, 0.0, kInf), kInf);
    const double quad = m.integrate([](double y) { return y; }, 0.0, 10.0);
    EXPECT_NEAR(quad, m.moment(1, 0.0, 10.0), 1e-12);
}

TEST(SpeedMeasure, SingularEndpointQuadrature) {
    // density (1 - y)^{-0.5} on [0, 1): m(x) = 2 - 2 sqrt(1 - x)
    const SpeedMeasure m({DensityPiece{0.0, 1.0, PowerDensity{1.0, 1.0, -0.5}}}, {}, 1.0, 1.0);
    EXPECT_TRUE(m.singular_at_lprime());
    EXPECT_NEAR(m(0.75), 2.0 - 2.0 * std::sqrt(0.25), 1e-14);
    EXPECT_NEAR(m.integrate([](double) { return 1.0; }, 0.0, 1.0), 2.0, 1e-10);
}

TEST(SpeedMeasure, NonIntegrableThrows) {
    const SpeedMeasure m({DensityPiece{0.0, 1.0, PowerDensity{1.0, 1.0, -2.0}}}, {}, 1.0, 1.0);
    EXPECT_EQ(m.mass(0.0, 1.0), kInf);
    EXPECT_THROW(m.integrate([](double) { return 1.0; }, 0.0, 1.0), NonIntegrable);
}

TEST(SpeedMeasure, RejectsInvalidInput) {
    auto lin = [](double a, double b) { return DensityPiece{a, b, LinearDensity{1.0, 0.0}}; };
    EXPECT_THROW(SpeedMeasure({lin(0, 1), lin(0.5, 2)}, {}, 2.0, kInf), InvalidMeasure);
    EXPECT_THROW(SpeedMeasure({lin(0, 1), lin(1.5, 2)}, {}, 2.0, kInf), InvalidMeasure);
    EXPECT_THROW(SpeedMeasure({lin(0, 1)}, {}, 1.0, 0.5), InvalidMeasure);
    EXPECT_THROW(SpeedMeasure({lin(0, 1)}, {}, 0.0, 1.0), Degenerate);
    EXPECT_THROW(SpeedMeasure({DensityPiece{0, 1, LinearDensity{0.0, 0.0}}}, {}, 1.0, kInf),
                 InvalidMeasure);
    EXPECT_THROW(SpeedMeasure({lin(0, 1)}, {Atom{0.5, -1.0}}, 1.0, kInf), InvalidMeasure);
    EXPECT_THROW(SpeedMeasure({lin(0, 1)}, {Atom{1.0, 1.0}}, 1.0, 1.0), InvalidMeasure);
}

TEST(SpeedMeasure, MonotoneAndAdditive) {
    const SpeedMeasure m({DensityPiece{0.0, 0.3, LinearDensity{1.0, 2.0}},
                          DensityPiece{0.3, 2.0, PowerDensity{0.5, 3.0, -1.5}}},
                         {Atom{0.3, 0.1}, Atom{1.2, 0.4}}, 2.0, kInf);
    double prev = 0.0;
    for (int i = 1; i <= 200; ++i) {
        const double x = 2.0 * i / 200.0;
        const double v = m(x);
        EXPECT_GE(v, prev);
        prev = v;
    }
    for (double a : {0.1, 0.3, 0.7}) {
        for (double b : {0.9, 1.2, 1.9}) {
            EXPECT_NEAR(m.mass(0.0, b), m.mass(0.0, a) + m.mass(a, b), 1e-13);
            auto f = [](double y) { return std::exp(-y); };
            EXPECT_NEAR(m.integrate(f, 0.0, b), m.integrate(f, 0.0, a) + m.integrate(f, a, b),
                        1e-12);
        }
    }
}

TEST(SpeedMeasure, IntegratedMass) {
    const auto m = measures::half_line_bm();
    EXPECT_NEAR(m.integrated_mass(2.0), 2.0, 1e-14);
    const auto r = measures::reflecting_bm();
    EXPECT_NEAR(r.integrated_mass(2.0), 0.5 + 1.0, 1e-14);
}
