#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "hdiff/error.hpp"
#include "hdiff/family.hpp"
#include "hdiff/htransform.hpp"
#include "hdiff/resolvent.hpp"

using namespace hdiff;

namespace {

DiscretizationPtr rb() {
    static const auto d = Discretization::build(measures::reflecting_bm());
    return d;
}

DiscretizationPtr half_line() {
    static const auto d = Discretization::build(measures::half_line_bm());
    return d;
}

DiscretizationPtr absorbed() {
    static const auto d = Discretization::build(measures::absorbed_bm());
    return d;
}

constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

}  // namespace

TEST(Build, ScaleTransformOfReflectingBm) {
    const auto ht = build_htransform(rb(), HKind::Scale);
    EXPECT_EQ(ht.alpha, 0.0);
    EXPECT_TRUE(ht.killing.empty());
    const auto x = rb()->nodes();
    const double c = ht.reference;
    EXPECT_EQ(c, 0.5);
    EXPECT_EQ(ht.scale[0], -kInf);
    for (std::size_t i = 1; i < x.size(); i += 97) {
        EXPECT_NEAR(ht.speed[i], x[i] * x[i] * x[i] / 3.0, 1e-13);
        EXPECT_NEAR(ht.scale[i], 1.0 / c - 1.0 / x[i], 1e-9 * (1.0 + std::abs(ht.scale[i])));
    }
}

TEST(Build, ScaleIsStrictlyIncreasingAndSpeedNondecreasing) {
    for (auto kind : {HKind::Scale, HKind::Ground, HKind::Zero}) {
        const auto ht = build_htransform(rb(), kind);
        for (std::size_t i = 1; i < ht.scale.size(); ++i) {
            EXPECT_LT(ht.scale[i - 1], ht.scale[i]);
            EXPECT_LE(ht.speed[i - 1], ht.speed[i]);
        }
    }
}

TEST(Build, ZeroTransformKillsInsideForPositiveRecurrence) {
    const auto ht = build_htransform(rb(), HKind::Zero);
    ASSERT_FALSE(ht.killing.empty());
    const auto x = rb()->nodes();
    for (std::size_t i = 0; i < x.size(); i += 101) {
        const double v = x[i];
        EXPECT_NEAR(ht.h.values()[i], v - 0.5 * v * v, 1e-10);
        // Killing density pi0 h0 against dm with pi0 = 1.
        EXPECT_NEAR(ht.killing[i], 0.5 * v * v - v * v * v / 6.0, 1e-10);
        EXPECT_NEAR(ht.h_at(v), v - 0.5 * v * v, 1e-14);
    }
}

TEST(Build, ZeroEqualsScaleWithoutPositiveRecurrence) {
    for (const auto& d : {half_line(), absorbed()}) {
        const auto z = build_htransform(d, HKind::Zero);
        const auto s = build_htransform(d, HKind::Scale);
        EXPECT_TRUE(z.killing.empty());
        for (std::size_t i = 0; i < d->size(); ++i) {
            EXPECT_NEAR(z.speed[i], s.speed[i], 1e-12 * (1.0 + s.speed[i]));
            if (i > 0) EXPECT_NEAR(z.scale[i], s.scale[i], 1e-12 * (1.0 + std::abs(s.scale[i])));
        }
        EXPECT_NEAR(transformed_hitting_laplace(z, 0.3, 0.6, 1.0),
                    transformed_hitting_laplace(s, 0.3, 0.6, 1.0), 1e-12);
    }
}

TEST(Build, GroundTransformCarriesEigenvalue) {
    const auto ht = build_htransform(rb(), HKind::Ground);
    EXPECT_NEAR(ht.alpha, -kPi2 / 4.0, 1e-8);
    EXPECT_NEAR(ht.h_at(1.0), 2.0 / std::numbers::pi, 1e-7);
    // Not reflecting or entrance: the ground state is the scale function.
    const auto hs = build_htransform(half_line(), HKind::Ground);
    EXPECT_EQ(hs.alpha, 0.0);
    EXPECT_EQ(hs.h_at(123.0), 123.0);
}

TEST(Kernel, SpecExamples) {
    const auto ht = build_htransform(rb(), HKind::Scale);
    EXPECT_NEAR(transformed_kernel(ht, 1.0, 1.0, 1.0), std::tanh(1.0), 1e-9);
    EXPECT_NEAR(transformed_kernel(ht, 1.0, 1.0, 1.0), 0.761594, 1e-6);
    for (double y : {0.25, 0.75}) {
        const double rho = std::cosh(1.0 - y) / std::cosh(1.0);
        EXPECT_NEAR(transformed_kernel(ht, 0.0, y, 1.0), rho / y, 1e-9);
    }
    EXPECT_THROW(transformed_kernel(ht, 0.5, 0.0, 1.0), OutOfDomain);
    EXPECT_THROW(transformed_kernel(ht, 0.5, 0.5, 0.0), InvalidQ);
}

TEST(Kernel, GroundUsesShiftedParameter) {
    const auto ht = build_htransform(rb(), HKind::Ground);
    for (double q : {1.0, 3.0}) {
        const double lambda = q - kPi2 / 4.0;
        auto psi = [&](double x) {
            const double b = std::sqrt(std::abs(lambda));
            return lambda < 0 ? std::sin(b * x) / b : std::sinh(b * x) / b;
        };
        auto rho = [&](double x) {
            const double b = std::sqrt(std::abs(lambda));
            return lambda < 0 ? std::cos(b * (1 - x)) / std::cos(b) : std::cosh(b * (1 - x)) / std::cosh(b);
        };
        auto h = [](double x) { return 2.0 / std::numbers::pi * std::sin(std::numbers::pi * x / 2.0); };
        for (double x : {0.2, 0.6})
            for (double y : {0.4, 0.9}) {
                const double expect = psi(std::min(x, y)) * rho(std::max(x, y)) / (h(x) * h(y));
                EXPECT_NEAR(transformed_kernel(ht, x, y, q), expect, 1e-6 * expect) << q;
            }
    }
}

TEST(Eigenfunctions, SpecExamplesAndResiduals) {
    const auto ht = build_htransform(rb(), HKind::Scale);
    const auto ef = transformed_eigenfunctions(ht, 1.0);
    EXPECT_EQ(ef.increasing[0], 1.0);
    const auto x = rb()->nodes();
    for (std::size_t i = 1; i < x.size(); i += 50)
        EXPECT_NEAR(ef.increasing[i], std::sinh(x[i]) / x[i], 1e-9);
    EXPECT_NEAR(solve_eigen(rb(), 1.0).psi(0.5) / ht.h_at(0.5), 1.042191, 1e-6);
    EXPECT_LE(ef.residual, 1e-3);
    for (const auto& d : {rb(), half_line(), absorbed()})
        for (auto kind : {HKind::Scale, HKind::Ground, HKind::Zero})
            for (double q : {0.5, 2.0}) {
                const auto t = build_htransform(d, kind);
                EXPECT_LE(transformed_eigenfunctions(t, q).residual, 1e-3);
            }
}

TEST(Eigenfunctions, ResidualGuardFires) {
    auto ht = build_htransform(rb(), HKind::Zero);
    ht.killing.clear();  // drop the killing term: the equation no longer holds
    EXPECT_THROW(transformed_eigenfunctions(ht, 1.0), ResidualExceeded);
}

TEST(Boundary, SpecExamples) {
    const auto s = build_htransform(rb(), HKind::Scale);
    EXPECT_EQ(transformed_boundary(s, Side::Right).kind, BoundaryKind::RegularElastic);
    for (auto kind : {HKind::Scale, HKind::Ground, HKind::Zero})
        EXPECT_EQ(transformed_boundary(build_htransform(rb(), kind), Side::Left).kind, BoundaryKind::Entrance);
    const auto n = build_htransform(half_line(), HKind::Scale);
    EXPECT_EQ(transformed_boundary(n, Side::Right).kind, BoundaryKind::Natural3);
}

TEST(Boundary, FamilyTablesMatch) {
    for (const auto& member : classification_family()) {
        const auto d = Discretization::build(member.measure);
        const std::pair<HKind, const KindSet*> cases[] = {{HKind::Scale, &member.under_scale},
                                                          {HKind::Ground, &member.under_ground},
                                                          {HKind::Zero, &member.under_zero}};
        for (const auto& [kind, expected] : cases) {
            if (!expected->constrained()) continue;
            const auto ht = build_htransform(d, kind);
            const auto right = transformed_boundary(ht, Side::Right).kind;
            EXPECT_TRUE(expected->contains(right))
                << member.name << " under " << to_string(kind) << ": got " << to_string(right)
                << ", expected " << expected->describe();
            EXPECT_EQ(transformed_boundary(ht, Side::Left).kind, BoundaryKind::Entrance)
                << member.name << " under " << to_string(kind);
        }
    }
}

TEST(Survival, SpecExamples) {
    const auto s = build_htransform(rb(), HKind::Scale);
    EXPECT_NEAR(survival_laplace(s, 1.0, 1.0), std::tanh(1.0), 1e-9);
    EXPECT_NEAR(survival_laplace(s, 0.0, 1.0), 1.0 / std::cosh(1.0), 1e-9);
    EXPECT_NEAR(survival_laplace(s, 1e-6, 1.0), survival_laplace(s, 0.0, 1.0), 1e-6);
    EXPECT_EQ(survival_laplace(build_htransform(rb(), HKind::Ground), 0.5, 1.0), 0.0);
}

TEST(Survival, MatchesStoppedResolventOfScale) {
    for (const auto& d : {rb(), half_line(), absorbed()}) {
        const auto s = build_htransform(d, HKind::Scale);
        for (double q : {0.5, 1.0, 2.0}) {
            const ResolventKernel rk(d, q);
            const auto id = GridFunction::identity(d);
            for (double x : {0.2, 0.5, 0.9}) {
                const double lhs = 1.0 - survival_laplace(s, x, q);
                const double rhs = q / x * apply_R0q(rk, id, x);
                EXPECT_NEAR(lhs, rhs, 1e-6 * std::max(1.0, std::abs(rhs)));
            }
        }
    }
}

TEST(Survival, ZeroTransformMatchesResolventOfH0) {
    const auto d = rb();
    const auto z = build_htransform(d, HKind::Zero);
    for (double q : {0.5, 2.0}) {
        const ResolventKernel rk(d, q);
        for (double x : {0.3, 0.8}) {
            const double lhs = 1.0 - survival_laplace(z, x, q);
            const double rhs = q * apply_R0q(rk, z.h, x) / z.h_at(x);
            EXPECT_NEAR(lhs, rhs, 1e-8);
        }
    }
}

TEST(Hitting, SpecExamples) {
    const auto s = build_htransform(rb(), HKind::Scale);
    EXPECT_EQ(transformed_hitting_laplace(s, 0.4, 0.4, 1.0), 1.0);
    EXPECT_NEAR(transformed_hitting_laplace(s, 0.0, 1.0, 1.0), 1.0 / std::sinh(1.0), 1e-9);
    EXPECT_THROW(transformed_hitting_laplace(s, 0.5, 0.0, 1.0), OutOfDomain);
    for (double x : {0.1, 0.7})
        EXPECT_NEAR(transformed_hitting_laplace(s, x, 0.5, 1.0),
                    transformed_kernel(s, x, 0.5, 1.0) / transformed_kernel(s, 0.5, 0.5, 1.0), 1e-12);
}

TEST(Hitting, DominationIsChecked) {
    auto ht = build_htransform(rb(), HKind::Scale);
    ht.h = scaled(10.0, ht.h);
    EXPECT_THROW(transformed_hitting_laplace(ht, 0.2, 0.5, 0.1), HypothesisFailed);
}

TEST(Export, CsvTable) {
    std::ostringstream out;
    write_htransform_csv(out, build_htransform(rb(), HKind::Zero));
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "x,h,speed,scale,killing");
    std::getline(in, line);
    EXPECT_EQ(line, "0,0,0,-inf,0");
    std::size_t rows = 1;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, rb()->size());
}

TEST(Kinds, NamesRoundTrip) {
    for (auto k : {HKind::Scale, HKind::Ground, HKind::Zero}) EXPECT_EQ(hkind_from_string(to_string(k)), k);
    EXPECT_THROW(hkind_from_string("bogus"), InputError);
}
