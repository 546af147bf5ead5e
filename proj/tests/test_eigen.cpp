#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "hdiff/eigen.hpp"
#include "hdiff/error.hpp"

using namespace hdiff;

namespace {

DiscretizationPtr rb_grid() {
    static const auto d = Discretization::build(measures::reflecting_bm());
    return d;
}

double max_rel(const GridFunction& f, double (*ref)(double, double), double q) {
    double worst = 0.0;
    for (double x : f.disc().nodes()) {
        const double r = ref(x, q);
        if (r == 0.0) continue;
        worst = std::max(worst, std::abs(f(x) - r) / std::abs(r));
    }
    return worst;
}

}  // namespace

TEST(Grid, NodesCoverDomainAndBreakpoints) {
    const SpeedMeasure m({DensityPiece{0.0, 0.3, LinearDensity{1.0, 0.0}},
                          DensityPiece{0.3, 1.0, LinearDensity{2.0, 0.0}}},
                         {Atom{0.55, 0.2}}, 1.0, kInf);
    const auto d = Discretization::build(m);
    const auto x = d->nodes();
    EXPECT_EQ(x.front(), 0.0);
    EXPECT_EQ(x.back(), 1.0);
    EXPECT_TRUE(std::binary_search(x.begin(), x.end(), 0.3));
    EXPECT_TRUE(std::binary_search(x.begin(), x.end(), 0.55));
    double total = 0.0;
    for (std::size_t i = 0; i < d->cells(); ++i) total += d->mass(0)[i] + d->mass(2)[i];
    for (double a : d->node_mass()) total += a;
    EXPECT_NEAR(total, m.mass(0.0, 1.0), 1e-13);
}

TEST(Grid, HalfLineIsTruncated) {
    const auto d = Discretization::build(measures::half_line_bm());
    EXPECT_TRUE(d->truncated());
    EXPECT_DOUBLE_EQ(d->end(), 40.0);
}

TEST(ApplyJ, SpecExamples) {
    const auto d = rb_grid();
    const auto j1 = apply_J(GridFunction::constant(d, 1.0));
    EXPECT_NEAR(j1(1.0), 0.5, 1e-14);
    const auto js = apply_J(GridFunction::identity(d));
    EXPECT_NEAR(js(1.0), 1.0 / 6.0, 1e-14);
    const auto j0 = apply_J(GridFunction::constant(d, 0.0));
    EXPECT_EQ(j0.sup_norm(), 0.0);
}

TEST(ApplyJ, AtomProducesFluxJump) {
    const SpeedMeasure m({DensityPiece{0.0, 1.0, LinearDensity{1.0, 0.0}}}, {Atom{0.5, 2.0}}, 1.0, kInf);
    const auto d = Discretization::build(m);
    const auto j1 = apply_J(GridFunction::constant(d, 1.0));
    // J1(x) = int_0^x m(y) dy with m(y) = y + 2 * 1{y >= 1/2}.
    EXPECT_NEAR(j1(1.0), 0.5 + 2.0 * 0.5, 1e-13);
    EXPECT_NEAR(j1(0.75), 0.75 * 0.75 / 2 + 2.0 * 0.25, 1e-13);
}

TEST(SolveEigen, ReflectingGolden) {
    const auto d = rb_grid();
    for (double q : {0.5, 1.0, 2.0}) {
        SCOPED_TRACE(q);
        const auto es = solve_eigen(d, q);
        const double r = std::sqrt(q);
        EXPECT_LT(max_rel(es.phi, [](double x, double q) { return std::cosh(std::sqrt(q) * x); }, q), 1e-9);
        EXPECT_LT(max_rel(es.psi, [](double x, double q) { return std::sinh(std::sqrt(q) * x) / std::sqrt(q); }, q),
                  1e-9);
        EXPECT_NEAR(es.H, 1.0 / (r * std::tanh(r)), 1e-9);
        EXPECT_NEAR(es.H_ratio, es.H, 1e-9);
        EXPECT_LT(max_rel(es.rho,
                          [](double x, double q) {
                              const double r = std::sqrt(q);
                              return std::cosh(r * (1.0 - x)) / std::cosh(r);
                          },
                          q),
                  1e-9);
    }
    const auto es = solve_eigen(d, 1.0);
    EXPECT_NEAR(es.phi(1.0), 1.543081, 1e-6);
    EXPECT_NEAR(es.psi(1.0), 1.175201, 1e-6);
    EXPECT_NEAR(es.H, 1.313035, 1e-6);
}

TEST(SolveEigen, ZeroParameter) {
    const auto d = rb_grid();
    const auto es = solve_eigen(d, 0.0);
    EXPECT_EQ(es.H, kInf);
    EXPECT_DOUBLE_EQ(es.phi(0.7), 1.0);
    EXPECT_DOUBLE_EQ(es.psi(0.7), 0.7);
    const auto ab = solve_eigen(Discretization::build(measures::absorbed_bm()), 0.0);
    EXPECT_DOUBLE_EQ(ab.H, 1.0);
}

TEST(SolveEigen, InvariantsAndResiduals) {
    for (const auto& m : {measures::reflecting_bm(), measures::half_line_bm(), measures::absorbed_bm()}) {
        const auto d = Discretization::build(m);
        for (double q : {0.5, 2.0}) {
            const auto es = solve_eigen(d, q);
            EXPECT_DOUBLE_EQ(es.phi(0.0), 1.0);
            EXPECT_DOUBLE_EQ(es.psi(0.0), 0.0);
            EXPECT_DOUBLE_EQ(es.psi.dright()[0], 1.0);
            EXPECT_NEAR(es.rho(0.0), 1.0, 1e-12);
            const auto rv = es.rho.values();
            for (std::size_t i = 1; i < rv.size(); ++i) {
                EXPECT_LE(rv[i], rv[i - 1] + 1e-15);
                EXPECT_GE(rv[i], -1e-15);
            }
            // rho = 1 - s/H + q J rho
            const auto jr = apply_J(es.rho);
            // Relative to the size of the terms: on the truncated half-line
            // the x/H term reaches ~60 and carries the grid's interpolation error.
            double res = 0.0;
            const auto x = d->nodes();
            for (std::size_t i = 0; i < x.size(); ++i)
                res = std::max(res, std::abs(rv[i] - (1.0 - x[i] / es.H + q * jr.values()[i])) /
                                        (1.0 + x[i] / es.H));
            EXPECT_LT(res, d->truncated() ? 1e-8 : 1e-9);
        }
    }
}

TEST(SolveEigen, HalfLineClosedForms) {
    const auto d = Discretization::build(measures::half_line_bm());
    const auto es = solve_eigen(d, 1.0);
    EXPECT_NEAR(es.H, 1.0, 1e-8);
    for (double x : {0.5, 3.0, 10.0, 25.0}) EXPECT_NEAR(es.rho(x) / std::exp(-x), 1.0, 1e-7) << x;
}

TEST(SolveEigen, NegativeParameter) {
    const auto d = rb_grid();
    const auto es = solve_eigen(d, -1.0);
    EXPECT_NEAR(es.phi(1.0), std::cos(1.0), 1e-10);
    EXPECT_NEAR(es.psi(1.0), std::sin(1.0), 1e-10);
}

TEST(ZeroResolvent, SpecExamples) {
    const auto zr = zero_resolvent(rb_grid());
    EXPECT_DOUBLE_EQ(zr.pi0, 1.0);
    EXPECT_NEAR(zr.h0(1.0), 0.5, 1e-14);
    EXPECT_NEAR(zr.h0(0.3), 0.3 - 0.045, 1e-14);
    const auto hl = zero_resolvent(Discretization::build(measures::half_line_bm()));
    EXPECT_EQ(hl.pi0, 0.0);
    EXPECT_DOUBLE_EQ(hl.h0(7.5), 7.5);
}

TEST(HQ, SpecExamples) {
    const auto d = rb_grid();
    const auto zr = zero_resolvent(d);
    const auto h1 = h_q(zr, solve_eigen(d, 1.0));
    EXPECT_NEAR(h1(1.0), 0.46211715726, 1e-9);
    EXPECT_NEAR(h1(0.0), 0.0, 1e-12);
    double prev = 0.0;
    for (double q : {1.0, 0.1, 0.01}) {
        const double v = h_q(solve_eigen(d, q))(0.5);
        EXPECT_GT(v, prev);
        EXPECT_LT(v, 0.375);
        prev = v;
    }
    for (double q : {0.01, 0.1, 1.0, 10.0}) {
        const auto hq = h_q(solve_eigen(d, q));
        const auto x = d->nodes();
        for (std::size_t i = 0; i < x.size(); ++i) {
            EXPECT_LE(hq.values()[i], x[i] + 1e-12);
            if (i) EXPECT_GE(hq.values()[i], hq.values()[i - 1] - 1e-15);
        }
    }
    EXPECT_THROW(h_q(solve_eigen(d, 0.0)), InvalidQ);
}

TEST(GroundState, ReflectingGolden) {
    const auto d = rb_grid();
    const auto gs = ground_state(d);
    const double pi = std::numbers::pi;
    EXPECT_NEAR(gs.gamma_star, -pi * pi / 4.0, 1e-8);
    for (double x : d->nodes()) {
        const double ref = (2.0 / pi) * std::sin(pi * x / 2.0);
        if (x > 0) EXPECT_NEAR(gs.h_star(x) / ref, 1.0, 1e-7) << x;
    }
    EXPECT_LT(generator_residual(gs.h_star, gs.gamma_star), 1e-3);
}

TEST(GroundState, NonReflectingIsScale) {
    for (const auto& m : {measures::half_line_bm(), measures::absorbed_bm()}) {
        const auto gs = ground_state(Discretization::build(m));
        EXPECT_EQ(gs.gamma_star, 0.0);
        EXPECT_DOUBLE_EQ(gs.h_star(0.8), 0.8);
    }
}

TEST(GroundState, ScaledInterval) {
    const auto gs = ground_state(Discretization::build(measures::reflecting_bm(2.0)));
    const double pi = std::numbers::pi;
    EXPECT_NEAR(gs.gamma_star, -pi * pi / 16.0, 1e-8);
}
