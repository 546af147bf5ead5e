#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "hdiff/error.hpp"
#include "hdiff/htransform.hpp"
#include "hdiff/simulate.hpp"

using namespace hdiff;

namespace {

SimOptions quick(std::size_t n = 20000, std::uint64_t seed = 7) {
    SimOptions o;
    o.n = n;
    o.seed = seed;
    return o;
}

void expect_within(const SimEstimate& e, double truth, double sigmas = 3.0) {
    EXPECT_LE(std::abs(e.value - truth), sigmas * e.std_error + 1e-12)
        << "estimate " << e.value << " +- " << e.std_error << " vs " << truth;
}

/// Density 1 on (0, 1) with a flat stretch to l = 2: elastic at l' = 1.
SpeedMeasure elastic_bm() { return SpeedMeasure({{0.0, 1.0, LinearDensity{1.0, 0.0}}}, {}, 1.0, 2.0); }

const ConditioningLimit kScaleLimit{[](double y) { return y; }, 0.0, {}};

}  // namespace

TEST(Chain, BrownianStencilsAreExact) {
    const auto c = build_chain(measures::reflecting_bm(), {.spacing = 1.0 / 16});
    ASSERT_EQ(c.size(), 17u);
    const double d = 1.0 / 16;
    EXPECT_EQ(c.top, ChainModel::Top::Reflecting);
    EXPECT_DOUBLE_EQ(c.up[0], 1.0);
    EXPECT_NEAR(c.hold[0], d * d / 2, 1e-15);
    for (std::size_t i = 1; i + 1 < c.size(); ++i) {
        EXPECT_NEAR(c.up[i], 0.5, 1e-12);
        EXPECT_NEAR(c.hold[i], d * d / 2, 1e-15);
        EXPECT_EQ(c.kill[i], 0.0);
    }
    EXPECT_EQ(c.up.back(), 0.0);
    EXPECT_NEAR(c.hold.back(), d * d / 2, 1e-15);
}

TEST(Chain, ExtraNodesAndLookup) {
    const auto c = build_chain(measures::reflecting_bm(), {.spacing = 1.0 / 8, .extra_nodes = {1.0 / 128}});
    EXPECT_EQ(c.node(1.0 / 128), 1u);
    EXPECT_EQ(c.node(0.5), 5u);
    EXPECT_NEAR(c.up[1], (1.0 / 128) / (1.0 / 8), 1e-12);
    EXPECT_THROW(c.node(0.3), OutOfDomain);
    EXPECT_THROW(build_chain(measures::reflecting_bm(), {.extra_nodes = {1.5}}), OutOfDomain);
}

TEST(Chain, Boundaries) {
    const auto absorbed = build_chain(measures::absorbed_bm());
    EXPECT_EQ(absorbed.top, ChainModel::Top::Absorbing);
    EXPECT_DOUBLE_EQ(absorbed.x.back(), 1.0);

    const auto elastic = build_chain(elastic_bm(), {.spacing = 0.25});
    EXPECT_EQ(elastic.top, ChainModel::Top::Absorbing);
    ASSERT_DOUBLE_EQ(elastic.x.back(), 2.0);
    const std::size_t lp = elastic.node(1.0);
    EXPECT_NEAR(elastic.up[lp], 0.25 / 1.25, 1e-12);

    const auto half = build_chain(measures::half_line_bm(), {.x_max = 10.0});
    EXPECT_TRUE(half.truncated);
    EXPECT_DOUBLE_EQ(half.x.back(), 10.0);
}

TEST(Hitting, ReflectingBmExamples) {
    const auto c = build_chain(measures::reflecting_bm(), {.spacing = 1.0 / 32});
    expect_within(estimate_hit_probability(c, 0.5, 0.0, 1.0, quick()), 0.5);
    expect_within(estimate_hitting_mean(c, 1.0, 0.0, quick()), 0.5);
    expect_within(estimate_hitting_laplace(c, 1.0, 0.0, 1.0, quick()), 1.0 / std::cosh(1.0));
    EXPECT_THROW(estimate_hitting_laplace(c, 1.0, 0.0, 0.0, quick()), InvalidQ);
}

TEST(Hitting, LaplaceTransformMatchesRhoOnCanonicalMeasures) {
    struct Case {
        SpeedMeasure m;
        std::function<double(double, double)> rho;
    };
    const std::vector<Case> cases{
        {measures::reflecting_bm(), [](double q, double x) { return std::cosh(std::sqrt(q) * (1 - x)) / std::cosh(std::sqrt(q)); }},
        {measures::absorbed_bm(), [](double q, double x) { return std::sinh(std::sqrt(q) * (1 - x)) / std::sinh(std::sqrt(q)); }},
        {measures::half_line_bm(), [](double q, double x) { return std::exp(-std::sqrt(q) * x); }},
    };
    for (const auto& c : cases) {
        const auto chain = build_chain(c.m, {.spacing = 1.0 / 32, .x_max = 40.0});
        for (double q : {0.5, 1.0})
            for (double x : {0.25, 0.5, 1.0}) {
                SCOPED_TRACE("q=" + std::to_string(q) + " x=" + std::to_string(x));
                expect_within(estimate_hitting_laplace(chain, x, 0.0, q, quick(5000)), c.rho(q, x));
            }
    }
}

TEST(Hitting, ExitProbabilityExactAcrossRefinements) {
    for (double spacing : {1.0 / 8, 1.0 / 16, 1.0 / 32}) {
        const auto c = build_chain(measures::reflecting_bm(), {.spacing = spacing});
        const auto e = estimate_hit_probability(c, 0.25, 0.0, 0.75, quick(10000));
        EXPECT_LE(std::abs(e.value - 2.0 / 3.0), std::max(3.0 * e.std_error, 1e-3));
    }
}

TEST(Hitting, ElasticBoundaryKillsThroughL) {
    const auto c = build_chain(elastic_bm(), {.spacing = 0.125});
    // Killing at l' is calibrated so that P_x(T_l < T_0) = x / l.
    expect_within(estimate_hit_probability(c, 0.5, 2.0, 0.0, quick()), 0.25);
    const auto never = estimate_hitting_mean(c, 0.5, 0.0, quick(2000));
    EXPECT_TRUE(std::isinf(never.value));
}

TEST(Excursion, EntranceLawOfLevels) {
    const double eps = 1.0 / 128;
    const auto c = build_chain(measures::reflecting_bm(), {.spacing = 1.0 / 32, .extra_nodes = {eps}});
    expect_within(estimate_excursion(c, 0.25, eps, quick()), 4.0);
    expect_within(estimate_excursion(c, 0.5, eps, quick()), 2.0);

    const auto a = build_chain(measures::absorbed_bm(), {.spacing = 1.0 / 32, .extra_nodes = {eps}});
    expect_within(estimate_excursion(a, 1.0, eps, quick()), 1.0);
    EXPECT_EQ(estimate_excursion(a, 0.0, eps, quick()).value, 0.0);
}

TEST(Determinism, IndependentOfWorkerCount) {
    const auto c = build_chain(measures::reflecting_bm(), {.spacing = 1.0 / 32});
    auto one = quick(5000, 11);
    one.workers = 1;
    auto three = one;
    three.workers = 3;
    const auto a = estimate_hitting_laplace(c, 0.5, 0.0, 2.0, one);
    const auto b = estimate_hitting_laplace(c, 0.5, 0.0, 2.0, three);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.std_error, b.std_error);
    EXPECT_EQ(a.seed, 11u);
    auto other = one;
    other.seed = 12;
    EXPECT_NE(estimate_hitting_laplace(c, 0.5, 0.0, 2.0, other).value, a.value);
}

TEST(Transformed, ZeroTransformKillsInside) {
    const auto disc = Discretization::build(measures::reflecting_bm());
    const auto ht = build_htransform(disc, HKind::Zero);
    const auto c = build_chain(ht, {.spacing = 1.0 / 16});
    EXPECT_DOUBLE_EQ(c.up[1], 1.0);
    for (std::size_t i = 1; i < c.size(); ++i) EXPECT_GT(c.kill[i], 0.0);
    // The transformed process never reaches 0: every walk ends in the killing.
    const auto reach = estimate_hit_probability(c, 0.5, 1.0 / 16, 1.0, quick(2000));
    EXPECT_LT(reach.value, 1.0);
}

TEST(Transformed, ScaleTransformHittingMatchesKernel) {
    const auto disc = Discretization::build(measures::absorbed_bm());
    const auto ht = build_htransform(disc, HKind::Scale);
    const auto c = build_chain(ht, {.spacing = 1.0 / 32});
    EXPECT_EQ(c.top, ChainModel::Top::Absorbing);
    // P^s_x(T_y < T_1) = (1 - x) y / ((1 - y) x) below the start.
    expect_within(estimate_hit_probability(c, 0.5, 0.25, 1.0, quick()), 1.0 / 3.0);
    const double exact = transformed_hitting_laplace(ht, 0.25, 0.75, 2.0);
    expect_within(estimate_hitting_laplace(c, 0.25, 0.75, 2.0, quick()), exact, 4.0);
}

TEST(Conditioning, LevelHorizonOnHalfLine) {
    const auto c = build_chain(measures::half_line_bm(), {.x_max = 40.0});
    const ConditioningScheme scheme{ConditioningScheme::Variant::LevelHorizon, 8.0,
                                    {PathFunctional::Kind::HitBefore, 1.0, 2.0}};
    const auto r = conditioning_experiment(c, scheme, kScaleLimit, 1.0, quick());
    EXPECT_TRUE(r.agrees()) << r.empirical.value << " vs " << r.predicted.value;
    EXPECT_GT(r.predicted.value, 0.5);
    EXPECT_EQ(r.truncation_hits, 0u);
}

TEST(Conditioning, ExpClockOnReflectingBm) {
    const auto c = build_chain(measures::reflecting_bm(), {.spacing = 1.0 / 32});
    const ConditioningLimit limit{[](double y) { return y - y * y / 2; }, 0.0, {}};
    const ConditioningScheme scheme{ConditioningScheme::Variant::ExpClock, 1e-2,
                                    {PathFunctional::Kind::MarginalAbove, 0.2, 0.5}};
    const auto r = conditioning_experiment(c, scheme, limit, 0.5, quick());
    EXPECT_TRUE(r.agrees()) << r.empirical.value << " vs " << r.predicted.value;
    EXPECT_LT(r.bias_budget, 1e-2);

    // P(clock before T_0) ~ q E_x[T_0] is too small for n = 2e4 at q = 1e-4.
    const ConditioningScheme rare{ConditioningScheme::Variant::ExpClock, 1e-4, scheme.functional};
    EXPECT_THROW(conditioning_experiment(c, rare, limit, 0.5, quick()), DegenerateConditioning);
}

TEST(Conditioning, TimeHorizonOnReflectingBm) {
    constexpr double pi = std::numbers::pi;
    const auto c = build_chain(measures::reflecting_bm(), {.spacing = 1.0 / 32});
    const ConditioningLimit limit{[](double y) { return std::sin(pi / 2 * y); }, -pi * pi / 4, {}};
    const ConditioningScheme scheme{ConditioningScheme::Variant::TimeHorizon, 1.0,
                                    {PathFunctional::Kind::MarginalAbove, 0.2, 0.5}};
    const auto r = conditioning_experiment(c, scheme, limit, 0.5, quick());
    EXPECT_TRUE(r.agrees()) << r.empirical.value << " vs " << r.predicted.value;

    const ConditioningScheme rare{ConditioningScheme::Variant::TimeHorizon, 30.0, scheme.functional};
    EXPECT_THROW(conditioning_experiment(c, rare, limit, 0.5, quick(2000)), DegenerateConditioning);
}

TEST(Supermartingale, ScaleAndH0) {
    const auto c = build_chain(measures::reflecting_bm(), {.spacing = 1.0 / 32});
    const std::vector<double> ts{0.1, 0.5, 1.0};
    const auto rows = supermartingale_check(c, 0.5, ts, [](double y) { return y - y * y / 2; }, 1.0, quick());
    ASSERT_EQ(rows.size(), 3u);
    for (const auto& r : rows) {
        EXPECT_FALSE(r.violation);
        EXPECT_LT(r.mean.value, 0.5);
        EXPECT_LE(std::abs(r.h0_gap.value), 3.0 * r.h0_gap.std_error + 1e-12);
    }
}

TEST(Report, CsvColumns) {
    std::ostringstream out;
    const std::vector<SimReportRow> rows{{"P(T0<T1)", {0.5, 0.01, 100, 1, 0}, 0.5, true}};
    write_sim_report(out, rows);
    EXPECT_EQ(out.str(), "quantity,estimate,stderr,n,predicted,pass\nP(T0<T1),0.5,0.01,100,0.5,true\n");
}
