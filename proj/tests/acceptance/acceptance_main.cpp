/// Acceptance gate: one PASS/FAIL line per criterion; exit status 0 iff all pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "hdiff/eigen.hpp"
#include "hdiff/family.hpp"
#include "hdiff/htransform.hpp"
#include "hdiff/identities.hpp"
#include "hdiff/simulate.hpp"

using namespace hdiff;

namespace {

constexpr double kPi = std::numbers::pi;

/// Accumulates failure notes of one criterion; printed under the verdict line.
struct Findings {
    std::vector<std::string> notes;
    void require(bool ok, const std::string& what) {
        if (!ok) notes.push_back(what);
    }
};

std::string fmt(const char* f, auto... v) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, v...);
    return buf;
}

/// Largest pointwise relative error over the grid nodes; exact zeros must be reproduced to 1e-12.
double max_rel(const GridFunction& f, const std::function<double(double)>& exact) {
    double worst = 0.0;
    for (double x : f.disc().nodes()) {
        const double r = exact(x);
        const double e = r == 0.0 ? (std::abs(f(x)) > 1e-12 ? kInf : 0.0) : std::abs(f(x) - r) / std::abs(r);
        worst = std::max(worst, e);
    }
    return worst;
}

bool within(const SimEstimate& e, double predicted, double sigmas = 3.0) {
    return std::abs(e.value - predicted) <= sigmas * e.std_error;
}

std::string show(const char* name, const SimEstimate& e, double predicted) {
    return fmt("%s: %.6f +- %.6f vs %.6f", name, e.value, e.std_error, predicted);
}

void golden(Findings& f) {
    const auto disc = Discretization::build(measures::reflecting_bm());
    for (double q : {0.5, 1.0, 2.0}) {
        const double r = std::sqrt(q);
        const auto es = solve_eigen(disc, q);
        const double e_phi = max_rel(es.phi, [r](double x) { return std::cosh(r * x); });
        const double e_psi = max_rel(es.psi, [r](double x) { return std::sinh(r * x) / r; });
        const double H = 1.0 / (r * std::tanh(r));
        f.require(e_phi <= 1e-6, fmt("phi q=%g rel %.3g", q, e_phi));
        f.require(e_psi <= 1e-6, fmt("psi q=%g rel %.3g", q, e_psi));
        f.require(std::abs(es.H - H) <= 1e-6 * H, fmt("H(%g) = %.12g vs %.12g", q, es.H, H));
    }
    const auto zr = zero_resolvent(disc);
    const double e_h0 = max_rel(zr.h0, [](double x) { return x - 0.5 * x * x; });
    f.require(e_h0 <= 1e-6, fmt("h0 rel %.3g", e_h0));
    const auto gs = ground_state(disc);
    const double e_hs = max_rel(gs.h_star, [](double x) { return (2.0 / kPi) * std::sin(kPi * x / 2.0); });
    f.require(e_hs <= 1e-6, fmt("h* rel %.3g", e_hs));
}

void ground_eigenvalue(Findings& f) {
    const auto gs = ground_state(Discretization::build(measures::reflecting_bm()));
    const double err = std::abs(gs.gamma_star + kPi * kPi / 4.0);
    f.require(err <= 1e-6, fmt("gamma* = %.12g, error %.3g", gs.gamma_star, err));
}

void identity_suite(Findings& f) {
    const std::pair<const char*, SpeedMeasure> targets[] = {{"reflecting-bm", measures::reflecting_bm()},
                                                            {"half-line-bm", measures::half_line_bm()},
                                                            {"absorbed-bm", measures::absorbed_bm()}};
    for (const auto& [name, m] : targets) {
        IdentityContext ctx(Discretization::build(m));
        const auto results = verify_suite(ctx, 1e-6);
        f.require(!results.empty(), fmt("%s: empty identity suite", name));
        for (const auto& r : results)
            f.require(r.pass, fmt("%s: %s [%s] residual %.3g", name, r.identity.c_str(), r.params.c_str(), r.residual));
    }
}

void classification(Findings& f) {
    f.require(classification_family().size() >= 8, "family has fewer than 8 measures");
    for (const auto& c : check_family_conformance())
        f.require(c.pass, fmt("%s %s: expected %s, got %s", c.member.c_str(), c.check.c_str(), c.expected.c_str(),
                              c.actual.c_str()));
}

SimOptions mc(std::uint64_t seed) {
    SimOptions o;
    o.n = 100000;
    o.seed = seed;
    return o;
}

ChainModel rb_chain() {
    ChainConfig cfg;
    cfg.spacing = 1.0 / 32.0;
    cfg.extra_nodes = {1.0 / 128.0};
    return build_chain(measures::reflecting_bm(), cfg);
}

void monte_carlo(Findings& f) {
    const auto chain = rb_chain();
    const auto p = estimate_hit_probability(chain, 0.5, 0.0, 1.0, mc(101));
    const auto m = estimate_hitting_mean(chain, 1.0, 0.0, mc(102));
    const auto l = estimate_hitting_laplace(chain, 1.0, 0.0, 1.0, mc(103));
    f.require(within(p, 0.5), show("P_0.5(T0<T1)", p, 0.5));
    f.require(within(m, 0.5), show("E_1[T0]", m, 0.5));
    f.require(within(l, 1.0 / std::cosh(1.0)), show("E_1[exp(-T0)]", l, 1.0 / std::cosh(1.0)));
    std::uint64_t seed = 104;
    for (double x : {0.25, 0.5}) {
        const auto e = estimate_excursion(chain, x, 1.0 / 128.0, mc(seed++));
        f.require(within(e, 1.0 / x), show(fmt("excursion x=%g", x).c_str(), e, 1.0 / x));
    }
}

/// P_y(T0 > u) for Brownian motion reflected at 1.
double rb_survival(double y, double u) {
    double s = 0.0;
    for (int k = 0; k < 200; ++k) {
        const double a = (k + 0.5) * kPi;
        s += 4.0 / ((2 * k + 1) * kPi) * std::sin(a * y) * std::exp(-a * a * u);
    }
    return s;
}

/// P_y(T0 > u) for Brownian motion on the half-line.
double hl_survival(double y, double u) { return std::erf(y / (2.0 * std::sqrt(u))); }

void check_scheme(Findings& f, const char* measure, const ChainModel& chain, const ConditioningScheme& scheme,
                  const ConditioningLimit& limit, double x, std::uint64_t seed) {
    const auto r = conditioning_experiment(chain, scheme, limit, x, mc(seed));
    f.require(r.agrees(3.0), fmt("%s %s: empirical %.6f +- %.6f, predicted %.6f +- %.6f, budget %.3g", measure,
                                 std::string(to_string(scheme.variant)).c_str(), r.empirical.value,
                                 r.empirical.std_error, r.predicted.value, r.predicted.std_error, r.bias_budget));
}

void conditioning(Findings& f) {
    using V = ConditioningScheme::Variant;
    const auto s = [](double y) { return y; };

    const auto rb = measures::reflecting_bm();
    const auto disc = Discretization::build(rb);
    const auto zero = build_htransform(disc, HKind::Zero);
    const auto ground = build_htransform(disc, HKind::Ground);
    const auto h0 = [&zero](double y) { return zero.h_at(y); };
    const auto hs = [&ground](double y) { return ground.h_at(y); };
    const auto chain = rb_chain();
    const PathFunctional above{PathFunctional::Kind::MarginalAbove, 0.2, 0.5};
    check_scheme(f, "reflecting-bm", chain, {V::ExpClock, 1e-3, above}, {h0, 0.0, {}}, 0.5, 201);
    check_scheme(f, "reflecting-bm", chain, {V::TimeHorizon, 1.0, above}, {hs, ground.alpha, rb_survival}, 0.5, 202);
    check_scheme(f, "reflecting-bm", chain, {V::LevelHorizon, 1.0, above}, {s, 0.0, {}}, 0.5, 203);

    ChainConfig wide;
    wide.x_max = 4000.0;
    const auto hl = build_chain(measures::half_line_bm(), wide);
    const PathFunctional early{PathFunctional::Kind::HitBefore, 1.0, 2.0};
    check_scheme(f, "half-line-bm", hl, {V::ExpClock, 1e-4, early}, {s, 0.0, {}}, 1.0, 204);
    check_scheme(f, "half-line-bm", hl, {V::TimeHorizon, 50.0, early}, {s, 0.0, hl_survival}, 1.0, 205);
    check_scheme(f, "half-line-bm", hl, {V::LevelHorizon, 8.0, early}, {s, 0.0, {}}, 1.0, 206);
}

void supermartingale(Findings& f) {
    const std::vector<double> times{0.1, 0.5, 1.0, 2.0};
    const double x = 0.5;
    struct Target {
        const char* name;
        SpeedMeasure m;
        bool invariant_s;
        bool h0_identity;
    };
    const Target targets[] = {{"reflecting-bm", measures::reflecting_bm(), false, true},
                              {"half-line-bm", measures::half_line_bm(), true, false},
                              {"absorbed-bm", measures::absorbed_bm(), false, false}};
    std::uint64_t seed = 301;
    for (const auto& t : targets) {
        ChainConfig cfg;
        if (t.m.lprime_finite()) cfg.spacing = 1.0 / 32.0;
        else cfg.x_max = 40.0;
        const auto chain = build_chain(t.m, cfg);
        const auto zero = build_htransform(Discretization::build(t.m), HKind::Zero);
        const auto rows = supermartingale_check(
            chain, x, times, [&zero](double y) { return zero.h_at(y); }, t.m.pi0(), mc(seed++));
        for (const auto& r : rows) {
            f.require(!r.violation, show(fmt("%s E0[X_%g] <= x", t.name, r.t).c_str(), r.mean, x));
            if (t.invariant_s) f.require(within(r.mean, x), show(fmt("%s E0[X_%g] = x", t.name, r.t).c_str(), r.mean, x));
            if (t.h0_identity) f.require(within(r.h0_gap, 0.0), show(fmt("%s h0 gap t=%g", t.name, r.t).c_str(), r.h0_gap, 0.0));
        }
    }
}

struct Criterion {
    int id;
    const char* title;
    double budget_s;
    void (*body)(Findings&);
};

}  // namespace

int main() {
    const Criterion criteria[] = {
        {1, "closed-form golden suite (reflecting BM)", 5.0, golden},
        {2, "ground-state eigenvalue -pi^2/4", 5.0, ground_eigenvalue},
        {3, "identity residual suite on the canonical measures", 30.0, identity_suite},
        {4, "classification conformance", 10.0, classification},
        {5, "Monte Carlo hitting and excursion agreement", 60.0, monte_carlo},
        {6, "conditioning limits vs h-transform predictions", 120.0, conditioning},
        {7, "supermartingale and invariance checks", 60.0, supermartingale},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Findings f;
        const auto start = std::chrono::steady_clock::now();
        try {
            c.body(f);
        } catch (const std::exception& e) {
            f.notes.push_back(std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        f.require(secs < c.budget_s, fmt("runtime %.2f s exceeds %.0f s", secs, c.budget_s));
        const bool ok = f.notes.empty();
        failed += !ok;
        std::printf("%s criterion %d: %s (%.2f s)\n", ok ? "PASS" : "FAIL", c.id, c.title, secs);
        for (const auto& n : f.notes) std::printf("    %s\n", n.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
