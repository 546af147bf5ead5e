#include "hdiff/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "hdiff/csv.hpp"
#include "hdiff/error.hpp"
#include "hdiff/grid.hpp"
#include "hdiff/htransform.hpp"
#include "hdiff/resolvent.hpp"
#include "json_reader.hpp"

namespace hdiff {

namespace {

using detail::json;
using detail::Reader;
using Quantity = ExperimentItem::Quantity;
using Variant = ConditioningScheme::Variant;

struct Named {
    std::string_view name;
    Quantity quantity;
};
constexpr Named kQuantities[] = {
    {"hit-probability", Quantity::HitProbability}, {"hitting-laplace", Quantity::HittingLaplace},
    {"hitting-mean", Quantity::HittingMean},       {"excursion", Quantity::Excursion},
    {"conditioning", Quantity::Conditioning},      {"supermartingale", Quantity::Supermartingale},
};

std::string_view quantity_name(Quantity q) {
    for (const auto& n : kQuantities)
        if (n.quantity == q) return n.name;
    return "?";
}

std::string num(double v) { return format_number(v, true); }

std::size_t positive_count(const Reader& rd, const json& j, const std::string& path) {
    const double v = rd.number(j, path, false);
    if (!(v >= 1.0) || v != std::floor(v) || v > 1e15) rd.fail(path, "expected a positive integer");
    return static_cast<std::size_t>(v);
}

double positive(const Reader& rd, const json& j, const std::string& path) {
    const double v = rd.number(j, path, false);
    if (!(v > 0.0)) rd.fail(path, "must be positive");
    return v;
}

double nonnegative(const Reader& rd, const json& j, const std::string& path) {
    const double v = rd.number(j, path, false);
    if (v < 0.0) rd.fail(path, "must be non-negative");
    return v;
}

ExperimentItem parse_item(const Reader& rd, const json& j, const std::string& path) {
    const auto& jq = rd.field(j, "quantity", path);
    if (!jq.is_string()) rd.fail(path + ".quantity", "expected a string");
    const auto name = jq.get<std::string>();
    const auto it = std::find_if(std::begin(kQuantities), std::end(kQuantities),
                                 [&](const Named& n) { return n.name == name; });
    if (it == std::end(kQuantities)) rd.fail(path + ".quantity", "unknown quantity '" + name + "'");

    ExperimentItem item;
    item.quantity = it->quantity;
    auto get = [&](const char* key, auto parse) { return parse(rd, rd.field(j, key, path), path + "." + key); };
    switch (item.quantity) {
        case Quantity::HitProbability:
            rd.only_keys(j, path, {"quantity", "x", "a", "b"});
            item.x = get("x", nonnegative);
            item.a = get("a", nonnegative);
            item.b = get("b", nonnegative);
            if (item.a == item.b) rd.fail(path + ".b", "a and b must differ");
            break;
        case Quantity::HittingLaplace:
            rd.only_keys(j, path, {"quantity", "x", "target", "q"});
            item.x = get("x", nonnegative);
            item.target = get("target", nonnegative);
            item.q = get("q", positive);
            break;
        case Quantity::HittingMean:
            rd.only_keys(j, path, {"quantity", "x", "target"});
            item.x = get("x", nonnegative);
            item.target = get("target", nonnegative);
            break;
        case Quantity::Excursion:
            rd.only_keys(j, path, {"quantity", "level", "eps"});
            item.level = get("level", nonnegative);
            item.eps = get("eps", positive);
            break;
        case Quantity::Conditioning: {
            rd.only_keys(j, path, {"quantity", "scheme", "parameter", "x", "functional"});
            const auto& js = rd.field(j, "scheme", path);
            const std::string sp = path + ".scheme";
            if (!js.is_string()) rd.fail(sp, "expected a string");
            const auto sname = js.get<std::string>();
            bool found = false;
            for (auto v : {Variant::LevelHorizon, Variant::TimeHorizon, Variant::ExpClock})
                if (to_string(v) == sname) {
                    item.scheme.variant = v;
                    found = true;
                }
            if (!found) rd.fail(sp, "unknown scheme '" + sname + "'");
            item.scheme.parameter = get("parameter", positive);
            item.x = get("x", positive);
            const auto& jf = rd.field(j, "functional", path);
            const std::string fp = path + ".functional";
            rd.only_keys(jf, fp, {"kind", "t0", "level"});
            const auto& jk = rd.field(jf, "kind", fp);
            if (!jk.is_string()) rd.fail(fp + ".kind", "expected a string");
            const auto kind = jk.get<std::string>();
            auto& f = item.scheme.functional;
            if (kind == "one")
                f.kind = PathFunctional::Kind::One;
            else if (kind == "marginal-above")
                f.kind = PathFunctional::Kind::MarginalAbove;
            else if (kind == "hit-before")
                f.kind = PathFunctional::Kind::HitBefore;
            else
                rd.fail(fp + ".kind", "unknown functional '" + kind + "'");
            f.t0 = positive(rd, rd.field(jf, "t0", fp), fp + ".t0");
            if (f.kind != PathFunctional::Kind::One)
                f.level = nonnegative(rd, rd.field(jf, "level", fp), fp + ".level");
            break;
        }
        case Quantity::Supermartingale: {
            rd.only_keys(j, path, {"quantity", "x", "times"});
            item.x = get("x", positive);
            const auto& jt = rd.field(j, "times", path);
            const std::string tp = path + ".times";
            if (!jt.is_array() || jt.empty()) rd.fail(tp, "expected a non-empty array");
            for (std::size_t i = 0; i < jt.size(); ++i) {
                item.times.push_back(positive(rd, jt[i], tp + "[" + std::to_string(i) + "]"));
                if (i > 0 && item.times[i] <= item.times[i - 1]) rd.fail(tp, "times must increase");
            }
            break;
        }
    }
    return item;
}

/// P_x(T_a < T_b) on the natural scale, with reflection at 0 and absorption at l.
double hit_probability(const SpeedMeasure& m, double x, double a, double b) {
    if (x == a) return 1.0;
    if (x == b) return 0.0;
    const double lo = std::min(a, b), hi = std::max(a, b);
    if (x > lo && x < hi) {
        const double p_lo = (hi - x) / (hi - lo);
        return a == lo ? p_lo : 1.0 - p_lo;
    }
    if (x < lo) return a == lo ? 1.0 : 0.0;
    // Above both: the upper level is reached unless the path is absorbed at l first.
    const bool absorbed = state_space(m).l_in_I;
    const double reach = absorbed ? (m.l() - x) / (m.l() - hi) : 1.0;
    return a == hi ? reach : 0.0;
}

/// E_x[T_y] from the Green function of the process reflected at 0.
double hitting_mean(const SpeedMeasure& m, double x, double y) {
    if (x == y) return 0.0;
    if (y > x) return m.integrated_mass(y) - m.integrated_mass(x);
    if (state_space(m).l_in_I) return kInf;
    const double tail = m.tail_mass(x);
    if (!std::isfinite(tail)) return kInf;
    return m.moment(1, y, x) - y * m.mass(y, x) + (x - y) * tail;
}

bool agrees(const SimEstimate& e, double predicted) {
    if (std::isinf(predicted) || std::isinf(e.value)) return predicted == e.value;
    return std::abs(e.value - predicted) <= 3.0 * e.std_error + 1e-12;
}

}  // namespace

std::string ExperimentItem::describe() const {
    switch (quantity) {
        case Quantity::HitProbability: return "P_" + num(x) + "(T_" + num(a) + " < T_" + num(b) + ")";
        case Quantity::HittingLaplace: return "E_" + num(x) + "[exp(-" + num(q) + " T_" + num(target) + ")]";
        case Quantity::HittingMean: return "E_" + num(x) + "[T_" + num(target) + "]";
        case Quantity::Excursion: return "excursion 1{T_" + num(level) + " < inf} eps=" + num(eps);
        case Quantity::Conditioning:
            return std::string(to_string(scheme.variant)) + " " + num(scheme.parameter) + " F=" +
                   scheme.functional.describe() + " x=" + num(x);
        case Quantity::Supermartingale: return "E0_" + num(x) + "[X_t]";
    }
    return std::string(quantity_name(quantity));
}

ExperimentConfig parse_experiment(std::string_view text, const std::filesystem::path& base_dir) {
    Reader rd(text);
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        const std::size_t pos = std::min<std::size_t>(e.byte, text.size());
        const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + pos, '\n'));
        throw ParseError(line, "document", "malformed JSON");
    }
    if (!doc.is_object()) rd.fail("", "expected a top-level object");
    rd.only_keys(doc, "", {"measure", "n", "seed", "chain", "experiments"});

    ExperimentConfig cfg;
    const auto& jm = rd.field(doc, "measure", "");
    if (!jm.is_string()) rd.fail("measure", "expected a measure name or path");
    cfg.measure = jm.get<std::string>();
    const bool builtin = cfg.measure == "reflecting-bm" || cfg.measure == "half-line-bm" || cfg.measure == "absorbed-bm";
    if (!builtin && !base_dir.empty() && std::filesystem::path(cfg.measure).is_relative())
        cfg.measure = (base_dir / cfg.measure).string();
    if (doc.contains("n")) cfg.n = positive_count(rd, doc["n"], "n");
    if (doc.contains("seed")) cfg.seed = positive_count(rd, doc["seed"], "seed");
    if (doc.contains("chain")) {
        const auto& jc = doc["chain"];
        rd.only_keys(jc, "chain", {"spacing", "x_max"});
        if (jc.contains("spacing")) cfg.chain.spacing = positive(rd, jc["spacing"], "chain.spacing");
        if (jc.contains("x_max")) cfg.chain.x_max = positive(rd, jc["x_max"], "chain.x_max");
    }
    const auto& je = rd.field(doc, "experiments", "");
    if (!je.is_array() || je.empty()) rd.fail("experiments", "expected a non-empty array");
    for (std::size_t i = 0; i < je.size(); ++i)
        cfg.items.push_back(parse_item(rd, je[i], "experiments[" + std::to_string(i) + "]"));
    return cfg;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open experiment file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_experiment(ss.str(), path.parent_path());
}

ExperimentConfig standard_experiment(const SpeedMeasure& m, std::span<const double> qs) {
    const double span = m.lprime_finite() ? m.lprime() : 2.0;
    const double x = 0.5 * span;
    ExperimentConfig cfg;
    cfg.chain.spacing = span / 32.0;
    cfg.chain.x_max = 40.0;
    auto item = [](Quantity q) {
        ExperimentItem it;
        it.quantity = q;
        return it;
    };
    auto hp = item(Quantity::HitProbability);
    hp.x = x;
    hp.a = 0.0;
    hp.b = span;
    cfg.items.push_back(hp);
    for (double q : qs) {
        auto hl = item(Quantity::HittingLaplace);
        hl.x = x;
        hl.q = q;
        cfg.items.push_back(hl);
    }
    if (m.pi0() > 0.0) {
        auto hm = item(Quantity::HittingMean);
        hm.x = x;
        cfg.items.push_back(hm);
    }
    auto ex = item(Quantity::Excursion);
    ex.level = x;
    ex.eps = span / 128.0;
    cfg.items.push_back(ex);
    auto sm = item(Quantity::Supermartingale);
    sm.x = x;
    sm.times = {0.1, 0.5, 1.0};
    cfg.items.push_back(sm);
    return cfg;
}

std::vector<SimReportRow> run_experiment(const ExperimentConfig& cfg, const SpeedMeasure& m, unsigned workers) {
    ChainConfig cc = cfg.chain;
    for (const auto& it : cfg.items) {
        for (double v : {it.x, it.a, it.b, it.target, it.level, it.eps})
            if (v > 0.0) cc.extra_nodes.push_back(v);
        if (it.quantity == Quantity::Conditioning) {
            if (it.scheme.variant == Variant::LevelHorizon) cc.extra_nodes.push_back(it.scheme.parameter);
            if (it.scheme.functional.kind == PathFunctional::Kind::HitBefore && it.scheme.functional.level > 0.0)
                cc.extra_nodes.push_back(it.scheme.functional.level);
        }
    }
    const auto chain = build_chain(m, cc);

    DiscretizationPtr disc;
    auto discretization = [&] {
        if (!disc) disc = Discretization::build(m);
        return disc;
    };
    std::optional<HTransform> zero, ground;
    auto h0 = [&]() -> const HTransform& {
        if (!zero) zero = build_htransform(discretization(), HKind::Zero);
        return *zero;
    };

    SimOptions opts;
    opts.n = cfg.n;
    opts.seed = cfg.seed;
    opts.workers = workers;
    std::vector<SimReportRow> rows;
    for (std::size_t k = 0; k < cfg.items.size(); ++k) {
        const auto& it = cfg.items[k];
        // Each item gets its own stream so reordering items does not change results.
        opts.seed = cfg.seed + 1000003ULL * k;
        SimReportRow row;
        row.quantity = it.describe();
        switch (it.quantity) {
            case Quantity::HitProbability:
                row.estimate = estimate_hit_probability(chain, it.x, it.a, it.b, opts);
                row.predicted = hit_probability(m, it.x, it.a, it.b);
                break;
            case Quantity::HittingLaplace: {
                row.estimate = estimate_hitting_laplace(chain, it.x, it.target, it.q, opts);
                const ResolventKernel rk(discretization(), it.q);
                row.predicted = hitting_laplace(rk, it.x, it.target);
                break;
            }
            case Quantity::HittingMean:
                row.estimate = estimate_hitting_mean(chain, it.x, it.target, opts);
                row.predicted = hitting_mean(m, it.x, it.target);
                break;
            case Quantity::Excursion:
                row.estimate = estimate_excursion(chain, it.level, it.eps, opts);
                row.predicted = it.level > 0.0 ? 1.0 / it.level : 0.0;
                break;
            case Quantity::Conditioning: {
                ConditioningLimit limit;
                switch (it.scheme.variant) {
                    case Variant::LevelHorizon: limit.h = [](double y) { return y; }; break;
                    case Variant::ExpClock: {
                        const auto& ht = h0();
                        limit.h = [&ht](double y) { return ht.h_at(y); };
                        break;
                    }
                    case Variant::TimeHorizon: {
                        if (!ground) ground = build_htransform(discretization(), HKind::Ground);
                        const auto& ht = *ground;
                        limit.h = [&ht](double y) { return ht.h_at(y); };
                        limit.alpha = ht.alpha;
                        break;
                    }
                }
                const auto r = conditioning_experiment(chain, it.scheme, limit, it.x, opts);
                row.estimate = r.empirical;
                row.predicted = r.predicted.value;
                row.pass = r.agrees();
                rows.push_back(row);
                continue;
            }
            case Quantity::Supermartingale: {
                const auto& ht = h0();
                const auto res = supermartingale_check(chain, it.x, it.times, [&ht](double y) { return ht.h_at(y); },
                                                       m.pi0(), opts);
                for (const auto& r : res) {
                    rows.push_back({"E0_" + num(it.x) + "[X_t] t=" + num(r.t), r.mean, it.x, !r.violation});
                    rows.push_back({"h0 identity gap t=" + num(r.t), r.h0_gap, 0.0, agrees(r.h0_gap, 0.0)});
                }
                continue;
            }
        }
        row.pass = agrees(row.estimate, row.predicted);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace hdiff
