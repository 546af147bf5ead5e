#include "hdiff/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <random>
#include <thread>

#include "hdiff/csv.hpp"
#include "hdiff/error.hpp"
#include "hdiff/quadrature.hpp"

namespace hdiff {

namespace {

using Rng = std::mt19937_64;

inline double unit(Rng& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

std::uint64_t splitmix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed of replicate `idx`; independent of how replicates are scheduled.
std::uint64_t replicate_seed(std::uint64_t seed, std::uint64_t idx) { return splitmix(splitmix(seed) ^ idx); }

/// Running sums of K observation channels and their cross products.
struct Tally {
    explicit Tally(std::size_t k = 0) : k(k), sum(k, 0.0), cross(k * k, 0.0) {}

    std::size_t k;
    std::size_t n = 0, capped = 0, flagged = 0;
    std::vector<double> sum, cross;

    void add(std::span<const double> v) {
        ++n;
        for (std::size_t a = 0; a < k; ++a) {
            sum[a] += v[a];
            for (std::size_t b = 0; b < k; ++b) cross[a * k + b] += v[a] * v[b];
        }
    }
    void merge(const Tally& o) {
        n += o.n;
        capped += o.capped;
        flagged += o.flagged;
        for (std::size_t a = 0; a < k; ++a) sum[a] += o.sum[a];
        for (std::size_t a = 0; a < k * k; ++a) cross[a] += o.cross[a];
    }
    double mean(std::size_t a) const { return n ? sum[a] / static_cast<double>(n) : 0.0; }
    double cov(std::size_t a, std::size_t b) const {
        if (n < 2) return 0.0;
        const double dn = static_cast<double>(n);
        return (cross[a * k + b] - sum[a] * sum[b] / dn) / (dn - 1.0);
    }
    /// Standard error of the mean of channel a.
    double stderr_of(std::size_t a) const {
        return n ? std::sqrt(std::max(0.0, cov(a, a)) / static_cast<double>(n)) : 0.0;
    }
    /// Ratio mean(a) / mean(b) with the delta-method standard error.
    std::pair<double, double> ratio(std::size_t a, std::size_t b) const {
        const double ma = mean(a), mb = mean(b);
        if (mb == 0.0) return {0.0, 0.0};
        const double r = ma / mb;
        const double var = cov(a, a) - 2.0 * r * cov(a, b) + r * r * cov(b, b);
        return {r, std::sqrt(std::max(0.0, var) / static_cast<double>(n)) / std::abs(mb)};
    }
};

/// One replicate's output: channel values plus flags.
struct Draw {
    std::span<double> v;
    bool capped = false;
    bool flagged = false;
};

/// Runs opts.n replicates of `body` in blocks; each block is tallied in
/// replicate order and blocks are merged in index order, so the result does
/// not depend on the number of workers.
template <class Body>
Tally run_replicates(const SimOptions& opts, std::size_t channels, Body&& body) {
    constexpr std::size_t kBlock = 1024;
    if (opts.n == 0) throw InputError("replicate count must be positive");
    const std::size_t blocks = (opts.n + kBlock - 1) / kBlock;
    std::vector<Tally> partial(blocks, Tally(channels));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;

    auto work = [&] {
        std::vector<double> buf(channels);
        try {
            for (std::size_t b; (b = next.fetch_add(1)) < blocks;) {
                Tally& t = partial[b];
                const std::size_t stop = std::min(opts.n, (b + 1) * kBlock);
                for (std::size_t i = b * kBlock; i < stop; ++i) {
                    Rng rng(replicate_seed(opts.seed, i));
                    std::fill(buf.begin(), buf.end(), 0.0);
                    Draw d{buf};
                    body(rng, d);
                    if (d.flagged) ++t.flagged;
                    if (d.capped) {
                        ++t.capped;
                        continue;
                    }
                    t.add(buf);
                }
            }
        } catch (...) {
            std::lock_guard lock(failure_mu);
            if (!failure) failure = std::current_exception();
            next = blocks;
        }
    };

    unsigned workers = opts.workers ? opts.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, blocks));
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);

    Tally total(channels);
    for (const auto& p : partial) total.merge(p);
    return total;
}

SimEstimate make_estimate(const Tally& t, double value, double se, const SimOptions& opts) {
    return {value, se, t.n, opts.seed, t.capped};
}

struct Walk {
    std::size_t end = 0;
    double time = 0.0;
    double discount = 1.0;
    bool killed = false;
    bool capped = false;
    bool touched_top = false;
    bool negligible = false;
};

/// Jump chain from node i until `stop(i)` holds, the chain is killed or it
/// is absorbed at an absorbing top. `factor[i]` = E[exp(-q hold_i)].
template <class Stop>
Walk walk_until(const ChainModel& c, std::size_t i, const double* factor, std::uint64_t cap, Rng& rng,
                Stop&& stop) {
    Walk w;
    const std::size_t top = c.size() - 1;
    const bool absorbing_top = c.top == ChainModel::Top::Absorbing;
    for (std::uint64_t step = 0;; ++step) {
        if (i == top) w.touched_top = true;
        if (stop(i) || (absorbing_top && i == top)) break;
        if (step >= cap) {
            w.capped = true;
            break;
        }
        w.time += c.hold[i];
        if (factor) {
            w.discount *= factor[i];
            // Nothing left to contribute to a Laplace transform.
            if (w.discount < 1e-17) {
                w.negligible = true;
                break;
            }
        }
        double u = unit(rng);
        const double k = c.kill[i];
        if (k > 0.0) {
            if (u < k) {
                w.killed = true;
                break;
            }
            u = (u - k) / (1.0 - k);
        }
        i = u < c.up[i] ? i + 1 : i - 1;
    }
    w.end = i;
    return w;
}

enum class Outcome { Horizon, Absorbed, Killed, Capped, Stopped };

/// Continuous-time path of the chain killed at node 0, up to `horizon` or the
/// first visit to `stop_node`. `on_stay(node, t_begin, t_end)` sees every
/// holding interval.
template <class OnStay>
Outcome timed_walk(const ChainModel& c, std::size_t i, double horizon, std::size_t stop_node,
                   std::uint64_t cap, Rng& rng, OnStay&& on_stay) {
    const std::size_t top = c.size() - 1;
    const bool absorbing_top = c.top == ChainModel::Top::Absorbing;
    double t = 0.0;
    for (std::uint64_t step = 0;; ++step) {
        if (i == 0) return Outcome::Absorbed;
        if (i == stop_node) {
            on_stay(i, t, t);
            return Outcome::Stopped;
        }
        if (absorbing_top && i == top) {
            on_stay(i, t, horizon);
            return Outcome::Horizon;
        }
        if (step >= cap) return Outcome::Capped;
        double u = unit(rng);
        const double dt = -c.hold[i] * std::log1p(-u);
        if (t + dt >= horizon) {
            on_stay(i, t, horizon);
            return Outcome::Horizon;
        }
        on_stay(i, t, t + dt);
        t += dt;
        u = unit(rng);
        const double k = c.kill[i];
        if (k > 0.0) {
            if (u < k) return Outcome::Killed;
            u = (u - k) / (1.0 - k);
        }
        i = u < c.up[i] ? i + 1 : i - 1;
    }
}

constexpr std::size_t kNoNode = static_cast<std::size_t>(-1);

/// Reads the test functional, the position at t0 and first entrance times
/// into two watched nodes off the holding intervals of a timed walk.
struct PathReader {
    const ChainModel& chain;
    const PathFunctional& f;
    std::size_t level_node = kNoNode;
    std::size_t watch_a = kNoNode, watch_b = kNoNode;

    std::size_t at_t0 = 0;
    bool hit_level = false;
    double first_a = kInf, first_b = kInf;

    void operator()(std::size_t i, double t0, double t1) {
        if (t0 <= f.t0 && f.t0 <= t1) at_t0 = i;
        if (level_node != kNoNode && i >= level_node && t0 < f.t0) hit_level = true;
        if (i == watch_a && first_a == kInf) first_a = t0;
        if (i == watch_b && first_b == kInf) first_b = t0;
    }

    double value() const {
        switch (f.kind) {
            case PathFunctional::Kind::One: return 1.0;
            case PathFunctional::Kind::MarginalAbove: return chain.x[at_t0] > f.level ? 1.0 : 0.0;
            case PathFunctional::Kind::HitBefore: return hit_level ? 1.0 : 0.0;
        }
        return 0.0;
    }
};

PathReader make_reader(const ChainModel& c, const PathFunctional& f) {
    if (!(f.t0 > 0.0) || !std::isfinite(f.t0)) throw InputError("functional time t0 must be positive");
    PathReader r{c, f};
    if (f.kind == PathFunctional::Kind::HitBefore) r.level_node = c.node(f.level);
    return r;
}

/// E_i[exp(-q T_0)] for the chain (absorbed at 0), by the tridiagonal
/// first-step equations.
std::vector<double> chain_laplace(const ChainModel& c, double q) {
    const std::size_t n = c.size();
    std::vector<double> lower(n, 0.0), diag(n, 1.0), upper(n, 0.0), rhs(n, 0.0);
    rhs[0] = 1.0;
    for (std::size_t i = 1; i < n; ++i) {
        if (i == n - 1 && c.top == ChainModel::Top::Absorbing) continue;
        const double g = (1.0 - c.kill[i]) / (1.0 + q * c.hold[i]);
        lower[i] = -g * (1.0 - c.up[i]);
        if (i + 1 < n) upper[i] = -g * c.up[i];
    }
    for (std::size_t i = 1; i < n; ++i) {
        const double w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    std::vector<double> u(n);
    u[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) u[i] = (rhs[i] - upper[i] * u[i + 1]) / diag[i];
    return u;
}

std::vector<double> chain_nodes(const SpeedMeasure& m, const ChainConfig& cfg, bool& truncated, double& end) {
    truncated = !m.lprime_finite();
    end = truncated ? (std::isnan(cfg.x_max) ? 40.0 : cfg.x_max) : m.lprime();
    if (!(end > 0.0) || !std::isfinite(end)) throw InputError("chain truncation must be positive and finite");
    const double spacing = std::isnan(cfg.spacing) ? (truncated ? 0.125 : end / 64.0) : cfg.spacing;
    if (!(spacing > 0.0)) throw InputError("chain spacing must be positive");
    const auto cells = static_cast<std::size_t>(std::ceil(end / spacing - 1e-9));
    std::vector<double> x;
    x.reserve(cells + 1 + cfg.extra_nodes.size());
    for (std::size_t i = 0; i <= cells; ++i) x.push_back(std::min(end, static_cast<double>(i) * spacing));
    x.back() = end;
    for (double e : cfg.extra_nodes) {
        if (!(e > 0.0 && e <= end)) throw OutOfDomain("chain node " + format_number(e, true) + " outside (0, end]");
        x.push_back(e);
    }
    std::sort(x.begin(), x.end());
    const double tol = 1e-12 * end;
    x.erase(std::unique(x.begin(), x.end(), [tol](double a, double b) { return b - a <= tol; }), x.end());
    return x;
}

void check_holds(const ChainModel& c) {
    for (std::size_t i = 0; i + 1 < c.size(); ++i)
        if (!(c.hold[i] > 0.0) || !std::isfinite(c.hold[i]))
            throw GridTooCoarse("mean holding time at node " + format_number(c.x[i], true) +
                                " is not positive and finite");
}

}  // namespace

std::size_t ChainModel::node(double v) const {
    const double tol = 1e-9 * std::max(1.0, x.back());
    auto it = std::lower_bound(x.begin(), x.end(), v - tol);
    if (it == x.end() || std::abs(*it - v) > tol)
        throw OutOfDomain("point " + format_number(v, true) + " is not a chain node");
    return static_cast<std::size_t>(it - x.begin());
}

ChainModel build_chain(const SpeedMeasure& m, const ChainConfig& cfg) {
    ChainModel c;
    double end = 0.0;
    c.x = chain_nodes(m, cfg, c.truncated, end);
    c.lprime = m.lprime();
    const auto ss = state_space(m);
    const bool elastic = !c.truncated && ss.l_in_I && m.l() > m.lprime();
    if (elastic) c.x.push_back(m.l());
    if (!c.truncated && ss.l_in_I) c.top = ChainModel::Top::Absorbing;

    const std::size_t n = c.size();
    c.up.assign(n, 0.0);
    c.hold.assign(n, 0.0);
    c.kill.assign(n, 0.0);
    const double lp = m.lprime();
    auto M0 = [&](double a, double b) { return b > a ? m.mass(a, std::min(b, lp)) : 0.0; };
    auto M1 = [&](double a, double b) { return b > a ? m.moment(1, a, std::min(b, lp)) : 0.0; };

    // 0 reflects: E_0[T_{x1}] = int_{(0, x1]} (x1 - y) dm(y).
    c.up[0] = 1.0;
    c.hold[0] = c.x[1] * M0(0.0, c.x[1]) - M1(0.0, c.x[1]);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double a = c.x[i - 1], x = c.x[i], b = c.x[i + 1];
        c.up[i] = (x - a) / (b - a);
        // int G(x, y) dm(y) with G the Green function of (a, b).
        c.hold[i] = ((b - x) * (M1(a, x) - a * M0(a, x)) + (x - a) * (b * M0(x, b) - M1(x, b))) / (b - a);
    }
    if (c.top == ChainModel::Top::Reflecting) {
        const double a = c.x[n - 2], b = c.x[n - 1];
        c.hold[n - 1] = M1(a, b) - a * M0(a, b);
    }
    check_holds(c);
    if (c.top == ChainModel::Top::Reflecting && !(c.hold[n - 1] > 0.0))
        throw GridTooCoarse("mean holding time at the top node is not positive");
    return c;
}

ChainModel build_chain(const HTransform& ht, const ChainConfig& cfg) {
    const auto& m = ht.disc->measure();
    ChainModel c;
    double end = 0.0;
    c.x = chain_nodes(m, cfg, c.truncated, end);
    c.lprime = m.lprime();
    const auto ss = state_space(m);
    if (!c.truncated && ss.l_in_I) {
        if (m.l() > m.lprime())
            throw NotApplicable("transformed chain with an elastic right boundary is not supported");
        c.top = ChainModel::Top::Absorbing;
    } else if (!c.truncated) {
        const auto kind = transformed_boundary(ht, Side::Right).kind;
        if (kind == BoundaryKind::RegularElastic)
            throw NotApplicable("transformed chain with an elastic right boundary is not supported");
    }

    auto inv_h2 = [&](double z) {
        const double h = ht.h_at(z);
        return 1.0 / (h * h);
    };
    // int_{y0}^{y1} dz / h^2; near 0 by t = 1/z, where (z/h)^2 is smooth.
    auto gap = [&](double y0, double y1) {
        if (!(y1 > y0)) return 0.0;
        if (y0 < 0.25 * y1) {
            return gauss_integrate(
                [&](double t) {
                    const double z = 1.0 / t;
                    const double r = z / ht.h_at(z);
                    return r * r;
                },
                1.0 / y1, 1.0 / y0, 32);
        }
        return gauss_integrate(inv_h2, y0, y1, 16);
    };
    auto h2 = [&](double y) {
        const double h = ht.h_at(y);
        return h * h;
    };

    const std::size_t n = c.size();
    c.up.assign(n, 0.0);
    c.hold.assign(n, 0.0);
    c.kill.assign(n, 0.0);
    const bool killing = ht.kind == HKind::Zero && ht.pi0 > 0.0;
    const double lp = m.lprime();

    // Node 0 is an entrance: E_0[T_{x1}] = int_{(0, x1]} (s(x1) - s(y)) dm^h(y).
    c.up[0] = 1.0;
    c.hold[0] = m.integrate([&](double y) { return gap(y, c.x[1]) * h2(y); }, 0.0, c.x[1]);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double a = c.x[i - 1], x = c.x[i], b = std::min(c.x[i + 1], lp);
        const double left = i == 1 ? kInf : gap(a, x);
        const double right = gap(x, c.x[i + 1]);
        c.up[i] = std::isinf(left) ? 1.0 : left / (left + right);
        // G(x, y) = (s(y) - s(a))(s(b) - s(x)) / (s(b) - s(a)) below x, symmetric above.
        const double total = left + right;
        auto green = [&](double y) {
            if (y <= x) return std::isinf(left) ? right : gap(a, y) * right / total;
            return (std::isinf(left) ? 1.0 : left / total) * gap(y, c.x[i + 1]);
        };
        const double lo = m.integrate([&](double y) { return green(y) * h2(y); }, a, x);
        const double hi = b > x ? m.integrate([&](double y) { return green(y) * h2(y); }, x, b) : 0.0;
        const double tau = lo + hi;
        if (killing) {
            const auto k = [&](double y) { return green(y) * ht.pi0 * ht.h_at(y); };
            const double kappa = m.integrate(k, a, x) + (b > x ? m.integrate(k, x, b) : 0.0);
            c.kill[i] = kappa / (1.0 + kappa);
            c.hold[i] = tau / (1.0 + kappa);
        } else {
            c.hold[i] = tau;
        }
    }
    if (c.top == ChainModel::Top::Reflecting) {
        const double a = c.x[n - 2], b = std::min(c.x[n - 1], lp);
        const double tau = m.integrate([&](double y) { return gap(a, y) * h2(y); }, a, b);
        if (killing) {
            const double kappa =
                m.integrate([&](double y) { return gap(a, y) * ht.pi0 * ht.h_at(y); }, a, b);
            c.kill[n - 1] = kappa / (1.0 + kappa);
            c.hold[n - 1] = tau / (1.0 + kappa);
        } else {
            c.hold[n - 1] = tau;
        }
        if (!(c.hold[n - 1] > 0.0)) throw GridTooCoarse("mean holding time at the top node is not positive");
    }
    check_holds(c);
    return c;
}

SimEstimate estimate_hit_probability(const ChainModel& chain, double x, double a, double b,
                                     const SimOptions& opts) {
    const std::size_t ix = chain.node(x), ia = chain.node(a), ib = chain.node(b);
    const auto t = run_replicates(opts, 1, [&](Rng& rng, Draw& d) {
        const auto w = walk_until(chain, ix, nullptr, opts.step_cap, rng,
                                  [&](std::size_t i) { return i == ia || i == ib; });
        d.capped = w.capped;
        d.flagged = chain.truncated && w.touched_top;
        d.v[0] = (!w.killed && w.end == ia) ? 1.0 : 0.0;
    });
    return make_estimate(t, t.mean(0), t.stderr_of(0), opts);
}

SimEstimate estimate_hitting_laplace(const ChainModel& chain, double x, double y, double q,
                                     const SimOptions& opts) {
    if (!(q > 0.0)) throw InvalidQ("q must be positive");
    const std::size_t ix = chain.node(x), iy = chain.node(y);
    std::vector<double> factor(chain.size());
    for (std::size_t i = 0; i < chain.size(); ++i) factor[i] = 1.0 / (1.0 + q * chain.hold[i]);
    const auto t = run_replicates(opts, 1, [&](Rng& rng, Draw& d) {
        const auto w = walk_until(chain, ix, factor.data(), opts.step_cap, rng,
                                  [&](std::size_t i) { return i == iy; });
        d.capped = w.capped;
        d.flagged = chain.truncated && w.touched_top;
        d.v[0] = (!w.killed && !w.negligible && w.end == iy) ? w.discount : 0.0;
    });
    return make_estimate(t, t.mean(0), t.stderr_of(0), opts);
}

SimEstimate estimate_hitting_mean(const ChainModel& chain, double x, double y, const SimOptions& opts) {
    const std::size_t ix = chain.node(x), iy = chain.node(y);
    std::atomic<bool> lost{false};
    const auto t = run_replicates(opts, 1, [&](Rng& rng, Draw& d) {
        const auto w = walk_until(chain, ix, nullptr, opts.step_cap, rng,
                                  [&](std::size_t i) { return i == iy; });
        d.capped = w.capped;
        d.flagged = chain.truncated && w.touched_top;
        if (w.killed || w.end != iy) lost = true;
        d.v[0] = w.time;
    });
    if (lost) return make_estimate(t, kInf, kInf, opts);
    return make_estimate(t, t.mean(0), t.stderr_of(0), opts);
}

SimEstimate estimate_excursion(const ChainModel& chain, double level, double eps, const SimOptions& opts) {
    if (!(eps > 0.0)) throw InputError("excursion start eps must be positive");
    const std::size_t ie = chain.node(eps);
    if (level <= 0.0) return {0.0, 0.0, opts.n, opts.seed, 0};
    const std::size_t il = chain.node(level);
    const auto t = run_replicates(opts, 1, [&](Rng& rng, Draw& d) {
        const auto w = walk_until(chain, ie, nullptr, opts.step_cap, rng,
                                  [&](std::size_t i) { return i == 0 || i == il; });
        d.capped = w.capped;
        d.v[0] = (!w.killed && w.end == il) ? 1.0 : 0.0;
    });
    return make_estimate(t, t.mean(0) / eps, t.stderr_of(0) / eps, opts);
}

std::string PathFunctional::describe() const {
    switch (kind) {
        case Kind::One: return "1";
        case Kind::MarginalAbove: return "1{X_" + format_number(t0, true) + " > " + format_number(level, true) + "}";
        case Kind::HitBefore: return "1{T_" + format_number(level, true) + " < " + format_number(t0, true) + "}";
    }
    return "?";
}

std::string_view to_string(ConditioningScheme::Variant v) {
    switch (v) {
        case ConditioningScheme::Variant::LevelHorizon: return "level-horizon";
        case ConditioningScheme::Variant::TimeHorizon: return "time-horizon";
        case ConditioningScheme::Variant::ExpClock: return "exp-clock";
    }
    return "?";
}

double ConditioningResult::combined_stderr() const {
    return std::hypot(empirical.std_error, predicted.std_error);
}

bool ConditioningResult::agrees(double sigmas) const {
    return std::abs(empirical.value - predicted.value) <= sigmas * combined_stderr() + bias_budget;
}

ConditioningResult conditioning_experiment(const ChainModel& chain, const ConditioningScheme& scheme,
                                           const ConditioningLimit& limit, double x, const SimOptions& opts) {
    using Variant = ConditioningScheme::Variant;
    const auto& f = scheme.functional;
    const std::size_t ix = chain.node(x);
    if (ix == 0) throw OutOfDomain("conditioning start must be positive");
    if (!limit.h) throw InputError("conditioning limit needs an h-function");
    const double t0 = f.t0;
    make_reader(chain, f);  // validates the functional

    std::vector<double> h(chain.size());
    for (std::size_t i = 0; i < chain.size(); ++i) h[i] = i == 0 ? 0.0 : limit.h(chain.x[i]);
    const double hx = h[ix];
    const double min_prob = 10.0 / static_cast<double>(opts.n);
    // Node of l' when it belongs to I' (the last level the scale horizon can reach).
    const std::size_t lprime_node =
        (!chain.truncated && std::isfinite(chain.lprime)) ? chain.node(chain.lprime) : kNoNode;

    SimOptions emp_opts = opts, pred_opts = opts;
    pred_opts.seed = splitmix(opts.seed ^ 0x5bd1e995ULL);

    ConditioningResult out;
    switch (scheme.variant) {
        case Variant::ExpClock: {
            const double q = scheme.parameter;
            if (!(q > 0.0)) throw InvalidQ("exp-clock rate q must be positive");
            const auto u = chain_laplace(chain, q);
            const double denom = 1.0 - u[ix];
            if (!(denom >= min_prob))
                throw DegenerateConditioning("P(clock before T_0) below 10/n at q = " + format_number(q, true));
            const double disc = std::exp(-q * t0);
            const auto emp = run_replicates(emp_opts, 1, [&](Rng& rng, Draw& d) {
                PathReader r = make_reader(chain, f);
                const auto o = timed_walk(chain, ix, t0, kNoNode, opts.step_cap, rng, r);
                d.capped = o == Outcome::Capped;
                // Rao-Blackwellized over the clock and the path after t0.
                const std::size_t at = (o == Outcome::Horizon) ? r.at_t0 : 0;
                d.v[0] = r.value() * disc * (1.0 - u[at]);
            });
            out.empirical = make_estimate(emp, emp.mean(0) / denom, emp.stderr_of(0) / denom, emp_opts);
            const auto pred = run_replicates(pred_opts, 2, [&](Rng& rng, Draw& d) {
                PathReader r = make_reader(chain, f);
                const auto o = timed_walk(chain, ix, t0, kNoNode, opts.step_cap, rng, r);
                d.capped = o == Outcome::Capped;
                const std::size_t at = (o == Outcome::Horizon) ? r.at_t0 : 0;
                const double fv = r.value();
                const double w0 = h[at] / hx;
                const double wq = disc * (1.0 - u[at]) / denom;
                d.v[0] = fv * w0;
                d.v[1] = fv * std::abs(wq - w0);
            });
            out.predicted = make_estimate(pred, pred.mean(0), pred.stderr_of(0), pred_opts);
            out.bias_budget = pred.mean(1);
            out.truncation_hits = emp.flagged + pred.flagged;
            break;
        }
        case Variant::TimeHorizon: {
            const double t = scheme.parameter;
            if (!(t > t0)) throw InputError("time horizon must exceed the functional time t0");
            const auto emp = run_replicates(emp_opts, 2, [&](Rng& rng, Draw& d) {
                PathReader r = make_reader(chain, f);
                r.watch_a = chain.truncated ? chain.size() - 1 : kNoNode;
                const auto o = timed_walk(chain, ix, t, kNoNode, opts.step_cap, rng, r);
                d.capped = o == Outcome::Capped;
                d.flagged = r.first_a < kInf;
                const double alive = o == Outcome::Horizon ? 1.0 : 0.0;
                d.v[0] = r.value() * alive;
                d.v[1] = alive;
            });
            if (emp.mean(1) < min_prob)
                throw DegenerateConditioning("P(T_0 > t) below 10/n at t = " + format_number(t, true));
            const auto [ratio, se] = emp.ratio(0, 1);
            out.empirical = make_estimate(emp, ratio, se, emp_opts);
            const double growth = std::exp(-limit.alpha * t0);
            const double sx = limit.survival ? limit.survival(x, t) : 0.0;
            const auto pred = run_replicates(pred_opts, 2, [&](Rng& rng, Draw& d) {
                PathReader r = make_reader(chain, f);
                const auto o = timed_walk(chain, ix, t0, kNoNode, opts.step_cap, rng, r);
                d.capped = o == Outcome::Capped;
                const std::size_t at = (o == Outcome::Horizon) ? r.at_t0 : 0;
                const double fv = r.value();
                const double w = growth * h[at] / hx;
                d.v[0] = fv * w;
                if (limit.survival && at != 0)
                    d.v[1] = fv * std::abs(limit.survival(chain.x[at], t - t0) / sx - w);
                else if (limit.survival)
                    d.v[1] = fv * w;
            });
            out.predicted = make_estimate(pred, pred.mean(0), pred.stderr_of(0), pred_opts);
            out.bias_budget = pred.mean(1);
            out.truncation_hits = emp.flagged;
            break;
        }
        case Variant::LevelHorizon: {
            const std::size_t ia = chain.node(scheme.parameter);
            if (ia <= ix) throw InputError("level horizon must lie above the start point");
            const auto emp = run_replicates(emp_opts, 2, [&](Rng& rng, Draw& d) {
                PathReader r = make_reader(chain, f);
                r.watch_a = ia;
                const auto o = timed_walk(chain, ix, kInf, ia, opts.step_cap, rng, r);
                d.capped = o == Outcome::Capped;
                const bool reached = o == Outcome::Stopped;
                d.v[0] = (reached && r.first_a > t0) ? r.value() : 0.0;
                d.v[1] = reached ? 1.0 : 0.0;
            });
            if (emp.mean(1) < min_prob)
                throw DegenerateConditioning("P(T_a < T_0) below 10/n at a = " + format_number(scheme.parameter, true));
            const auto [ratio, se] = emp.ratio(0, 1);
            out.empirical = make_estimate(emp, ratio, se, emp_opts);
            const auto pred = run_replicates(pred_opts, 2, [&](Rng& rng, Draw& d) {
                PathReader r = make_reader(chain, f);
                r.watch_a = ia;
                r.watch_b = lprime_node;
                const auto o = timed_walk(chain, ix, t0, kNoNode, opts.step_cap, rng, r);
                d.capped = o == Outcome::Capped;
                d.flagged = chain.truncated && r.at_t0 + 1 == chain.size();
                const std::size_t at = (o == Outcome::Horizon) ? r.at_t0 : 0;
                // The weight vanishes once the horizon level l' has been reached.
                const bool before_top = r.first_b > t0;
                const double w = before_top ? r.value() * h[at] / hx : 0.0;
                d.v[0] = w;
                d.v[1] = r.first_a <= t0 ? w : 0.0;
            });
            out.predicted = make_estimate(pred, pred.mean(0), pred.stderr_of(0), pred_opts);
            out.bias_budget = pred.mean(1);
            out.truncation_hits = pred.flagged;
            break;
        }
    }
    return out;
}

std::vector<SupermartingaleRow> supermartingale_check(const ChainModel& chain, double x,
                                                      std::span<const double> times,
                                                      const std::function<double(double)>& h0, double pi0,
                                                      const SimOptions& opts) {
    const std::size_t ix = chain.node(x);
    if (times.empty()) return {};
    std::vector<double> ts(times.begin(), times.end());
    if (!std::is_sorted(ts.begin(), ts.end()) || !(ts.front() > 0.0))
        throw InputError("supermartingale times must be positive and increasing");
    const std::size_t k = ts.size();
    std::vector<double> h(chain.size());
    for (std::size_t i = 0; i < chain.size(); ++i) h[i] = (i == 0 || !h0) ? 0.0 : h0(chain.x[i]);
    const double hx = h0 ? h0(x) : 0.0;

    const auto t = run_replicates(opts, 2 * k, [&](Rng& rng, Draw& d) {
        std::vector<std::size_t> at(k, 0);
        double alive_until = 0.0;
        const auto o = timed_walk(chain, ix, ts.back(), kNoNode, opts.step_cap, rng,
                                  [&](std::size_t i, double a, double b) {
                                      for (std::size_t j = 0; j < k; ++j)
                                          if (a <= ts[j] && ts[j] <= b) at[j] = i;
                                      if (chain.truncated && i + 1 == chain.size()) d.flagged = true;
                                      alive_until = b;
                                  });
        d.capped = o == Outcome::Capped;
        if (o == Outcome::Horizon) alive_until = ts.back();
        for (std::size_t j = 0; j < k; ++j) {
            const bool alive = o == Outcome::Horizon || ts[j] < alive_until;
            const std::size_t node = alive ? at[j] : 0;
            d.v[j] = chain.x[node];
            d.v[k + j] = h[node] - hx + pi0 * std::min(alive_until, ts[j]);
        }
    });

    std::vector<SupermartingaleRow> rows;
    for (std::size_t j = 0; j < k; ++j) {
        SupermartingaleRow r;
        r.t = ts[j];
        r.mean = make_estimate(t, t.mean(j), t.stderr_of(j), opts);
        r.violation = r.mean.value - 3.0 * r.mean.std_error > x;
        r.h0_gap = make_estimate(t, t.mean(k + j), t.stderr_of(k + j), opts);
        rows.push_back(r);
    }
    return rows;
}

void write_sim_report(std::ostream& out, std::span<const SimReportRow> rows, bool pretty) {
    CsvWriter csv(out, pretty);
    csv.header({"quantity", "estimate", "stderr", "n", "predicted", "pass"});
    for (const auto& r : rows) {
        csv << r.quantity << r.estimate.value << r.estimate.std_error << r.estimate.n << r.predicted << r.pass;
        csv.end_row();
    }
}

}  // namespace hdiff
