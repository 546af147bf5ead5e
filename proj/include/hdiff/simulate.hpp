#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "hdiff/htransform.hpp"
#include "hdiff/measure.hpp"

namespace hdiff {

struct ChainConfig {
    /// Node spacing; NaN selects l'/64 (finite l') or 1/8.
    double spacing = std::numeric_limits<double>::quiet_NaN();
    /// Truncation when l' = inf; NaN selects 40.
    double x_max = std::numeric_limits<double>::quiet_NaN();
    /// Points that must be nodes (start points, targets, levels).
    std::vector<double> extra_nodes;
};

/// Birth-death chain whose three-point stencils reproduce the exit
/// probabilities and mean exit times of the diffusion exactly.
struct ChainModel {
    enum class Top { Reflecting, Absorbing };

    std::vector<double> x;
    /// Probability of stepping to i + 1 at the end of a holding period.
    std::vector<double> up;
    /// Mean exponential holding time at each node.
    std::vector<double> hold;
    /// Probability of being killed instead of moving (competing clocks).
    std::vector<double> kill;
    Top top = Top::Reflecting;
    /// True when the top node is a truncation of an infinite l'.
    bool truncated = false;
    double lprime = kInf;

    std::size_t size() const noexcept { return x.size(); }
    /// Index of the node at x; throws OutOfDomain unless x is a node.
    std::size_t node(double x) const;
};

/// Chain for the diffusion with speed m (reflecting at 0).
ChainModel build_chain(const SpeedMeasure& m, const ChainConfig& cfg = {});
/// Chain for the transformed diffusion (entrance at 0, killing for h0).
ChainModel build_chain(const HTransform& ht, const ChainConfig& cfg = {});

struct SimEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    /// Replicates stopped by the step cap.
    std::size_t capped = 0;
};

struct SimOptions {
    std::size_t n = 100000;
    std::uint64_t seed = 1;
    /// 0 selects the hardware concurrency.
    unsigned workers = 0;
    std::uint64_t step_cap = 100000000;
};

/// P_x(T_a < T_b).
SimEstimate estimate_hit_probability(const ChainModel& chain, double x, double a, double b,
                                     const SimOptions& opts = {});
/// E_x[exp(-q T_y)], by the conditional expectation given the jump chain.
SimEstimate estimate_hitting_laplace(const ChainModel& chain, double x, double y, double q,
                                     const SimOptions& opts = {});
/// E_x[T_y], by summing mean holding times along the jump chain.
SimEstimate estimate_hitting_mean(const ChainModel& chain, double x, double y, const SimOptions& opts = {});

/// nu[F o theta_{T_eps}; T_eps < inf] = (1/eps) E^0_eps[F] for F = 1{T_level < inf}
/// (level <= 0 means F = 0).
SimEstimate estimate_excursion(const ChainModel& chain, double level, double eps, const SimOptions& opts = {});

/// Test functional read off the path up to the fixed time t0.
struct PathFunctional {
    enum class Kind { One, MarginalAbove, HitBefore };
    Kind kind = Kind::One;
    double t0 = 1.0;
    /// Threshold for MarginalAbove, level b for HitBefore (F = 1{T_b < t0}).
    double level = 0.0;

    std::string describe() const;
};

struct ConditioningScheme {
    enum class Variant { LevelHorizon, TimeHorizon, ExpClock };
    Variant variant = Variant::ExpClock;
    /// a for the level horizon (a node), t for the time horizon, q for the clock.
    double parameter = 0.0;
    PathFunctional functional;
};

std::string_view to_string(ConditioningScheme::Variant v);

/// The h-transform limit of each scheme: weight w(X_t0) with
/// E^0_x[F w(X_t0)] the predicted value.
struct ConditioningLimit {
    /// h-function (h0, h* or s) evaluated at chain nodes.
    std::function<double(double)> h;
    /// Discount rate of the limit (gamma* for the time horizon).
    double alpha = 0.0;
    /// Finite-horizon survival P_y(T_0 > u), used by the time-horizon bias budget.
    std::function<double(double, double)> survival;
};

struct ConditioningResult {
    SimEstimate empirical;
    SimEstimate predicted;
    /// Documented bias between the finite-parameter scheme and its limit.
    double bias_budget = 0.0;
    /// Replicates whose path met the truncation node.
    std::size_t truncation_hits = 0;

    double combined_stderr() const;
    bool agrees(double sigmas = 3.0) const;
};

/// Empirical conditional expectation under the scheme vs the h-transform
/// limit computed from an independent run of the stopped chain.
/// Throws DegenerateConditioning when the conditioning event is too rare.
ConditioningResult conditioning_experiment(const ChainModel& chain, const ConditioningScheme& scheme,
                                           const ConditioningLimit& limit, double x,
                                           const SimOptions& opts = {});

struct SupermartingaleRow {
    double t = 0.0;
    SimEstimate mean;      // E^0_x[X_t]
    bool violation = false;
    SimEstimate h0_gap;    // E^0_x[h0(X_t)] - h0(x) + pi0 int_0^t P_x(s < T_0) ds
};

/// E^0_x[X_t] <= x and the time-domain h0 identity at each time.
std::vector<SupermartingaleRow> supermartingale_check(const ChainModel& chain, double x,
                                                      std::span<const double> times,
                                                      const std::function<double(double)>& h0, double pi0,
                                                      const SimOptions& opts = {});

/// Columns quantity,estimate,stderr,n,predicted,pass.
struct SimReportRow {
    std::string quantity;
    SimEstimate estimate;
    double predicted = 0.0;
    bool pass = false;
};
void write_sim_report(std::ostream& out, std::span<const SimReportRow> rows, bool pretty = false);

}  // namespace hdiff
