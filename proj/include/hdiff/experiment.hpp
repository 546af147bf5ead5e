#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hdiff/simulate.hpp"

namespace hdiff {

struct ExperimentItem {
    enum class Quantity { HitProbability, HittingLaplace, HittingMean, Excursion, Conditioning, Supermartingale };
    Quantity quantity = Quantity::HitProbability;
    double x = 0.0;
    /// P_x(T_a < T_b).
    double a = 0.0, b = 0.0;
    /// Target of the hitting-time transforms.
    double target = 0.0;
    double q = 1.0;
    /// Excursion level and start point.
    double level = 0.0, eps = 0.0;
    ConditioningScheme scheme;
    std::vector<double> times;

    std::string describe() const;
};

/// Experiment document:
///
///     {"measure": "reflecting-bm", "n": 100000, "seed": 1,
///      "chain": {"spacing": 0.03125},
///      "experiments": [{"quantity": "hit-probability", "x": 0.5, "a": 0, "b": 1}, ...]}
///
/// Quantities: hit-probability (x, a, b), hitting-laplace (x, target, q),
/// hitting-mean (x, target), excursion (level, eps), conditioning (scheme,
/// parameter, x, functional {kind, t0, level}) and supermartingale (x, times).
/// Unknown keys are rejected; errors are ParseErrors anchored to a line.
struct ExperimentConfig {
    /// Built-in measure name or a path (relative paths resolve against the document).
    std::string measure;
    std::size_t n = 100000;
    std::uint64_t seed = 1;
    ChainConfig chain;
    std::vector<ExperimentItem> items;
};

ExperimentConfig parse_experiment(std::string_view text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment(const std::filesystem::path& path);

/// Hitting, Laplace, mean, excursion and supermartingale checks spread over I'.
ExperimentConfig standard_experiment(const SpeedMeasure& m, std::span<const double> qs);

/// Runs every item on the chain of `m`; `predicted` is the analytic value
/// (the weighted Monte Carlo limit for conditioning items).
std::vector<SimReportRow> run_experiment(const ExperimentConfig& cfg, const SpeedMeasure& m, unsigned workers = 0);

}  // namespace hdiff
