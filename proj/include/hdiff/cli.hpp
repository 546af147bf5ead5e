#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hdiff/htransform.hpp"

namespace hdiff {

enum class Command { Classify, Eigen, H0, GroundState, Resolvent, Transform, Simulate, Verify };

std::string_view to_string(Command c);

struct RunConfig {
    Command command = Command::Classify;
    /// Built-in measure name or a measure file; verify falls back to the
    /// three canonical measures and simulate to the experiment's measure.
    std::string measure;
    /// Empty: tables go to the output stream. Otherwise files are written
    /// there and a summary is printed.
    std::filesystem::path out_dir;
    std::optional<int> grid;
    /// Identity tolerance for verify.
    double tol = 1e-6;
    /// Spectral parameters for eigen, resolvent and the standard experiment.
    std::vector<double> qs = {1.0};
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> n;
    bool pretty = false;
    HKind kind = HKind::Zero;
    std::filesystem::path experiment;
};

/// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "HDIFF_OUT_DIR";

/// Exit statuses: 0 success, 1 failed checks, 2 bad input, 3 numerical failure.
enum ExitStatus : int { kExitOk = 0, kExitChecksFailed = 1, kExitInput = 2, kExitNumerical = 3 };

/// Parses `args` (without the program name). Throws InputError on bad flags or values.
RunConfig parse_run_config(std::span<const std::string> args);

/// Dispatches one command. Errors propagate as exceptions.
int run(const RunConfig& cfg, std::ostream& out);

/// Full front end: parsing, dispatch and mapping of errors to exit statuses.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace hdiff
