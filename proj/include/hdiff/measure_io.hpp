#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "hdiff/measure.hpp"

namespace hdiff {

/// Parse a measure document:
///
///     {"pieces": [{"from": 0, "to": 1, "density": [1, 0]}],
///      "atoms": [{"at": 0.5, "mass": 2}], "lprime": 1, "l": "inf"}
///
/// A piece may use `"power": {"coef": a, "center": c, "exponent": e}` in
/// place of `density` for a * |y - c|^e. Every failure is a ParseError
/// carrying the 1-based line of the offending element.
SpeedMeasure parse_measure(std::string_view text);

/// Read and parse a measure file.
SpeedMeasure load_measure(const std::filesystem::path& path);

/// Serialize back to the document format (full precision).
std::string serialize_measure(const SpeedMeasure& m);

/// Built-in measures by name ("reflecting-bm", "half-line-bm", "absorbed-bm"),
/// otherwise a path to a measure file.
SpeedMeasure resolve_measure(const std::string& ref);

}  // namespace hdiff
