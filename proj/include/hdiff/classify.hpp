#pragma once

#include <functional>
#include <limits>
#include <string_view>

#include "hdiff/measure.hpp"

namespace hdiff {

enum class Side { Left, Right };

enum class BoundaryKind {
    RegularReflecting,
    RegularElastic,
    RegularAbsorbing,
    Exit,
    Entrance,
    Natural1,  // s and m both infinite at the boundary
    Natural2,  // s infinite, m finite
    Natural3,  // s finite, m infinite
};

enum class Recurrence { Transient, NullRecurrent, PositiveRecurrent };

std::string_view to_string(Side s);
std::string_view to_string(BoundaryKind k);
std::string_view to_string(Recurrence r);
BoundaryKind boundary_kind_from_string(std::string_view name);

bool is_regular(BoundaryKind k);
bool is_natural(BoundaryKind k);

struct BoundaryClass {
    Side side = Side::Right;
    BoundaryKind kind = BoundaryKind::Natural1;
    double F1 = 0.0;  // +inf when divergent
    double F2 = 0.0;
};

/// Partial-integral data for one boundary in (possibly transformed)
/// coordinates dm^h = h^2 dm, ds^h = dy / h^2.
struct BoundaryIntegrals {
    double F1 = 0.0;
    double F2 = 0.0;
    bool scale_finite = true;  // |s^h| bounded toward the boundary
    bool mass_finite = true;   // m^h bounded toward the boundary
};

struct ClassifyOptions {
    /// Interior reference point; NaN selects the measure's default.
    double reference = std::numeric_limits<double>::quiet_NaN();
    double eps_div = 1e-12;
};

/// The intervals I' and I of the state space.
struct StateSpace {
    double lprime = 0.0;
    double l = 0.0;
    bool lprime_included = false;  // I' = [0, l'] rather than [0, l')
    bool l_in_I = false;           // l carries the extra unit atom of the tilde measure
};

/// F1, F2 and endpoint finiteness for h-weighted coordinates; h == nullptr means h = 1.
BoundaryIntegrals boundary_integrals(const SpeedMeasure& m, const std::function<double(double)>& h,
                                     Side side, const ClassifyOptions& opts = {});

/// Kind from the integrals; `regular` is the subcase used when both F are finite.
BoundaryKind kind_from_integrals(const BoundaryIntegrals& bi, BoundaryKind regular);

BoundaryClass classify_boundary(const SpeedMeasure& m, Side side, const ClassifyOptions& opts = {});

/// Requires 0 to be regular; throws AssumptionViolated otherwise.
Recurrence recurrence_class(const SpeedMeasure& m);

StateSpace state_space(const SpeedMeasure& m);

}  // namespace hdiff
