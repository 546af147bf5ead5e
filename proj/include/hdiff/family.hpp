#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hdiff/classify.hpp"
#include "hdiff/measure.hpp"

namespace hdiff {

/// Set of acceptable kinds; empty means "no expectation".
struct KindSet {
    std::vector<BoundaryKind> allowed;

    bool constrained() const { return !allowed.empty(); }
    bool contains(BoundaryKind k) const;
    std::string describe() const;
};

/// A reference measure together with its expected right-boundary behavior,
/// for the original diffusion and its three h-transforms.
struct FamilyMember {
    std::string name;
    SpeedMeasure measure;
    BoundaryKind right;
    Recurrence recurrence;
    KindSet under_scale;
    KindSet under_ground;
    KindSet under_zero;
};

/// Measures covering every right-boundary kind (both entrance cases of the
/// second-moment dichotomy are included).
std::vector<FamilyMember> classification_family();

struct ConformanceCheck {
    std::string member;
    /// "left", "right", "recurrence" or "right under <kind>".
    std::string check;
    std::string expected;
    std::string actual;
    bool pass = false;
};

/// Classifies every family member, before and after each constrained
/// h-transform, against the expected table entries.
std::vector<ConformanceCheck> check_family_conformance();

/// CSV with columns member,check,expected,actual,pass.
void write_conformance_report(std::ostream& out, std::span<const ConformanceCheck> checks, bool pretty = false);

}  // namespace hdiff
