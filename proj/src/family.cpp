#include "hdiff/family.hpp"

#include <algorithm>
#include <ostream>

#include "hdiff/csv.hpp"
#include "hdiff/error.hpp"
#include "hdiff/htransform.hpp"

namespace hdiff {

bool KindSet::contains(BoundaryKind k) const {
    return std::find(allowed.begin(), allowed.end(), k) != allowed.end();
}

std::string KindSet::describe() const {
    if (allowed.empty()) return "any";
    std::string out;
    for (std::size_t i = 0; i < allowed.size(); ++i) {
        if (i) out += "|";
        out += to_string(allowed[i]);
    }
    return out;
}

std::vector<FamilyMember> classification_family() {
    using K = BoundaryKind;
    const KindSet regular{{K::RegularReflecting, K::RegularElastic, K::RegularAbsorbing}};
    const KindSet natural{{K::Natural1, K::Natural2, K::Natural3}};
    auto lin = [](double a, double b) { return DensityPiece{a, b, LinearDensity{1.0, 0.0}}; };
    auto power = [](double a, double b, double center, double e) {
        return DensityPiece{a, b, PowerDensity{1.0, center, e}};
    };
    std::vector<FamilyMember> f;
    f.push_back({"regular-reflecting", measures::reflecting_bm(), K::RegularReflecting,
                 Recurrence::PositiveRecurrent, {{K::RegularElastic}}, {{K::RegularReflecting}},
                 regular});
    f.push_back({"regular-elastic", SpeedMeasure({lin(0, 1)}, {}, 1.0, 2.0), K::RegularElastic,
                 Recurrence::Transient, {{K::RegularElastic}}, {}, {}});
    f.push_back({"regular-absorbing", measures::absorbed_bm(), K::RegularAbsorbing,
                 Recurrence::Transient, {{K::RegularAbsorbing}}, {}, {}});
    f.push_back({"exit", SpeedMeasure({power(0, 1, 1.0, -1.5)}, {}, 1.0, 1.0), K::Exit,
                 Recurrence::Transient, {{K::Exit}}, {}, {}});
    f.push_back({"entrance-heavy", SpeedMeasure({power(0, kInf, -1.0, -2.5)}, {}, kInf, kInf),
                 K::Entrance, Recurrence::PositiveRecurrent, {{K::Exit}}, {{K::Entrance}},
                 {{K::Entrance}}});
    f.push_back({"entrance-light", SpeedMeasure({power(0, kInf, -1.0, -4.0)}, {}, kInf, kInf),
                 K::Entrance, Recurrence::PositiveRecurrent, {{K::RegularAbsorbing}},
                 {{K::Entrance}}, {{K::Entrance}}});
    f.push_back({"natural-1", measures::half_line_bm(), K::Natural1, Recurrence::NullRecurrent,
                 {{K::Natural3}}, {}, {}});
    f.push_back({"natural-2", SpeedMeasure({power(0, kInf, -1.0, -1.5)}, {}, kInf, kInf),
                 K::Natural2, Recurrence::PositiveRecurrent, {{K::Natural3}}, {}, natural});
    f.push_back({"natural-3", SpeedMeasure({power(0, 1, 1.0, -2.0)}, {}, 1.0, 1.0), K::Natural3,
                 Recurrence::Transient, {{K::Natural3}}, {}, {}});
    return f;
}

std::vector<ConformanceCheck> check_family_conformance() {
    std::vector<ConformanceCheck> out;
    for (const auto& member : classification_family()) {
        auto add = [&](std::string check, std::string expected, std::string actual, bool pass) {
            out.push_back({member.name, std::move(check), std::move(expected), std::move(actual), pass});
        };
        const auto left = classify_boundary(member.measure, Side::Left).kind;
        add("left", "regular-reflecting", std::string(to_string(left)), left == BoundaryKind::RegularReflecting);
        const auto right = classify_boundary(member.measure, Side::Right).kind;
        add("right", std::string(to_string(member.right)), std::string(to_string(right)), right == member.right);
        const auto rec = recurrence_class(member.measure);
        add("recurrence", std::string(to_string(member.recurrence)), std::string(to_string(rec)),
            rec == member.recurrence);

        const std::pair<HKind, const KindSet*> cases[] = {
            {HKind::Scale, &member.under_scale}, {HKind::Ground, &member.under_ground}, {HKind::Zero, &member.under_zero}};
        const auto disc = Discretization::build(member.measure);
        for (const auto& [kind, expected] : cases) {
            if (!expected->constrained()) continue;
            const std::string check = "right under " + std::string(to_string(kind));
            try {
                const auto ht = build_htransform(disc, kind);
                const auto got = transformed_boundary(ht, Side::Right).kind;
                add(check, expected->describe(), std::string(to_string(got)), expected->contains(got));
            } catch (const Error& e) {
                add(check, expected->describe(), std::string("error: ") + e.what(), false);
            }
        }
    }
    return out;
}

void write_conformance_report(std::ostream& out, std::span<const ConformanceCheck> checks, bool pretty) {
    CsvWriter csv(out, pretty);
    csv.header({"member", "check", "expected", "actual", "pass"});
    for (const auto& c : checks) {
        csv << c.member << c.check << c.expected << c.actual << c.pass;
        csv.end_row();
    }
}

}  // namespace hdiff
