#include "hdiff/classify.hpp"

#include <array>
#include <cmath>
#include <vector>

#include "hdiff/error.hpp"
#include "hdiff/quadrature.hpp"

namespace hdiff {

namespace {

constexpr std::array<std::string_view, 8> kKindNames = {
    "regular-reflecting", "regular-elastic", "regular-absorbing", "exit",
    "entrance",           "natural-1",       "natural-2",         "natural-3"};

bool diverges(const std::vector<double>& v, double eps_div) {
    const double last = v.back();
    if (!std::isfinite(last) || last > 1.0 / eps_div) return true;
    const std::size_t n = v.size();
    if (n < 3) return false;
    const double d1 = v[n - 1] - v[n - 2];
    const double d0 = v[n - 2] - v[n - 3];
    if (!(d1 > 1e-10 * std::max(1.0, std::abs(last)))) return false;
    return d1 >= 0.95 * d0;
}

std::vector<double> truncations(const SpeedMeasure& m, Side side, double c) {
    std::vector<double> xs{c};
    if (side == Side::Left) {
        for (int k = 1; k <= 60; ++k) xs.push_back(c * std::ldexp(1.0, -k));
    } else if (m.lprime_finite()) {
        const double lp = m.lprime();
        for (int k = 1; k <= 60; ++k) {
            const double x = lp - (lp - c) * std::ldexp(1.0, -k);
            if (!(lp - x > 1e-11 * lp)) break;
            xs.push_back(x);
        }
    } else {
        for (int k = 1; k <= 200; ++k) xs.push_back(c * std::ldexp(1.0, k));
    }
    return xs;
}

}  // namespace

std::string_view to_string(Side s) { return s == Side::Left ? "left" : "right"; }

std::string_view to_string(BoundaryKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

std::string_view to_string(Recurrence r) {
    switch (r) {
        case Recurrence::Transient: return "transient";
        case Recurrence::NullRecurrent: return "null-recurrent";
        case Recurrence::PositiveRecurrent: return "positive-recurrent";
    }
    return "?";
}

BoundaryKind boundary_kind_from_string(std::string_view name) {
    for (std::size_t i = 0; i < kKindNames.size(); ++i)
        if (kKindNames[i] == name) return static_cast<BoundaryKind>(i);
    throw InputError("unknown boundary kind '" + std::string(name) + "'");
}

bool is_regular(BoundaryKind k) {
    return k == BoundaryKind::RegularReflecting || k == BoundaryKind::RegularElastic ||
           k == BoundaryKind::RegularAbsorbing;
}

bool is_natural(BoundaryKind k) {
    return k == BoundaryKind::Natural1 || k == BoundaryKind::Natural2 || k == BoundaryKind::Natural3;
}

BoundaryIntegrals boundary_integrals(const SpeedMeasure& m, const std::function<double(double)>& h,
                                     Side side, const ClassifyOptions& opts) {
    const double c = std::isnan(opts.reference) ? m.default_reference() : opts.reference;
    if (!(c > 0.0 && c < m.lprime())) throw OutOfDomain("reference point must lie in (0, l')");
    auto h2 = [&](double x) {
        if (!h) return 1.0;
        const double v = h(x);
        return v * v;
    };
    auto inv_h2 = [&](double x) { return 1.0 / h2(x); };

    const auto xs = truncations(m, side, c);
    // Distances are measured away from c: S = |s^h(X) - s^h(c)|.
    std::vector<double> S{0.0}, A{0.0}, F1{0.0}, F2{0.0};
    bool overflow = false;
    for (std::size_t k = 0; k + 1 < xs.size() && !overflow; ++k) {
        const double inner = xs[k], outer = xs[k + 1];
        const double lo = std::min(inner, outer), hi = std::max(inner, outer);
        const double Sk = S.back();
        auto dist = [&](double x) {
            return Sk + std::abs(gauss_integrate(inv_h2, std::min(inner, x), std::max(inner, x), 16));
        };
        const double Sn = Sk + gauss_integrate(inv_h2, lo, hi, 16);
        // Scale distance from x to the outer truncation, computed directly: the
        // difference Sn - dist(x) cancels once s^h saturates.
        auto remaining = [&](double x) {
            return gauss_integrate(inv_h2, std::min(x, outer), std::max(x, outer), 16);
        };
        double dA = 0.0, dB = 0.0, dF1 = 0.0;
        try {
            dA = m.integrate(h2, lo, hi);
            dB = m.integrate([&](double x) { return dist(x) * h2(x); }, lo, hi);
            dF1 = m.integrate([&](double x) { return remaining(x) * h2(x); }, lo, hi);
        } catch (const NonIntegrable&) {
            dA = dB = dF1 = kInf;
        }
        F1.push_back(F1.back() + (Sn - Sk) * A.back() + dF1);
        F2.push_back(F2.back() + dB);
        S.push_back(Sn);
        A.push_back(A.back() + dA);
        const double cap = 1e6 / opts.eps_div;
        overflow = S.back() > cap && A.back() > cap && F1.back() > cap && F2.back() > cap;
    }
    BoundaryIntegrals bi;
    bi.scale_finite = !diverges(S, opts.eps_div);
    bi.mass_finite = !diverges(A, opts.eps_div);
    bi.F1 = diverges(F1, opts.eps_div) ? kInf : F1.back();
    bi.F2 = diverges(F2, opts.eps_div) ? kInf : F2.back();
    return bi;
}

BoundaryKind kind_from_integrals(const BoundaryIntegrals& bi, BoundaryKind regular) {
    const bool f1 = bi.F1 < kInf, f2 = bi.F2 < kInf;
    if (f1 && f2) return regular;
    if (f1) return BoundaryKind::Exit;
    if (f2) return BoundaryKind::Entrance;
    if (!bi.scale_finite && !bi.mass_finite) return BoundaryKind::Natural1;
    if (!bi.scale_finite) return BoundaryKind::Natural2;
    if (!bi.mass_finite) return BoundaryKind::Natural3;
    throw NumericalError("boundary integrals diverge although scale and mass are finite");
}

BoundaryClass classify_boundary(const SpeedMeasure& m, Side side, const ClassifyOptions& opts) {
    const auto bi = boundary_integrals(m, nullptr, side, opts);
    BoundaryKind regular = BoundaryKind::RegularReflecting;
    if (side == Side::Right) {
        if (m.l() == kInf)
            regular = BoundaryKind::RegularReflecting;
        else if (m.lprime() < m.l())
            regular = BoundaryKind::RegularElastic;
        else
            regular = BoundaryKind::RegularAbsorbing;
    }
    return BoundaryClass{side, kind_from_integrals(bi, regular), bi.F1, bi.F2};
}

Recurrence recurrence_class(const SpeedMeasure& m) {
    const auto left = classify_boundary(m, Side::Left);
    if (!is_regular(left.kind)) throw AssumptionViolated("0 is not a regular boundary");
    if (m.l() < kInf) return Recurrence::Transient;
    return m.pi0() > 0.0 ? Recurrence::PositiveRecurrent : Recurrence::NullRecurrent;
}

StateSpace state_space(const SpeedMeasure& m) {
    const auto right = classify_boundary(m, Side::Right);
    StateSpace ss;
    ss.lprime = m.lprime();
    ss.l = m.l();
    ss.lprime_included = right.kind == BoundaryKind::RegularReflecting ||
                         right.kind == BoundaryKind::RegularElastic;
    ss.l_in_I = m.l() < kInf && !is_natural(right.kind);
    return ss;
}

}  // namespace hdiff
