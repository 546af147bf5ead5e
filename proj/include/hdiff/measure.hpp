#pragma once

#include <functional>
#include <limits>
#include <string>
#include <variant>
#include <vector>

namespace hdiff {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Density c0 + c1*y.
struct LinearDensity {
    double c0 = 0.0;
    double c1 = 0.0;
};

/// Density coef * |y - center|^exponent; center must lie outside the open piece.
struct PowerDensity {
    double coef = 1.0;
    double center = 0.0;
    double exponent = 0.0;
};

struct DensityPiece {
    double from = 0.0;
    double to = 0.0;  // may be +inf for the last piece when l' = inf
    std::variant<LinearDensity, PowerDensity> density;

    double eval(double y) const;
    /// Integral of y^k * density over [a, b] (subinterval of the piece); may be +inf.
    double moment(int k, double a, double b) const;
    bool is_power() const { return std::holds_alternative<PowerDensity>(density); }
};

/// Which endpoints of [a, b] carry their atom mass.
enum class Endpoints { LeftOpenRightClosed, Closed, Open, LeftClosedRightOpen };

struct Atom {
    double at = 0.0;
    double mass = 0.0;
};

/// Speed measure m on the natural scale s(x) = x.
///
/// m(0) = 0, strictly increasing on [0, l'), flat and finite on [l', l),
/// infinite on [l, inf). Density pieces tile (0, l'); atoms sit in (0, l'].
/// Immutable after construction.
class SpeedMeasure {
public:
    SpeedMeasure(std::vector<DensityPiece> pieces, std::vector<Atom> atoms,
                 double lprime, double l);

    /// m(x), right-continuous; +inf for x >= l.
    double operator()(double x) const;
    double eval(double x) const { return (*this)(x); }

    double lprime() const noexcept { return lprime_; }
    double l() const noexcept { return l_; }
    bool lprime_finite() const noexcept { return lprime_ < kInf; }

    const std::vector<DensityPiece>& pieces() const noexcept { return pieces_; }
    const std::vector<Atom>& atoms() const noexcept { return atoms_; }

    /// Density of the absolutely continuous part at y (0 outside (0, l')).
    double density(double y) const;

    /// m((a, b]) restricted to (0, l']; b may be l' or +inf.
    double mass(double a, double b) const;

    /// Integral of y^k over (a, b] against dm restricted to (0, l'].
    double moment(int k, double a, double b) const;

    /// m(inf): +inf when l < inf or the mass up to l' diverges.
    double total_mass() const;

    /// m((x, l']) restricted to (0, l'] (the finite part).
    double tail_mass(double x) const;

    /// J1(x) = int_0^x m(y) dy = int_{(0,x]} (x - y) dm(y), for x <= l'.
    double integrated_mass(double x) const;

    /// pi0 = 1 / m(inf), 0 if m(inf) = inf.
    double pi0() const;

    /// Lebesgue-Stieltjes integral of f over (a, b] (atoms at b included, at a
    /// excluded). Composite Gauss-Legendre on density pieces, geometric
    /// refinement toward singular power-law endpoints.
    /// Throws NonIntegrable when the result is not finite.
    double integrate(const std::function<double(double)>& f, double a, double b,
                     Endpoints ends = Endpoints::LeftOpenRightClosed) const;

    /// True when the density blows up at l' (power piece with center = l').
    bool singular_at_lprime() const;

    /// Sorted interior breakpoints: piece boundaries and atom positions in (0, l').
    std::vector<double> breakpoints() const;

    /// Default interior reference point c (l'/2 or 1).
    double default_reference() const { return lprime_finite() ? 0.5 * lprime_ : 1.0; }

private:
    std::vector<DensityPiece> pieces_;
    std::vector<Atom> atoms_;
    double lprime_;
    double l_;
};

// Frequently used measures.
namespace measures {
/// m(x) = min(x, lp): reflecting Brownian motion on [0, lp].
SpeedMeasure reflecting_bm(double lp = 1.0);
/// m(x) = x on [0, inf): Brownian motion on the half-line (null recurrent).
SpeedMeasure half_line_bm();
/// m(x) = x on [0, lp), l = lp: Brownian motion absorbed at lp (transient).
SpeedMeasure absorbed_bm(double lp = 1.0);
}  // namespace measures

}  // namespace hdiff
