#include "hdiff/measure.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hdiff/error.hpp"
#include "hdiff/quadrature.hpp"

namespace hdiff {

namespace {

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// int_{lo}^{hi} u^e du for 0 <= lo <= hi <= inf.
double power_integral(double e, double lo, double hi) {
    if (hi <= lo) return 0.0;
    const double p = e + 1.0;
    if (p == 0.0) {
        if (lo == 0.0 || hi == kInf) return kInf;
        return std::log(hi / lo);
    }
    if (p > 0.0 && hi == kInf) return kInf;
    if (p < 0.0 && lo == 0.0) return kInf;
    return (std::pow(hi, p) - std::pow(lo, p)) / p;
}

std::string num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

double DensityPiece::eval(double y) const {
    if (const auto* lin = std::get_if<LinearDensity>(&density)) return lin->c0 + lin->c1 * y;
    const auto& pw = std::get<PowerDensity>(density);
    return pw.coef * std::pow(std::abs(y - pw.center), pw.exponent);
}

double DensityPiece::moment(int k, double a, double b) const {
    if (b <= a) return 0.0;
    if (const auto* lin = std::get_if<LinearDensity>(&density)) {
        if (b == kInf) return (lin->c0 == 0.0 && lin->c1 == 0.0) ? 0.0 : kInf;
        const double t0 = (std::pow(b, k + 1) - std::pow(a, k + 1)) / (k + 1);
        const double t1 = (std::pow(b, k + 2) - std::pow(a, k + 2)) / (k + 2);
        return lin->c0 * t0 + lin->c1 * t1;
    }
    const auto& pw = std::get<PowerDensity>(density);
    const double c = pw.center;
    double sigma, lo, hi;
    if (c <= a) {
        sigma = 1.0;
        lo = a - c;
        hi = b - c;
    } else {
        sigma = -1.0;
        lo = c - b;
        hi = c - a;
    }
    double sum = 0.0;
    for (int j = 0; j <= k; ++j) {
        const double coeff = binomial(k, j) * std::pow(c, k - j) * std::pow(sigma, j);
        if (coeff == 0.0) continue;
        const double term = power_integral(j + pw.exponent, lo, hi);
        if (term == kInf) return kInf;  // nonnegative integrand
        sum += coeff * term;
    }
    return pw.coef * sum;
}

SpeedMeasure::SpeedMeasure(std::vector<DensityPiece> pieces, std::vector<Atom> atoms,
                           double lprime, double l)
    : pieces_(std::move(pieces)), atoms_(std::move(atoms)), lprime_(lprime), l_(l) {
    if (!(lprime_ > 0.0)) throw Degenerate("l' must be positive (got " + num(lprime_) + ")");
    if (!(l_ >= lprime_)) throw InvalidMeasure("l must satisfy l >= l'");
    if (pieces_.empty()) throw InvalidMeasure("at least one density piece is required");
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
        const auto& p = pieces_[i];
        const std::string tag = "pieces[" + std::to_string(i) + "]";
        if (!(p.to > p.from)) throw InvalidMeasure(tag + ": empty or reversed interval");
        if (i == 0 && p.from != 0.0) throw InvalidMeasure(tag + ": first piece must start at 0");
        if (i > 0) {
            if (p.from < pieces_[i - 1].to) throw InvalidMeasure(tag + ": overlaps previous piece");
            if (p.from > pieces_[i - 1].to) throw InvalidMeasure(tag + ": gap after previous piece");
        }
        if (const auto* lin = std::get_if<LinearDensity>(&p.density)) {
            const double d0 = lin->c0 + lin->c1 * p.from;
            const double d1 = p.to == kInf ? (lin->c1 == 0.0 ? lin->c0 : lin->c1 * kInf)
                                           : lin->c0 + lin->c1 * p.to;
            if (d0 < 0.0 || d1 < 0.0) throw InvalidMeasure(tag + ": negative density");
            if (d0 == 0.0 && d1 == 0.0)
                throw InvalidMeasure(tag + ": zero density (m must be strictly increasing)");
        } else {
            const auto& pw = std::get<PowerDensity>(p.density);
            if (!(pw.coef > 0.0)) throw InvalidMeasure(tag + ": power coefficient must be positive");
            if (pw.center > p.from && pw.center < p.to)
                throw InvalidMeasure(tag + ": power center inside the piece");
            if (pw.center == p.from && pw.exponent < 0.0 && p.from == 0.0)
                throw InvalidMeasure(tag + ": density singular at 0 (0 must be regular)");
        }
    }
    if (pieces_.back().to != lprime_)
        throw InvalidMeasure("pieces must tile (0, l'): last piece ends at " +
                             num(pieces_.back().to) + ", l' = " + num(lprime_));
    std::sort(atoms_.begin(), atoms_.end(), [](const Atom& a, const Atom& b) { return a.at < b.at; });
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        const auto& a = atoms_[i];
        const std::string tag = "atoms[" + std::to_string(i) + "]";
        if (!(a.at > 0.0) || a.at > lprime_) throw InvalidMeasure(tag + ": position outside (0, l']");
        if (!(a.mass > 0.0)) throw InvalidMeasure(tag + ": mass must be positive");
        if (a.at == lprime_ && l_ == lprime_) throw InvalidMeasure(tag + ": atom at l' = l");
        if (i > 0 && atoms_[i - 1].at == a.at) throw InvalidMeasure(tag + ": duplicate atom position");
    }
}

double SpeedMeasure::operator()(double x) const {
    if (x >= l_) return kInf;
    if (x <= 0.0) return 0.0;
    return mass(0.0, std::min(x, lprime_));
}

double SpeedMeasure::density(double y) const {
    if (y <= 0.0 || y >= lprime_) return 0.0;
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), y,
                               [](double v, const DensityPiece& p) { return v < p.to; });
    if (it == pieces_.end()) return 0.0;
    return it->eval(y);
}

double SpeedMeasure::moment(int k, double a, double b) const {
    a = std::max(a, 0.0);
    b = std::min(b, lprime_);
    if (b <= a) return 0.0;
    double sum = 0.0;
    for (const auto& p : pieces_) {
        const double lo = std::max(a, p.from), hi = std::min(b, p.to);
        if (hi <= lo) continue;
        const double v = p.moment(k, lo, hi);
        if (v == kInf) return kInf;
        sum += v;
    }
    for (const auto& at : atoms_)
        if (at.at > a && at.at <= b) sum += std::pow(at.at, k) * at.mass;
    return sum;
}

double SpeedMeasure::mass(double a, double b) const { return moment(0, a, b); }

double SpeedMeasure::total_mass() const {
    if (l_ < kInf) return kInf;
    return mass(0.0, lprime_);
}

double SpeedMeasure::tail_mass(double x) const { return mass(x, lprime_); }

double SpeedMeasure::integrated_mass(double x) const {
    if (x <= 0.0) return 0.0;
    if (x > l_) return kInf;
    const double mx = mass(0.0, std::min(x, lprime_));
    const double m1 = moment(1, 0.0, std::min(x, lprime_));
    if (mx == kInf || m1 == kInf) return kInf;
    return x * mx - m1;
}

double SpeedMeasure::pi0() const {
    const double tm = total_mass();
    return tm == kInf ? 0.0 : 1.0 / tm;
}

bool SpeedMeasure::singular_at_lprime() const {
    const auto& p = pieces_.back();
    if (const auto* pw = std::get_if<PowerDensity>(&p.density))
        return pw->center == lprime_ && pw->exponent < 0.0;
    return false;
}

std::vector<double> SpeedMeasure::breakpoints() const {
    std::vector<double> bp;
    for (const auto& p : pieces_)
        if (p.from > 0.0) bp.push_back(p.from);
    for (const auto& a : atoms_)
        if (a.at < lprime_) bp.push_back(a.at);
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    return bp;
}

double SpeedMeasure::integrate(const std::function<double(double)>& f, double a, double b,
                               Endpoints ends) const {
    const bool with_a = ends == Endpoints::Closed || ends == Endpoints::LeftClosedRightOpen;
    const bool with_b = ends == Endpoints::Closed || ends == Endpoints::LeftOpenRightClosed;
    const double a_in = a, b_in = b;
    a = std::max(a, 0.0);
    b = std::min(b, lprime_);
    double sum = 0.0;
    auto panel = [&](const DensityPiece& p, double lo, double hi) {
        return gauss_integrate([&](double y) { return f(y) * p.eval(y); }, lo, hi, 16);
    };
    for (const auto& p : pieces_) {
        if (b <= a) break;
        const double lo = std::max(a, p.from), hi = std::min(b, p.to);
        if (hi <= lo) continue;
        const auto* pw = std::get_if<PowerDensity>(&p.density);
        const bool sing_lo = pw && pw->exponent < 0.0 && pw->center == lo;
        const bool sing_hi = pw && pw->exponent < 0.0 && pw->center == hi;
        if (hi == kInf) {
            double x0 = lo, w = std::max(1.0, lo);
            for (int k = 0; k < 160; ++k) {
                sum += panel(p, x0, x0 + w);
                x0 += w;
                w *= 2.0;
            }
            continue;
        }
        if (!pw) {
            const int panels = 4;
            const double h = (hi - lo) / panels;
            for (int k = 0; k < panels; ++k) sum += panel(p, lo + k * h, lo + (k + 1) * h);
            continue;
        }
        // Geometric panels toward singular ends, uniform otherwise. The innermost
        // sliver uses the exact mass with f frozen at its midpoint.
        double l0 = lo, h0 = hi;
        const int levels = 50;
        if (sing_lo || sing_hi) {
            const double mid = 0.5 * (lo + hi);
            if (sing_lo) {
                double d = mid - lo;
                for (int k = 0; k < levels; ++k) {
                    sum += panel(p, lo + 0.5 * d, lo + d);
                    d *= 0.5;
                }
                sum += f(lo + 0.5 * d) * p.moment(0, lo, lo + d);
                l0 = mid;
            }
            if (sing_hi) {
                double d = hi - mid;
                for (int k = 0; k < levels; ++k) {
                    sum += panel(p, hi - d, hi - 0.5 * d);
                    d *= 0.5;
                }
                sum += f(hi - 0.5 * d) * p.moment(0, hi - d, hi);
                h0 = mid;
            }
        }
        if (sing_lo && sing_hi) continue;
        const int panels = 8;
        const double h = (h0 - l0) / panels;
        for (int k = 0; k < panels; ++k) sum += panel(p, l0 + k * h, l0 + (k + 1) * h);
    }
    for (const auto& at : atoms_) {
        const bool inside = (at.at > a_in && at.at < b_in) || (with_a && at.at == a_in) ||
                            (with_b && at.at == b_in);
        if (inside && at.at <= lprime_) sum += f(at.at) * at.mass;
    }
    if (!std::isfinite(sum)) throw NonIntegrable("integrand not integrable against dm");
    return sum;
}

namespace measures {

SpeedMeasure reflecting_bm(double lp) {
    return SpeedMeasure({DensityPiece{0.0, lp, LinearDensity{1.0, 0.0}}}, {}, lp, kInf);
}

SpeedMeasure half_line_bm() {
    return SpeedMeasure({DensityPiece{0.0, kInf, LinearDensity{1.0, 0.0}}}, {}, kInf, kInf);
}

SpeedMeasure absorbed_bm(double lp) {
    return SpeedMeasure({DensityPiece{0.0, lp, LinearDensity{1.0, 0.0}}}, {}, lp, lp);
}

}  // namespace measures

}  // namespace hdiff
