#include "hdiff/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hdiff/error.hpp"

namespace hdiff {

ResolventKernel::ResolventKernel(DiscretizationPtr disc, double q, const EigenOptions& opts)
    : disc_(std::move(disc)),
      es_(q > 0.0 ? solve_eigen(disc_, q, opts) : throw InvalidQ("resolvent requires q > 0")),
      space_(state_space(disc_->measure())),
      phi_mass_(es_.phi, GridFunction::constant(disc_, 1.0)),
      rho_mass_(es_.rho, GridFunction::constant(disc_, 1.0)) {}

void ResolventKernel::check_domain(double x) const {
    if (is_l(x)) return;
    const bool inside = x >= 0.0 && (x < space_.lprime || (space_.lprime_included && x == space_.lprime));
    if (!inside || std::isnan(x)) throw OutOfDomain("point " + std::to_string(x) + " is outside the state space");
}

double ResolventKernel::time_in_interior(double x) const {
    if (is_l(x)) return 0.0;
    return es_.H * (es_.rho(x) * phi_mass_(x) + es_.phi(x) * (rho_mass_.total() - rho_mass_(x)));
}

double ResolventKernel::kernel(double x, double y) const {
    check_domain(x);
    check_domain(y);
    if (is_l(y)) return is_l(x) ? 1.0 / q() : 1.0 / q() - time_in_interior(x);
    if (is_l(x)) return 0.0;
    const double lo = std::min(x, y), hi = std::max(x, y);
    return es_.H * es_.phi(lo) * std::max(es_.rho(hi), 0.0);
}

double ResolventKernel::kernel0(double x, double y) const {
    check_domain(x);
    check_domain(y);
    if (is_l(y)) {
        if (is_l(x)) return 1.0 / q();
        return kernel(x, y) - std::max(es_.rho(x), 0.0) * kernel(0.0, y);
    }
    if (is_l(x)) return 0.0;
    const double lo = std::min(x, y), hi = std::max(x, y);
    return es_.psi(lo) * std::max(es_.rho(hi), 0.0);
}

double ResolventKernel::rho_at_lprime() const {
    const auto& d = *disc_;
    const double end = es_.rho.values().back();
    if (!d.truncated()) return end;
    // rho(l') = rho(X) + int_X^l' D_s rho, with D_s rho(y) ~ -q rho(X) m((y, l')).
    const auto& m = d.measure();
    const double X = d.end();
    const double lever = m.moment(1, X, m.lprime()) - X * m.tail_mass(X);
    if (!std::isfinite(lever)) return 0.0;
    return std::max(end * (1.0 - q() * lever), 0.0);
}

double apply_Rq(const ResolventKernel& rk, const GridFunction& f, double x, std::optional<double> f_at_l) {
    rk.check_domain(x);
    const auto& sp = rk.space();
    const double fl = sp.l_in_I ? f_at_l.value_or(f(sp.l)) : 0.0;
    if (rk.is_l(x)) return fl / rk.q();
    const auto& es = rk.eigen();
    const ProductIntegral below(es.phi, f), above(es.rho, f);
    double r = es.H * (es.rho(x) * below(x) + es.phi(x) * (above.total() - above(x)));
    if (sp.l_in_I) r += fl * rk.kernel(x, sp.l);
    if (!std::isfinite(r)) throw NonIntegrable("R_q f is not finite at x = " + std::to_string(x));
    return r;
}

double apply_R0q(const ResolventKernel& rk, const GridFunction& f, double x, std::optional<double> f_at_l) {
    const double rx = apply_Rq(rk, f, x, f_at_l);
    return rx - hitting_laplace(rk, x, 0.0) * apply_Rq(rk, f, 0.0, f_at_l);
}

double hitting_laplace(const ResolventKernel& rk, double x, double y, bool stopped) {
    rk.check_domain(x);
    rk.check_domain(y);
    if (x == y) return 1.0;
    const auto& es = rk.eigen();
    if (stopped) {
        if (x > y) throw OutOfDomain("stopped hitting time requires x <= y");
        if (rk.is_l(y)) return rk.q() * rk.kernel0(x, y);
        return es.psi(x) / es.psi(y);
    }
    if (rk.is_l(x)) return 0.0;
    if (rk.is_l(y)) return rk.q() * rk.kernel(x, y);
    if (x < y) return es.phi(x) / es.phi(y);
    return std::max(es.rho(x), 0.0) / es.rho(y);
}

double excursion_functional(const ResolventKernel& rk, const GridFunction& f, std::optional<double> f_at_l) {
    if (std::abs(f.values().front()) > 1e-12 * std::max(1.0, f.sup_norm()))
        throw Precondition("excursion functional requires f(0) = 0");
    return apply_Rq(rk, f, 0.0, f_at_l) / rk.H();
}

double survival_constant(const ResolventKernel& rk) { return rk.rho_at_lprime(); }

double extrapolate_to_zero(const std::function<double(double)>& g) {
    constexpr double q1 = 1e-2, q2 = 1e-3, q3 = 1e-4;
    const double g1 = g(q1), g2 = g(q2), g3 = g(q3);
    // Quadratic through the three samples, evaluated at q = 0.
    const double w1 = q2 * q3 / ((q1 - q2) * (q1 - q3));
    const double w2 = q1 * q3 / ((q2 - q1) * (q2 - q3));
    const double w3 = q1 * q2 / ((q3 - q1) * (q3 - q2));
    return w1 * g1 + w2 * g2 + w3 * g3;
}

}  // namespace hdiff
