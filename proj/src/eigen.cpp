#include "hdiff/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hdiff/error.hpp"
#include "hdiff/kernels.hpp"
#include "hdiff/quadrature.hpp"

namespace hdiff {

namespace {

struct NodeData {
    std::vector<double> v, dl, dr;

    explicit NodeData(std::size_t n = 0) : v(n, 0.0), dl(n, 0.0), dr(n, 0.0) {}
};

/// Scratch buffers for J restarted at node k over cells [k, e).
class SegmentIntegrator {
public:
    explicit SegmentIntegrator(const Discretization& d) : d_(d) {
        const std::size_t n = d.cells();
        for (auto& c : coef_) c.resize(n);
        flux_.resize(n);
        value_.resize(n);
    }

    /// out = J_k in, both indexed locally (0 is node k).
    void apply(std::size_t k, std::size_t e, const NodeData& in, NodeData& out) {
        const std::size_t n = e - k;
        const auto h = d_.widths();
        const auto mass = d_.node_mass();
        for (std::size_t i = 0; i < n; ++i) {
            coef_[0][i] = in.v[i];
            coef_[1][i] = h[k + i] * in.dr[i];
            coef_[2][i] = in.v[i + 1];
            coef_[3][i] = h[k + i] * in.dl[i + 1];
        }
        const kernels::CellLanes c{{coef_[0].data(), coef_[1].data(), coef_[2].data(), coef_[3].data()}};
        const kernels::CellLanes a{{d_.mass(0) + k, d_.mass(1) + k, d_.mass(2) + k, d_.mass(3) + k}};
        const kernels::CellLanes w{{d_.lever(0) + k, d_.lever(1) + k, d_.lever(2) + k, d_.lever(3) + k}};
        kernels::contract()(n, c, a, w, flux_.data(), value_.data());
        double F = 0.0, V = 0.0;
        out.v[0] = out.dl[0] = out.dr[0] = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            V += F * h[k + i] + value_[i];
            const double fl = F + flux_[i];
            F = fl + mass[k + i + 1] * in.v[i + 1];
            out.v[i + 1] = V;
            out.dl[i + 1] = fl;
            out.dr[i + 1] = F;
        }
    }

private:
    const Discretization& d_;
    std::array<std::vector<double>, 4> coef_;
    std::vector<double> flux_, value_;
};

double sup_abs(const std::vector<double>& v, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s = std::max(s, std::abs(v[i]));
    return s;
}

// Last node e such that |q| J_k 1(x_e) <= 1 (at least k + 1).
std::size_t segment_end(const Discretization& d, std::size_t k, double q) {
    const std::size_t N = d.cells();
    if (q == 0.0) return N;
    const auto h = d.widths();
    const auto mass = d.node_mass();
    double F = 0.0, V = 0.0;
    std::size_t e = k;
    while (e < N) {
        const double vn = V + F * h[e] + d.lever(0)[e] + d.lever(2)[e];
        if (e > k && std::abs(q) * vn > 1.0) break;
        V = vn;
        F += d.mass(0)[e] + d.mass(2)[e] + mass[e + 1];
        ++e;
    }
    return e;
}

// Boundary ratio lim psi/phi at the right end (through the flat stretch up to l).
double boundary_ratio(const GridFunction& phi, const GridFunction& psi) {
    const auto& d = phi.disc();
    const double a = phi.values().back(), b = phi.dright().back();
    const double c = psi.values().back(), e = psi.dright().back();
    const double L = d.extension_length();
    if (L == kInf) {
        if (d.truncated()) return c / a;
        return b == 0.0 ? std::copysign(kInf, e) : e / b;
    }
    const double den = a + b * L;
    return den == 0.0 ? kInf : (c + e * L) / den;
}

}  // namespace

GridFunction apply_J(const GridFunction& f) {
    const auto& d = f.disc();
    SegmentIntegrator integ(d);
    NodeData in(d.size()), out(d.size());
    std::copy(f.values().begin(), f.values().end(), in.v.begin());
    std::copy(f.dleft().begin(), f.dleft().end(), in.dl.begin());
    std::copy(f.dright().begin(), f.dright().end(), in.dr.begin());
    integ.apply(0, d.cells(), in, out);
    return GridFunction(f.disc_ptr(), std::move(out.v), std::move(out.dl), std::move(out.dr),
                        GridFunction::Tail::Linear);
}

GridFunction solve_volterra(const DiscretizationPtr& disc, double q, double a, double b,
                            const EigenOptions& opts, double* truncation_error) {
    const auto& d = *disc;
    const auto x = d.nodes();
    const std::size_t N = d.cells();
    SegmentIntegrator integ(d);
    NodeData result(d.size());
    result.v[0] = a;
    result.dl[0] = result.dr[0] = b;
    NodeData term(d.size()), next(d.size()), sum(d.size());
    double worst = 0.0;
    std::size_t k = 0;
    double value = a, flux = b;
    while (k < N) {
        const std::size_t e = segment_end(d, k, q);
        const std::size_t n = e - k;
        for (std::size_t j = 0; j <= n; ++j) {
            term.v[j] = value + flux * (x[k + j] - x[k]);
            term.dl[j] = term.dr[j] = flux;
        }
        std::copy_n(term.v.begin(), n + 1, sum.v.begin());
        std::copy_n(term.dl.begin(), n + 1, sum.dl.begin());
        std::copy_n(term.dr.begin(), n + 1, sum.dr.begin());
        double last = 0.0;
        if (q != 0.0) {
            bool converged = false;
            for (int it = 1; it <= opts.max_terms; ++it) {
                integ.apply(k, e, term, next);
                for (std::size_t j = 0; j <= n; ++j) {
                    next.v[j] *= q;
                    next.dl[j] *= q;
                    next.dr[j] *= q;
                    sum.v[j] += next.v[j];
                    sum.dl[j] += next.dl[j];
                    sum.dr[j] += next.dr[j];
                }
                std::swap(term, next);
                last = std::max(sup_abs(term.v, n + 1), sup_abs(term.dr, n + 1) * (x[e] - x[k]));
                const double scale = std::max(1.0, sup_abs(sum.v, n + 1));
                if (last < opts.tol * scale) {
                    converged = true;
                    last /= scale;
                    break;
                }
            }
            if (!converged)
                throw NoConvergence("Neumann series did not reach tolerance within " +
                                    std::to_string(opts.max_terms) + " terms");
        }
        worst = std::max(worst, last);
        for (std::size_t j = 1; j <= n; ++j) {
            result.v[k + j] = sum.v[j];
            result.dl[k + j] = sum.dl[j];
            result.dr[k + j] = sum.dr[j];
        }
        value = sum.v[n];
        flux = sum.dr[n];
        k = e;
    }
    if (truncation_error) *truncation_error = worst;
    return GridFunction(disc, std::move(result.v), std::move(result.dl), std::move(result.dr),
                        GridFunction::Tail::Linear);
}

EigenSystem solve_eigen(const DiscretizationPtr& disc, double q, const EigenOptions& opts) {
    if (!(opts.tol > 0.0)) throw InputError("tolerance must be positive");
    if (!std::isfinite(q)) throw InvalidQ("q must be finite");
    const auto& d = *disc;
    EigenSystem es;
    es.q = q;
    double e1 = 0.0, e2 = 0.0;
    es.phi = solve_volterra(disc, q, 1.0, 0.0, opts, &e1);
    es.psi = solve_volterra(disc, q, 0.0, 1.0, opts, &e2);
    es.truncation_error = std::max(e1, e2);
    es.H_ratio = boundary_ratio(es.phi, es.psi);
    const std::size_t n = d.size();

    if (q <= 0.0) {
        // No integral route: phi may vanish. Use the boundary ratio.
        es.H = q == 0.0 ? d.measure().l() : es.H_ratio;
        const double inv = (es.H == kInf || es.H == -kInf) ? 0.0 : 1.0 / es.H;
        es.rho = combine(1.0, es.phi, -inv, es.psi);
        return es;
    }

    // T(x) = int_x^l phi^-2 dy, then rho = phi T / H avoids cancellation.
    constexpr int G = Discretization::kQuadPoints;
    const auto& rule = gauss_legendre(G);
    const auto pq = es.phi.at_quadrature();
    const auto h = d.widths();
    std::vector<double> cell(d.cells());
    for (std::size_t i = 0; i < d.cells(); ++i) {
        double s = 0.0;
        for (int g = 0; g < G; ++g) {
            const double p = pq[i * G + g];
            s += rule.weights[g] / (p * p);
        }
        cell[i] = s * h[i];
    }
    const double a = es.phi.values().back(), b = es.phi.dright().back();
    const double L = d.extension_length();
    double tail;
    if (L == kInf)
        tail = b > 0.0 ? 1.0 / (a * b) : kInf;
    else
        tail = L / (a * (a + b * L));
    std::vector<double> T(n);
    T[n - 1] = tail;
    for (std::size_t i = d.cells(); i-- > 0;) T[i] = T[i + 1] + cell[i];
    es.H = T[0];
    if (!std::isfinite(es.H)) throw NumericalError("H(q) is not finite for q > 0");

    std::vector<double> v(n), dl(n), dr(n);
    const auto pv = es.phi.values(), pl = es.phi.dleft(), pr = es.phi.dright();
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = pv[i] * T[i] / es.H;
        const double w = 1.0 / (pv[i] * es.H);
        dl[i] = pl[i] * T[i] / es.H - w;
        dr[i] = pr[i] * T[i] / es.H - w;
    }
    es.rho = GridFunction(disc, std::move(v), std::move(dl), std::move(dr), GridFunction::Tail::Linear);
    return es;
}

ZeroResolvent zero_resolvent(const DiscretizationPtr& disc, const EigenOptions& opts) {
    ZeroResolvent zr;
    zr.pi0 = disc->measure().pi0();
    const auto j1 = apply_J(GridFunction::constant(disc, 1.0));
    zr.g = scaled(zr.pi0, j1);
    zr.h0 = combine(1.0, GridFunction::identity(disc), -1.0, zr.g);
    if (zr.pi0 > 0.0) {
        for (double q : {1e-4}) {
            const auto es = solve_eigen(disc, q, opts);
            const double est = q * es.H;
            if (std::abs(est - zr.pi0) > 0.01 * zr.pi0)
                throw CrossCheckFailed("pi0 = " + std::to_string(zr.pi0) + " but q H(q) = " +
                                       std::to_string(est) + " at q = " + std::to_string(q));
        }
    }
    return zr;
}

GridFunction h_q(const EigenSystem& es) {
    if (!(es.q > 0.0)) throw InvalidQ("h_q requires q > 0");
    return combine(-es.H, es.rho, 0.0, es.rho, es.H);
}

GridFunction h_q(const ZeroResolvent&, const EigenSystem& es) { return h_q(es); }

GroundState ground_state(const DiscretizationPtr& disc, const EigenOptions& opts,
                         std::optional<BoundaryKind> right) {
    const auto& m = disc->measure();
    const BoundaryKind kind = right ? *right : classify_boundary(m, Side::Right).kind;
    if (kind != BoundaryKind::RegularReflecting && kind != BoundaryKind::Entrance)
        return GroundState{0.0, GridFunction::identity(disc)};

    const bool entrance = kind == BoundaryKind::Entrance;
    const double X = disc->end();
    const double tail_mass = entrance ? m.tail_mass(X) : 0.0;
    auto boundary_flux = [&](double gamma) {
        const auto psi = solve_volterra(disc, gamma, 0.0, 1.0, opts);
        return psi.dright().back() + gamma * psi.values().back() * tail_mass;
    };

    const double len = m.lprime_finite() ? m.lprime() : 1.0;
    const double gamma_max = 1e4 / (len * len);
    auto scan_point = [&](int j) {
        if (!entrance) {
            const double k = 0.5 * (j + 1);
            return -std::pow(k * std::numbers::pi / (2.0 * len), 2);
        }
        return -1e-4 * std::pow(2.0, 0.25 * j);
    };
    double hi = 0.0, f_hi = boundary_flux(0.0);
    double lo = 0.0, f_lo = f_hi;
    bool bracketed = false;
    for (int j = 0;; ++j) {
        const double g = scan_point(j);
        if (g < -gamma_max) break;
        const double f = boundary_flux(g);
        if ((f <= 0.0) != (f_hi <= 0.0)) {
            lo = g;
            f_lo = f;
            bracketed = true;
            break;
        }
        hi = g;
        f_hi = f;
    }
    if (!bracketed)
        throw BracketFailure("no sign change of the boundary flux in [-" + std::to_string(gamma_max) +
                             ", 0]");
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        const double f = boundary_flux(mid);
        if ((f <= 0.0) == (f_lo <= 0.0)) {
            lo = mid;
            f_lo = f;
        } else {
            hi = mid;
            f_hi = f;
        }
    }
    // Linear interpolation inside the final bracket.
    const double gamma = (f_lo == f_hi) ? 0.5 * (lo + hi) : lo - f_lo * (hi - lo) / (f_hi - f_lo);
    GroundState gs;
    gs.gamma_star = std::clamp(gamma, lo, hi);
    gs.h_star = solve_volterra(disc, gs.gamma_star, 0.0, 1.0, opts);
    gs.h_star.set_tail(GridFunction::Tail::Constant);
    return gs;
}

double generator_residual(const GridFunction& f, double lambda) {
    const auto& d = f.disc();
    const auto& m = d.measure();
    const auto x = d.nodes();
    const auto v = f.values();
    const auto mass = d.node_mass();
    const double scale = std::max(std::abs(lambda) * f.sup_norm(), 1e-300);
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
        if (mass[i] > 0.0) continue;
        const double hl = x[i] - x[i - 1], hr = x[i + 1] - x[i];
        const double dm = m.mass(x[i] - 0.5 * hl, x[i] + 0.5 * hr);
        if (!(dm > 0.0) || !std::isfinite(dm)) continue;
        const double lap = ((v[i + 1] - v[i]) / hr - (v[i] - v[i - 1]) / hl) / dm;
        worst = std::max(worst, std::abs(lap - lambda * v[i]) / scale);
    }
    return worst;
}

}  // namespace hdiff
