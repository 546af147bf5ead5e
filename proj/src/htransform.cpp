#include "hdiff/htransform.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>

#include "hdiff/csv.hpp"
#include "hdiff/error.hpp"
#include "hdiff/quadrature.hpp"
#include "hdiff/resolvent.hpp"

namespace hdiff {

namespace {

constexpr std::array<std::string_view, 3> kKindNames = {"scale", "ground", "zero"};

/// r^0_lambda for any lambda above the bottom of the spectrum. The full
/// kernel (and its l column) is only available for lambda > 0.
class StoppedKernel {
public:
    StoppedKernel(const DiscretizationPtr& disc, double lambda, const EigenOptions& opts) {
        if (lambda > 0.0)
            rk_.emplace(disc, lambda, opts);
        else
            es_ = solve_eigen(disc, lambda, opts);
        end_ = disc->end();
    }

    const EigenSystem& eigen() const { return rk_ ? rk_->eigen() : es_; }
    bool is_l(double x) const { return rk_ && rk_->is_l(x); }

    void check_domain(double x) const {
        if (rk_) return rk_->check_domain(x);
        if (!(x >= 0.0 && x <= end_)) throw OutOfDomain("point " + std::to_string(x) + " is outside the grid");
    }

    double stopped(double x, double y) const {
        if (rk_) return rk_->kernel0(x, y);
        const auto& es = eigen();
        return es.psi(std::min(x, y)) * std::max(es.rho(std::max(x, y)), 0.0);
    }

    /// r_lambda(0, y) / r_lambda(0, 0).
    double from_origin(double y) const {
        if (rk_) return rk_->kernel(0.0, y) / rk_->H();
        return std::max(eigen().rho(y), 0.0);
    }

private:
    std::optional<ResolventKernel> rk_;
    EigenSystem es_;
    double end_ = 0.0;
};

bool conservative_ground(const HTransform& ht) {
    if (ht.kind != HKind::Ground) return false;
    const auto k = classify_boundary(ht.disc->measure(), Side::Right).kind;
    return k == BoundaryKind::RegularReflecting || k == BoundaryKind::Entrance;
}

double transformed_kernel_with(const StoppedKernel& sk, const HTransform& ht, double x, double y) {
    sk.check_domain(x);
    sk.check_domain(y);
    if (!(y > 0.0)) throw OutOfDomain("transformed kernel requires y > 0");
    if (x == 0.0) return sk.from_origin(y) / ht.h_at(y);
    return sk.stopped(x, y) / (ht.h_at(x) * ht.h_at(y));
}

void check_domination(const HTransform& ht, const EigenSystem& es) {
    const auto h = ht.h.values(), psi = es.psi.values();
    for (std::size_t i = 0; i < h.size(); ++i)
        if (h[i] > psi[i] * (1.0 + 1e-8) + 1e-12)
            throw HypothesisFailed("h exceeds psi_{q+alpha} at x = " + std::to_string(ht.disc->nodes()[i]));
}

}  // namespace

std::string_view to_string(HKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

HKind hkind_from_string(std::string_view name) {
    for (std::size_t i = 0; i < kKindNames.size(); ++i)
        if (kKindNames[i] == name) return static_cast<HKind>(i);
    throw InputError("unknown transform kind '" + std::string(name) + "'");
}

double HTransform::h_at(double x) const {
    const auto& m = disc->measure();
    switch (kind) {
        case HKind::Scale: return x;
        case HKind::Zero:
            if (pi0 == 0.0) return x;
            // h0(x) = pi0 * int min(x, y) dm(y), free of cancellation.
            return pi0 * (m.moment(1, 0.0, std::min(x, m.lprime())) + x * m.tail_mass(x));
        case HKind::Ground:
            if (alpha == 0.0) return x;
            if (x >= disc->end()) return h.values().back();
            return h(x);
    }
    return x;
}

double HTransform::h_slope_at_end() const {
    switch (kind) {
        case HKind::Scale: return 1.0;
        case HKind::Zero: return pi0 == 0.0 ? 1.0 : pi0 * disc->measure().tail_mass(disc->end());
        case HKind::Ground: return h.dleft().back();
    }
    return 1.0;
}

HTransform build_htransform(const DiscretizationPtr& disc, HKind kind, const EigenOptions& opts) {
    const auto& m = disc->measure();
    const auto& d = *disc;
    HTransform ht;
    ht.kind = kind;
    ht.disc = disc;
    ht.pi0 = m.pi0();
    ht.reference = m.default_reference();
    switch (kind) {
        case HKind::Scale: ht.h = GridFunction::identity(disc); break;
        case HKind::Zero: ht.h = zero_resolvent(disc, opts).h0; break;
        case HKind::Ground:
            try {
                auto gs = ground_state(disc, opts);
                ht.alpha = gs.gamma_star;
                ht.h = std::move(gs.h_star);
            } catch (const NumericalError& e) {
                throw GroundStateUnavailable(std::string("ground state: ") + e.what());
            }
            break;
    }

    ht.speed = cumulative_product(ht.h, ht.h);
    const auto space = state_space(m);
    if (space.l_in_I) ht.speed_atom_at_l = std::pow(ht.h_at(space.l), 2);

    // s^h on the nodes, anchored at the reference point after the sweep.
    const std::size_t n = d.size();
    const auto x = d.nodes();
    auto inv_h2 = [&](double y) {
        const double v = ht.h(y);
        return 1.0 / (v * v);
    };
    std::vector<double> S(n, 0.0);
    S[0] = -kInf;
    for (std::size_t i = 1; i + 1 < n; ++i)
        S[i + 1] = S[i] + gauss_integrate(inv_h2, x[i], x[i + 1], Discretization::kQuadPoints);
    const std::size_t ic = d.locate(ht.reference);
    double Sc = S[ic];
    if (ic == 0) {
        // h is linear near 0 to the accuracy of the first cell.
        const double slope = ht.h.dright()[0];
        Sc = S[1] - (1.0 / ht.reference - 1.0 / x[1]) / (slope * slope);
    } else if (ht.reference > x[ic]) {
        Sc += gauss_integrate(inv_h2, x[ic], ht.reference, Discretization::kQuadPoints);
    }
    for (auto& s : S) s -= Sc;
    ht.scale = std::move(S);

    if (kind == HKind::Zero && ht.pi0 > 0.0) {
        ht.killing = cumulative_product(ht.h, GridFunction::constant(disc, 1.0));
        for (auto& k : ht.killing) k *= ht.pi0;
    }
    return ht;
}

double transformed_kernel(const HTransform& ht, double x, double y, double q, const EigenOptions& opts) {
    if (!(q > 0.0)) throw InvalidQ("transformed kernel requires q > 0");
    const StoppedKernel sk(ht.disc, q + ht.alpha, opts);
    return transformed_kernel_with(sk, ht, x, y);
}

TransformedEigenfunctions transformed_eigenfunctions(const HTransform& ht, double q, double tol,
                                                     const EigenOptions& opts) {
    if (!(q > 0.0)) throw InvalidQ("transformed eigenfunctions require q > 0");
    const auto& d = *ht.disc;
    const auto es = solve_eigen(ht.disc, q + ht.alpha, opts);
    const std::size_t n = d.size();
    const auto x = d.nodes();
    const auto h = ht.h.values();
    TransformedEigenfunctions out;
    out.increasing.resize(n);
    out.decreasing.resize(n);
    out.increasing[0] = 1.0;
    out.decreasing[0] = kInf;
    for (std::size_t i = 1; i < n; ++i) {
        out.increasing[i] = es.psi.values()[i] / h[i];
        out.decreasing[i] = es.rho.values()[i] / h[i];
    }

    // Integrated form on each cell: the jump of D_{s^h} f = (f_s h - f h_s) h
    // equals int (q + k) f dm^h, i.e. q int u h dm (+ pi0 int u dm when killing),
    // for u = psi or rho. Normalized by the largest cell contribution.
    constexpr int G = Discretization::kQuadPoints;
    const auto w = d.quad_weights();
    const auto hq = ht.h.at_quadrature();
    const double kill = ht.killing.empty() ? 0.0 : ht.pi0;
    double worst = 0.0;
    for (const GridFunction* u : {&es.psi, &es.rho}) {
        const auto uq = u->at_quadrature();
        auto flux = [&](double uv, double du, double hv, double dh) { return du * hv - uv * dh; };
        std::vector<double> res(d.cells()), rhs(d.cells());
        double scale = 0.0;
        for (std::size_t i = 0; i < d.cells(); ++i) {
            double lhs = 0.0, rh = 0.0;
            for (int g = 0; g < G; ++g) {
                const std::size_t k = i * G + g;
                rh += w[k] * uq[k] * (q * hq[k] + kill);
            }
            lhs = flux(u->values()[i + 1], u->dleft()[i + 1], h[i + 1], ht.h.dleft()[i + 1]) -
                  flux(u->values()[i], u->dright()[i], h[i], ht.h.dright()[i]);
            res[i] = std::abs(lhs - rh);
            rhs[i] = std::abs(rh);
            scale = std::max(scale, rhs[i]);
        }
        for (std::size_t i = 0; i < d.cells(); ++i)
            worst = std::max(worst, res[i] / (rhs[i] + 1e-9 * scale));
    }
    out.residual = worst;
    if (!(worst <= tol))
        throw ResidualExceeded("transformed generator residual " + std::to_string(worst) + " exceeds " +
                               std::to_string(tol));
    return out;
}

BoundaryClass transformed_boundary(const HTransform& ht, Side side) {
    const auto& m = ht.disc->measure();
    ClassifyOptions opts;
    opts.reference = ht.reference;
    const auto bi = boundary_integrals(m, [&](double x) { return ht.h_at(x); }, side, opts);
    BoundaryKind regular = BoundaryKind::RegularReflecting;
    if (side == Side::Right) {
        const auto original = classify_boundary(m, Side::Right).kind;
        if (original == BoundaryKind::RegularReflecting)
            regular = std::abs(ht.h_slope_at_end()) <= 1e-6 ? BoundaryKind::RegularReflecting
                                                             : BoundaryKind::RegularElastic;
        else if (original == BoundaryKind::RegularElastic)
            regular = BoundaryKind::RegularElastic;
        else
            regular = BoundaryKind::RegularAbsorbing;
    }
    return BoundaryClass{side, kind_from_integrals(bi, regular), bi.F1, bi.F2};
}

double survival_laplace(const HTransform& ht, double x, double q, const EigenOptions& opts) {
    if (!(q > 0.0)) throw InvalidQ("survival transform requires q > 0");
    if (!(x >= 0.0)) throw OutOfDomain("survival transform requires x >= 0");
    if (conservative_ground(ht)) return 0.0;
    const ResolventKernel rk(ht.disc, q, opts);
    rk.check_domain(x);
    const auto& es = rk.eigen();
    if (ht.kind == HKind::Zero && ht.pi0 > 0.0) {
        if (x == 0.0) return ht.pi0 / (q * es.H);
        return ht.pi0 * (1.0 - es.rho(x)) / (q * ht.h_at(x));
    }
    const double chi = survival_constant(rk);
    if (x == 0.0) return chi;
    return es.psi(x) * chi / x;
}

double transformed_hitting_laplace(const HTransform& ht, double x, double y, double q,
                                   const EigenOptions& opts) {
    if (!(q > 0.0)) throw InvalidQ("hitting transform requires q > 0");
    const StoppedKernel sk(ht.disc, q + ht.alpha, opts);
    check_domination(ht, sk.eigen());
    sk.check_domain(x);
    sk.check_domain(y);
    if (!(y > 0.0)) throw OutOfDomain("the transformed process never hits 0");
    if (x == y) return 1.0;
    return transformed_kernel_with(sk, ht, x, y) / transformed_kernel_with(sk, ht, y, y);
}

void write_htransform_csv(std::ostream& out, const HTransform& ht, bool pretty) {
    CsvWriter csv(out, pretty);
    csv.header({"x", "h", "speed", "scale", "killing"});
    const auto x = ht.disc->nodes();
    for (std::size_t i = 0; i < x.size(); ++i) {
        csv << x[i] << ht.h.values()[i] << ht.speed[i] << ht.scale[i]
            << (ht.killing.empty() ? 0.0 : ht.killing[i]);
        csv.end_row();
    }
}

}  // namespace hdiff
