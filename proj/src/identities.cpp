#include "hdiff/identities.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <ostream>

#include "hdiff/csv.hpp"
#include "hdiff/error.hpp"

namespace hdiff {

namespace {

enum Uses : unsigned { kQ = 1, kP = 2, kX = 4, kZ = 8 };

struct Sides {
    double lhs, rhs;
};

struct Identity {
    std::string_view name;
    unsigned uses;
    bool inequality;
    std::function<Sides(IdentityContext&, const IdentityParams&)> eval;
};

/// int_{(0, X]} r_q(x, y) r_p(y, z) dm(y), piecewise between x and z.
double resolvent_product(const ResolventKernel& a, const ResolventKernel& b, double x, double z) {
    const auto& ea = a.eigen();
    const auto& eb = b.eigen();
    const double lo = std::min(x, z), hi = std::max(x, z);
    const double end = a.disc()->end();
    const std::array<double, 4> cuts{0.0, lo, hi, end};
    double total = 0.0;
    for (int k = 0; k < 3; ++k) {
        if (!(cuts[k + 1] > cuts[k])) continue;
        const double mid = 0.5 * (cuts[k] + cuts[k + 1]);
        const bool below_x = mid < x, below_z = mid < z;
        const GridFunction& u = below_x ? ea.phi : ea.rho;
        const GridFunction& v = below_z ? eb.phi : eb.rho;
        const double cu = ea.H * (below_x ? ea.rho(x) : ea.phi(x));
        const double cv = eb.H * (below_z ? eb.rho(z) : eb.phi(z));
        total += cu * cv * ProductIntegral(u, v).between(cuts[k], cuts[k + 1]);
    }
    return total;
}

const std::vector<Identity>& registry() {
    static const std::vector<Identity> table = {
        {"resolvent-equation", kQ | kP | kX | kZ, false,
         [](IdentityContext& c, const IdentityParams& p) {
             if (p.q == p.p) throw InputError("resolvent equation needs q != p");
             const auto& rq = c.kernel(p.q);
             const auto& rp = c.kernel(p.p);
             return Sides{resolvent_product(rq, rp, p.x, p.z),
                          (rp.kernel(p.x, p.z) - rq.kernel(p.x, p.z)) / (p.q - p.p)};
         }},
        {"rho-integral-equation", kQ | kX, false,
         [](IdentityContext& c, const IdentityParams& p) {
             const auto& es = c.kernel(p.q).eigen();
             return Sides{es.rho(p.x), 1.0 - p.x / es.H + p.q * c.j_rho(p.q)(p.x)};
         }},
        {"resolvent-of-h0", kQ | kX, false,
         [](IdentityContext& c, const IdentityParams& p) {
             const auto& rk = c.kernel(p.q);
             const auto& zr = c.zero();
             return Sides{apply_Rq(rk, zr.h0, p.x),
                          zr.h0(p.x) / p.q + rk.kernel(p.x, 0.0) / p.q - zr.pi0 / (p.q * p.q)};
         }},
        {"stopped-resolvent-of-h0", kQ | kX, false,
         [](IdentityContext& c, const IdentityParams& p) {
             const auto& rk = c.kernel(p.q);
             const auto& zr = c.zero();
             const double rho = rk.eigen().rho(p.x);
             return Sides{apply_R0q(rk, zr.h0, p.x), zr.h0(p.x) / p.q - zr.pi0 / (p.q * p.q) * (1.0 - rho)};
         }},
        {"excursion-of-h0", kQ, false,
         [](IdentityContext& c, const IdentityParams& p) {
             const auto& rk = c.kernel(p.q);
             const auto& zr = c.zero();
             return Sides{excursion_functional(rk, zr.h0), 1.0 / p.q - zr.pi0 / (p.q * p.q * rk.H())};
         }},
        {"integral-inequality", kQ | kP, true,
         [](IdentityContext& c, const IdentityParams& p) {
             if (!(p.p > 0.0 && p.p < p.q)) throw InputError("integral inequality needs 0 < p < q");
             const auto& rq = c.kernel(p.q);
             const auto& rp = c.kernel(p.p);
             const double lhs = ProductIntegral(rq.eigen().rho, rp.eigen().psi).total();
             return Sides{lhs, rp.H() / (rq.H() * (p.q - p.p))};
         }},
        {"excursion-of-ground-state", kQ, false,
         [](IdentityContext& c, const IdentityParams& p) {
             const auto& gs = c.ground();
             return Sides{excursion_functional(c.kernel(p.q), gs.h_star), 1.0 / (p.q - gs.gamma_star)};
         }},
        {"stopped-resolvent-of-scale", kQ | kX, false,
         [](IdentityContext& c, const IdentityParams& p) {
             const auto& rk = c.kernel(p.q);
             const double chi = survival_constant(rk);
             const auto s = GridFunction::identity(c.disc());
             return Sides{apply_R0q(rk, s, p.x), p.x / p.q - rk.eigen().psi(p.x) * chi / p.q};
         }},
        {"excursion-of-scale", kQ, false,
         [](IdentityContext& c, const IdentityParams& p) {
             const auto& rk = c.kernel(p.q);
             const auto s = GridFunction::identity(c.disc());
             return Sides{excursion_functional(rk, s), (1.0 - survival_constant(rk)) / p.q};
         }},
        {"scale-transform-survival", kQ | kX, false,
         [](IdentityContext& c, const IdentityParams& p) {
             const auto& rk = c.kernel(p.q);
             const auto s = GridFunction::identity(c.disc());
             return Sides{1.0 - survival_laplace(c.scale_transform(), p.x, p.q),
                          p.q / p.x * apply_R0q(rk, s, p.x)};
         }},
    };
    return table;
}

std::string describe(unsigned uses, const IdentityParams& p) {
    std::string out;
    auto add = [&](unsigned bit, const char* key, double v) {
        if (!(uses & bit)) return;
        if (!out.empty()) out += ' ';
        out += key;
        out += '=';
        out += format_number(v, true);
    };
    add(kQ, "q", p.q);
    add(kP, "p", p.p);
    add(kX, "x", p.x);
    add(kZ, "z", p.z);
    return out;
}

const Identity& lookup(std::string_view name) {
    for (const auto& id : registry())
        if (id.name == name) return id;
    throw UnknownIdentity("unknown identity '" + std::string(name) + "'");
}

}  // namespace

IdentityContext::IdentityContext(DiscretizationPtr disc, const EigenOptions& opts)
    : disc_(std::move(disc)), opts_(opts) {}

const ResolventKernel& IdentityContext::kernel(double q) {
    auto& slot = kernels_[q];
    if (!slot) slot = std::make_unique<ResolventKernel>(disc_, q, opts_);
    return *slot;
}

const ZeroResolvent& IdentityContext::zero() {
    if (!zero_) zero_ = zero_resolvent(disc_, opts_);
    return *zero_;
}

const GroundState& IdentityContext::ground() {
    if (!ground_) ground_ = ground_state(disc_, opts_);
    return *ground_;
}

const HTransform& IdentityContext::scale_transform() {
    if (!scale_) scale_ = build_htransform(disc_, HKind::Scale, opts_);
    return *scale_;
}

const GridFunction& IdentityContext::j_rho(double q) {
    auto it = j_rho_.find(q);
    if (it == j_rho_.end()) it = j_rho_.emplace(q, apply_J(kernel(q).eigen().rho)).first;
    return it->second;
}

std::vector<double> IdentityContext::lattice() const {
    const auto& m = disc_->measure();
    const double span = m.lprime_finite() ? m.lprime() : 2.0;
    return {0.1 * span, 0.3 * span, 0.5 * span, 0.7 * span, 0.9 * span};
}

std::span<const std::string_view> identity_names() {
    static const auto names = [] {
        std::vector<std::string_view> v;
        for (const auto& id : registry()) v.push_back(id.name);
        return v;
    }();
    return names;
}

IdentityResult verify_identity(IdentityContext& ctx, std::string_view name, const IdentityParams& params,
                               double tol) {
    const auto& id = lookup(name);
    const auto [lhs, rhs] = id.eval(ctx, params);
    IdentityResult r;
    r.identity = std::string(id.name);
    r.params = describe(id.uses, params);
    r.lhs = lhs;
    r.rhs = rhs;
    const double diff = id.inequality ? std::max(0.0, lhs - rhs) : std::abs(lhs - rhs);
    r.residual = diff / std::max(1.0, std::abs(rhs));
    r.pass = r.residual <= tol;
    return r;
}

std::vector<IdentityResult> verify_suite(IdentityContext& ctx, double tol) {
    constexpr std::array<double, 3> qs{0.5, 1.0, 2.0};
    const auto xs = ctx.lattice();
    std::vector<IdentityResult> out;
    for (const auto& id : registry()) {
        for (double q : qs) {
            std::vector<double> ps{0.0};
            if (id.uses & kP) {
                ps.clear();
                for (double p : qs)
                    if (p != q && (!id.inequality || p < q)) ps.push_back(p);
            }
            const std::vector<double> xv = (id.uses & kX) ? xs : std::vector<double>{0.0};
            const std::vector<double> zv = (id.uses & kZ) ? xs : std::vector<double>{0.0};
            for (double p : ps)
                for (double x : xv)
                    for (double z : zv) out.push_back(verify_identity(ctx, id.name, {q, p, x, z}, tol));
        }
    }
    return out;
}

void write_identity_report(std::ostream& out, std::span<const IdentityResult> results, bool pretty) {
    CsvWriter csv(out, pretty);
    csv.header({"identity", "params", "lhs", "rhs", "residual", "pass"});
    for (const auto& r : results) {
        csv << r.identity << r.params << r.lhs << r.rhs << r.residual << r.pass;
        csv.end_row();
    }
}

}  // namespace hdiff
