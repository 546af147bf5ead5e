#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hdiff/htransform.hpp"
#include "hdiff/resolvent.hpp"

namespace hdiff {

struct IdentityParams {
    double q = 1.0;
    double p = 0.5;
    double x = 0.5;
    double z = 0.5;
};

struct IdentityResult {
    std::string identity;
    std::string params;
    double lhs = 0.0;
    double rhs = 0.0;
    /// |lhs - rhs| / max(1, |rhs|); for inequalities the positive part of lhs - rhs.
    double residual = 0.0;
    bool pass = false;
};

/// Per-measure cache of the kernels and transforms the identities need.
/// Not thread-safe; use one context per thread.
class IdentityContext {
public:
    explicit IdentityContext(DiscretizationPtr disc, const EigenOptions& opts = {});

    const DiscretizationPtr& disc() const noexcept { return disc_; }
    const ResolventKernel& kernel(double q);
    const ZeroResolvent& zero();
    const GroundState& ground();
    const HTransform& scale_transform();
    /// J rho_q, used by the integral equation for rho_q.
    const GridFunction& j_rho(double q);

    /// Five interior points spread over I' (over [0, 2] when l' is infinite).
    std::vector<double> lattice() const;

private:
    DiscretizationPtr disc_;
    EigenOptions opts_;
    std::map<double, std::unique_ptr<ResolventKernel>> kernels_;
    std::map<double, GridFunction> j_rho_;
    std::optional<ZeroResolvent> zero_;
    std::optional<GroundState> ground_;
    std::optional<HTransform> scale_;
};

std::span<const std::string_view> identity_names();

/// Throws UnknownIdentity for names outside the registry.
IdentityResult verify_identity(IdentityContext& ctx, std::string_view name, const IdentityParams& params,
                               double tol = 1e-6);

/// Every identity over the documented lattice: q, p in {0.5, 1, 2} (p != q,
/// p < q for the inequality) and x, z on the context lattice.
std::vector<IdentityResult> verify_suite(IdentityContext& ctx, double tol = 1e-6);

/// CSV with columns identity,params,lhs,rhs,residual,pass.
void write_identity_report(std::ostream& out, std::span<const IdentityResult> results, bool pretty = false);

}  // namespace hdiff
