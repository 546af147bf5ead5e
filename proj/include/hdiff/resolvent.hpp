#pragma once

#include <functional>
#include <optional>

#include "hdiff/classify.hpp"
#include "hdiff/eigen.hpp"

namespace hdiff {

/// Green kernel r_q of the process on I with respect to m~ (dm on I' plus a
/// unit atom at l when l belongs to I), and of the process stopped at 0.
class ResolventKernel {
public:
    ResolventKernel(DiscretizationPtr disc, double q, const EigenOptions& opts = {});

    double q() const noexcept { return es_.q; }
    double H() const noexcept { return es_.H; }
    const EigenSystem& eigen() const noexcept { return es_; }
    const StateSpace& space() const noexcept { return space_; }
    const DiscretizationPtr& disc() const noexcept { return disc_; }

    /// r_q(x, y); rows and columns at l follow the absorbed extension.
    double kernel(double x, double y) const;
    /// Kernel of the process killed at 0: r_q - r_q(x, 0) r_q(0, y) / r_q(0, 0).
    double kernel0(double x, double y) const;
    /// R'_q 1(x): expected discounted time spent in I' before reaching l.
    double time_in_interior(double x) const;

    /// lim rho_q(x) as x increases to l', i.e. P_{l'}[exp(-q T_0)].
    double rho_at_lprime() const;

    /// Throws OutOfDomain unless x lies in I.
    void check_domain(double x) const;
    bool is_l(double x) const noexcept { return space_.l_in_I && x == space_.l; }

private:
    DiscretizationPtr disc_;
    EigenSystem es_;
    StateSpace space_;
    ProductIntegral phi_mass_, rho_mass_;
};

/// R_q f(x) = int_I f(y) r_q(x, y) m~(dy). `f_at_l` defaults to f evaluated
/// through its tail.
double apply_Rq(const ResolventKernel& rk, const GridFunction& f, double x,
                std::optional<double> f_at_l = std::nullopt);
/// R^0_q f(x) = R_q f(x) - P_x[exp(-q T_0)] R_q f(0).
double apply_R0q(const ResolventKernel& rk, const GridFunction& f, double x,
                 std::optional<double> f_at_l = std::nullopt);

/// P_x[exp(-q T_y)]; with `stopped`, the same for the process killed at 0
/// (requires x <= y).
double hitting_laplace(const ResolventKernel& rk, double x, double y, bool stopped = false);

/// N_q f = R_q f(0) / r_q(0, 0); requires f(0) = 0.
double excursion_functional(const ResolventKernel& rk, const GridFunction& f,
                            std::optional<double> f_at_l = std::nullopt);

/// chi_q(l') = P_{l'}[exp(-q T_0)], the constant in R^0_q s = (s - psi_q chi_q) / q.
double survival_constant(const ResolventKernel& rk);

/// Limit of g(q) as q decreases to 0 from g at q = 1e-2, 1e-3, 1e-4, by
/// Richardson extrapolation in q.
double extrapolate_to_zero(const std::function<double(double)>& g);

}  // namespace hdiff
