#pragma once

#include <iosfwd>
#include <string_view>
#include <utility>
#include <vector>

#include "hdiff/classify.hpp"
#include "hdiff/eigen.hpp"

namespace hdiff {

enum class HKind { Scale, Ground, Zero };

std::string_view to_string(HKind k);
HKind hkind_from_string(std::string_view name);

/// Doob transform of the process killed at 0 by h = s, h* or h0: speed
/// dm^h = h^2 dm~, scale ds^h = dy / h^2 (s^h(c) = 0) and, for h0, the
/// killing measure (pi0 / h0) dm^h = pi0 h0 dm.
struct HTransform {
    HKind kind = HKind::Scale;
    /// Discount of the transform: gamma* for the ground state, 0 otherwise.
    double alpha = 0.0;
    double pi0 = 0.0;
    double reference = 1.0;
    DiscretizationPtr disc;
    GridFunction h;
    /// Nodal values of m^h (the atom h(l)^2 at l, when l is in I, is kept apart).
    std::vector<double> speed;
    double speed_atom_at_l = 0.0;
    /// Nodal values of s^h; -inf at the origin.
    std::vector<double> scale;
    /// Nodal cumulative killing measure; empty unless kind = Zero with pi0 > 0.
    std::vector<double> killing;

    /// h at any point of I, following the exact tail behavior of each kind.
    double h_at(double x) const;
    /// D_s h at the right end of I' (from the left).
    double h_slope_at_end() const;
};

HTransform build_htransform(const DiscretizationPtr& disc, HKind kind, const EigenOptions& opts = {});

/// r^h_q(x, y), the density of the transformed resolvent against m^h;
/// r^h_q(0, y) = rho_{q+alpha}(y) / h(y). Requires y > 0.
double transformed_kernel(const HTransform& ht, double x, double y, double q,
                          const EigenOptions& opts = {});

struct TransformedEigenfunctions {
    /// psi_{q+alpha} / h and rho_{q+alpha} / h at the grid nodes (inf for the
    /// decreasing one at 0).
    std::vector<double> increasing, decreasing;
    /// Relative residual of the transformed equation at interior nodes.
    double residual = 0.0;
};

/// Throws ResidualExceeded when the residual exceeds `tol`.
TransformedEigenfunctions transformed_eigenfunctions(const HTransform& ht, double q, double tol = 1e-3,
                                                     const EigenOptions& opts = {});

/// Boundary class of the transformed process, from F1/F2 in the transformed
/// coordinates; the regular subcase follows the behavior of h at l'.
BoundaryClass transformed_boundary(const HTransform& ht, Side side);

/// P^h_x[exp(-q zeta)] in closed form: psi_q(x) chi_q / x for the scale
/// transform, 0 for the (conservative) ground-state transform and
/// pi0 (1 - rho_q(x)) / (q h0(x)) for the zero transform with pi0 > 0.
double survival_laplace(const HTransform& ht, double x, double q, const EigenOptions& opts = {});

/// P^h_x[exp(-q T_y)] = r^h_q(x, y) / r^h_q(y, y). Throws HypothesisFailed
/// when h exceeds psi_{q+alpha} somewhere on the grid.
double transformed_hitting_laplace(const HTransform& ht, double x, double y, double q,
                                   const EigenOptions& opts = {});

/// Columns x, h, speed, scale, killing (cumulative) at the grid nodes.
void write_htransform_csv(std::ostream& out, const HTransform& ht, bool pretty = false);

}  // namespace hdiff
