#pragma once

#include <optional>

#include "hdiff/classify.hpp"
#include "hdiff/grid.hpp"

namespace hdiff {

struct EigenOptions {
    double tol = 1e-10;
    int max_terms = 200;
};

/// phi_q, psi_q (increasing solutions with phi(0) = 1, D_s phi(0) = 0 and
/// psi(0) = 0, D_s psi(0) = 1), the decreasing solution rho_q and H(q).
struct EigenSystem {
    double q = 0.0;
    GridFunction phi, psi, rho;
    /// int_0^l phi^-2 dx (q > 0); the boundary ratio route for q <= 0.
    double H = 0.0;
    /// lim psi/phi at the right end, an independent route to H.
    double H_ratio = 0.0;
    /// Sup norm of the last series term kept.
    double truncation_error = 0.0;
};

struct ZeroResolvent {
    double pi0 = 0.0;
    GridFunction g;   // pi0 * J1
    GridFunction h0;  // s - g
};

struct GroundState {
    double gamma_star = 0.0;
    GridFunction h_star;
};

/// Jf(x) = int_0^x dy int_{(0,y]} f dm on the grid of f.
GridFunction apply_J(const GridFunction& f);

/// Solves f = a + b s + q J f by the Neumann series, restarted on segments
/// where |q| J1 stays below one.
GridFunction solve_volterra(const DiscretizationPtr& disc, double q, double a, double b,
                            const EigenOptions& opts = {}, double* truncation_error = nullptr);

EigenSystem solve_eigen(const DiscretizationPtr& disc, double q, const EigenOptions& opts = {});

/// Throws CrossCheckFailed when pi0 = 1/m(inf) disagrees with q H(q) for small q.
ZeroResolvent zero_resolvent(const DiscretizationPtr& disc, const EigenOptions& opts = {});

/// h_q = H(q) (1 - rho_q); requires q > 0.
GridFunction h_q(const EigenSystem& es);
GridFunction h_q(const ZeroResolvent& zr, const EigenSystem& es);

/// Ground state of the process killed at 0. `right` defaults to the
/// classification of l'.
GroundState ground_state(const DiscretizationPtr& disc, const EigenOptions& opts = {},
                         std::optional<BoundaryKind> right = std::nullopt);

/// Max over interior nodes of |D_m D_s f - lambda f| / (|lambda| sup|f|), by
/// finite differences on the nodal values.
double generator_residual(const GridFunction& f, double lambda);

}  // namespace hdiff
