#pragma once

#include <array>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "hdiff/measure.hpp"

namespace hdiff {

struct GridOptions {
    int cells = 2048;
    double ratio = 1.05;
    /// Truncation point when l' = inf; NaN selects it from the tail of m.
    double x_max = std::numeric_limits<double>::quiet_NaN();
    /// Relative gap kept below a finite l' where the density is singular.
    double end_gap = 1e-6;
};

/// Grid on [0, X] (X = l' or a truncation point) with the cell moments of dm
/// needed to integrate piecewise cubic Hermite functions exactly against the
/// density pieces. Atoms and piece breakpoints are always nodes.
class Discretization {
public:
    static constexpr int kQuadPoints = 8;

    static std::shared_ptr<const Discretization> build(const SpeedMeasure& m,
                                                       const GridOptions& opts = {});

    const SpeedMeasure& measure() const noexcept { return measure_; }
    std::span<const double> nodes() const noexcept { return x_; }
    std::span<const double> widths() const noexcept { return width_; }
    /// Atom mass sitting on each node (0 for most nodes).
    std::span<const double> node_mass() const noexcept { return node_mass_; }
    std::size_t cells() const noexcept { return width_.size(); }
    std::size_t size() const noexcept { return x_.size(); }
    double end() const noexcept { return x_.back(); }
    /// True when the grid stops short of l' (l' infinite or singular).
    bool truncated() const noexcept { return truncated_; }
    /// Length of the flat stretch beyond the grid end up to l (inf when l = inf).
    double extension_length() const noexcept { return measure_.l() - end(); }

    /// Cell moments: mass(j)[i] = int_cell B_j dm, lever(j)[i] = int_cell (x_{i+1} - y) B_j dm,
    /// with B_j the Hermite basis for coefficients (f_i, h d_i, f_{i+1}, h d_{i+1}).
    const double* mass(int j) const noexcept { return mass_[j].data(); }
    const double* lever(int j) const noexcept { return lever_[j].data(); }

    /// Gauss points of all cells (cell-major) and weights including the density.
    std::span<const double> quad_points() const noexcept { return qx_; }
    std::span<const double> quad_weights() const noexcept { return qw_; }
    /// Hermite basis values at the reference Gauss points: basis_at(j)[g].
    const std::array<double, kQuadPoints>& basis_at(int j) const noexcept { return qb_[j]; }

    /// Cell index containing x (clamped to the grid).
    std::size_t locate(double x) const;

private:
    Discretization(const SpeedMeasure& m, std::vector<double> nodes, bool truncated);

    SpeedMeasure measure_;
    std::vector<double> x_, width_, node_mass_;
    std::array<std::vector<double>, 4> mass_, lever_;
    std::vector<double> qx_, qw_;
    std::array<std::array<double, kQuadPoints>, 4> qb_{};
    bool truncated_;
};

using DiscretizationPtr = std::shared_ptr<const Discretization>;

/// Piecewise cubic Hermite function on a Discretization. Carries one-sided
/// D_s derivatives at every node (they differ across atoms).
class GridFunction {
public:
    enum class Tail { None, Linear, Constant };

    GridFunction() = default;
    GridFunction(DiscretizationPtr disc, std::vector<double> values, std::vector<double> dleft,
                 std::vector<double> dright, Tail tail = Tail::Linear);

    /// Samples closed forms; derivative defaults to a centered difference.
    static GridFunction from_function(DiscretizationPtr disc, const std::function<double(double)>& f,
                                      const std::function<double(double)>& df = nullptr,
                                      Tail tail = Tail::Linear);
    static GridFunction constant(DiscretizationPtr disc, double c);
    static GridFunction identity(DiscretizationPtr disc);

    double operator()(double x) const;
    /// Right derivative (left derivative at the grid end and beyond).
    double derivative(double x) const;

    const Discretization& disc() const noexcept { return *disc_; }
    const DiscretizationPtr& disc_ptr() const noexcept { return disc_; }
    std::span<const double> values() const noexcept { return v_; }
    std::span<const double> dleft() const noexcept { return dl_; }
    std::span<const double> dright() const noexcept { return dr_; }
    Tail tail() const noexcept { return tail_; }
    void set_tail(Tail t) noexcept { tail_ = t; }
    bool empty() const noexcept { return !disc_; }

    /// Values at all cell quadrature points (cell-major, kQuadPoints per cell).
    std::vector<double> at_quadrature() const;
    /// Hermite coefficient lanes (f_i, h d_i^+, f_{i+1}, h d_{i+1}^-) per cell.
    std::array<std::vector<double>, 4> coefficients() const;

    double sup_norm() const;

private:
    DiscretizationPtr disc_;
    std::vector<double> v_, dl_, dr_;
    Tail tail_ = Tail::Linear;
};

/// a*f + b*g + c, nodewise (values and derivatives).
GridFunction combine(double a, const GridFunction& f, double b, const GridFunction& g, double c = 0.0);
GridFunction scaled(double a, const GridFunction& f);

/// int_{(0, X]} f g dm over the grid (atoms at nodes included, the one at 0 excluded).
double integrate_product(const GridFunction& f, const GridFunction& g);
/// Cumulative int_{(0, x_k]} f g dm at every node.
std::vector<double> cumulative_product(const GridFunction& f, const GridFunction& g);

/// x -> int_{(0, x]} f g dm for arbitrary x, from nodal prefix sums plus a
/// Gauss rule on the partial cell. Constant beyond the grid end.
class ProductIntegral {
public:
    ProductIntegral(GridFunction f, GridFunction g);

    double operator()(double x) const;
    double total() const noexcept { return prefix_.back(); }
    /// int_{(a, b]} f g dm.
    double between(double a, double b) const { return (*this)(b) - (*this)(a); }

private:
    GridFunction f_, g_;
    std::vector<double> prefix_;
};

}  // namespace hdiff
