#include "hdiff/grid.hpp"

#include <algorithm>
#include <cmath>

#include "hdiff/error.hpp"
#include "hdiff/kernels.hpp"
#include "hdiff/quadrature.hpp"

namespace hdiff {

namespace {

// Hermite basis on [0, 1] for coefficients (f0, h d0, f1, h d1).
std::array<double, 4> hermite(double t) {
    const double t2 = t * t, t3 = t2 * t;
    return {2 * t3 - 3 * t2 + 1, t3 - 2 * t2 + t, -2 * t3 + 3 * t2, t3 - t2};
}

// d/dt of the basis above.
std::array<double, 4> hermite_dt(double t) {
    const double t2 = t * t;
    return {6 * t2 - 6 * t, 3 * t2 - 4 * t + 1, -6 * t2 + 6 * t, 3 * t2 - 2 * t};
}

double auto_truncation(const SpeedMeasure& m) {
    if (m.total_mass() == kInf) return 40.0;
    const double total = m.total_mass();
    double x = 1.0;
    while (x < 1e6 && m.tail_mass(x) > 1e-8 * total) x *= 2.0;
    return x;
}

// Widths min(cap, wl r^i, wr r^(n-1-i)) with cap chosen so they sum to len.
std::vector<double> graded_widths(int n, double len, double ratio, double wl, double wr) {
    std::vector<double> w(n);
    auto fill = [&](double cap) {
        double sum = 0.0;
        double gl = wl;
        for (int i = 0; i < n; ++i) {
            w[i] = std::min(cap, gl);
            gl *= ratio;
        }
        double gr = wr;
        for (int i = n - 1; i >= 0; --i) {
            w[i] = std::min(w[i], gr);
            gr *= ratio;
            sum += w[i];
        }
        return sum;
    };
    double lo = 0.0, hi = len;
    if (fill(hi) < len) {
        // Grading too strong for this many cells: fall back to uniform.
        std::fill(w.begin(), w.end(), len / n);
        return w;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (fill(mid) < len ? lo : hi) = mid;
    }
    const double sum = fill(hi);
    for (double& v : w) v *= len / sum;
    return w;
}

}  // namespace

std::shared_ptr<const Discretization> Discretization::build(const SpeedMeasure& m,
                                                            const GridOptions& opts) {
    if (opts.cells < 4) throw InputError("grid needs at least 4 cells");
    if (!(opts.ratio >= 1.0)) throw InputError("grid ratio must be >= 1");
    double end = m.lprime();
    bool truncated = false;
    double wr = kInf;
    if (!m.lprime_finite()) {
        end = std::isnan(opts.x_max) ? auto_truncation(m) : opts.x_max;
        if (!(end > 0.0)) throw InputError("x_max must be positive");
        truncated = true;
    } else if (m.singular_at_lprime()) {
        const double gap = opts.end_gap * m.lprime();
        end = m.lprime() - gap;
        truncated = true;
        wr = 0.5 * gap;
    } else {
        wr = 1e-5 * end;
    }
    const double wl = 1e-5 * std::min(end, 1.0);
    const auto w = graded_widths(opts.cells, end, opts.ratio, wl, wr);
    std::vector<double> x(1, 0.0);
    for (double v : w) x.push_back(x.back() + v);
    x.back() = end;

    // Make breakpoints nodes, snapping the nearest node when it is close.
    for (double b : m.breakpoints()) {
        if (!(b > 0.0 && b < end)) continue;
        auto it = std::lower_bound(x.begin(), x.end(), b);
        const std::size_t k = static_cast<std::size_t>(it - x.begin());
        if (*it == b) continue;
        const double left = x[k - 1], right = x[k];
        const double near = (b - left < right - b) ? left : right;
        const std::size_t nk = (near == left) ? k - 1 : k;
        const double cell = right - left;
        const bool movable = nk != 0 && nk != x.size() - 1 &&
                             std::abs(near - b) < 0.25 * cell;
        if (movable) {
            bool is_break = false;
            for (double ob : m.breakpoints()) is_break |= (ob == near);
            if (!is_break) {
                x[nk] = b;
                continue;
            }
        }
        x.insert(it, b);
    }
    return std::shared_ptr<const Discretization>(new Discretization(m, std::move(x), truncated));
}

Discretization::Discretization(const SpeedMeasure& m, std::vector<double> nodes, bool truncated)
    : measure_(m), x_(std::move(nodes)), truncated_(truncated) {
    const std::size_t n = x_.size() - 1;
    width_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        width_[i] = x_[i + 1] - x_[i];
        if (!(width_[i] > 0.0)) throw GridTooCoarse("grid nodes are not strictly increasing");
    }
    node_mass_.assign(x_.size(), 0.0);
    for (const auto& a : measure_.atoms()) {
        auto it = std::lower_bound(x_.begin(), x_.end(), a.at);
        if (it != x_.end() && *it == a.at) node_mass_[it - x_.begin()] = a.mass;
    }
    for (auto& v : mass_) v.assign(n, 0.0);
    for (auto& v : lever_) v.assign(n, 0.0);

    const auto& rule = gauss_legendre(kQuadPoints);
    for (int g = 0; g < kQuadPoints; ++g) {
        const auto b = hermite(rule.nodes[g]);
        for (int j = 0; j < 4; ++j) qb_[j][g] = b[j];
    }
    qx_.resize(n * kQuadPoints);
    qw_.resize(n * kQuadPoints);

    const auto& pieces = measure_.pieces();
    std::size_t p = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = x_[i], h = width_[i], mid = a + 0.5 * h;
        while (p + 1 < pieces.size() && !(mid < pieces[p].to)) ++p;
        const auto& piece = pieces[p];
        const auto& mr = gauss_legendre(piece.is_power() ? 16 : 8);
        for (std::size_t g = 0; g < mr.nodes.size(); ++g) {
            const double t = mr.nodes[g], y = a + t * h;
            const double wt = mr.weights[g] * h * piece.eval(y);
            const auto b = hermite(t);
            for (int j = 0; j < 4; ++j) {
                mass_[j][i] += wt * b[j];
                lever_[j][i] += wt * (x_[i + 1] - y) * b[j];
            }
        }
        for (int g = 0; g < kQuadPoints; ++g) {
            const double y = a + rule.nodes[g] * h;
            qx_[i * kQuadPoints + g] = y;
            qw_[i * kQuadPoints + g] = rule.weights[g] * h * piece.eval(y);
        }
    }
}

std::size_t Discretization::locate(double x) const {
    if (x <= x_.front()) return 0;
    if (x >= x_.back()) return cells() - 1;
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    return static_cast<std::size_t>(it - x_.begin()) - 1;
}

GridFunction::GridFunction(DiscretizationPtr disc, std::vector<double> values,
                           std::vector<double> dleft, std::vector<double> dright, Tail tail)
    : disc_(std::move(disc)), v_(std::move(values)), dl_(std::move(dleft)), dr_(std::move(dright)),
      tail_(tail) {
    const std::size_t n = disc_->size();
    if (v_.size() != n || dl_.size() != n || dr_.size() != n)
        throw Precondition("grid function size does not match its grid");
}

GridFunction GridFunction::from_function(DiscretizationPtr disc,
                                         const std::function<double(double)>& f,
                                         const std::function<double(double)>& df, Tail tail) {
    const auto x = disc->nodes();
    std::vector<double> v(x.size()), d(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        v[i] = f(x[i]);
        if (df) {
            d[i] = df(x[i]);
        } else {
            const double e = 1e-6 * std::max(1.0, std::abs(x[i]));
            const double lo = std::max(0.0, x[i] - e);
            d[i] = (f(x[i] + e) - f(lo)) / (x[i] + e - lo);
        }
    }
    auto dl = d;
    return GridFunction(std::move(disc), std::move(v), std::move(dl), std::move(d), tail);
}

GridFunction GridFunction::constant(DiscretizationPtr disc, double c) {
    const std::size_t n = disc->size();
    return GridFunction(std::move(disc), std::vector<double>(n, c), std::vector<double>(n, 0.0),
                        std::vector<double>(n, 0.0), Tail::Constant);
}

GridFunction GridFunction::identity(DiscretizationPtr disc) {
    auto x = disc->nodes();
    const std::size_t n = x.size();
    return GridFunction(disc, std::vector<double>(x.begin(), x.end()), std::vector<double>(n, 1.0),
                        std::vector<double>(n, 1.0), Tail::Linear);
}

double GridFunction::operator()(double x) const {
    const auto& d = *disc_;
    if (x < 0.0) throw OutOfDomain("evaluation point below 0");
    const double end = d.end();
    if (x >= end) {
        if (x == end) return v_.back();
        switch (tail_) {
            case Tail::Linear: return v_.back() + dr_.back() * (x - end);
            case Tail::Constant: return v_.back();
            case Tail::None: throw OutOfDomain("evaluation point beyond the grid");
        }
    }
    const std::size_t i = d.locate(x);
    const double h = d.widths()[i];
    const double t = (x - d.nodes()[i]) / h;
    const auto b = hermite(t);
    return v_[i] * b[0] + h * dr_[i] * b[1] + v_[i + 1] * b[2] + h * dl_[i + 1] * b[3];
}

double GridFunction::derivative(double x) const {
    const auto& d = *disc_;
    if (x < 0.0) throw OutOfDomain("evaluation point below 0");
    if (x >= d.end()) {
        if (tail_ == Tail::Constant) return x == d.end() ? dl_.back() : 0.0;
        if (tail_ == Tail::None && x > d.end()) throw OutOfDomain("evaluation point beyond the grid");
        return x == d.end() ? dl_.back() : dr_.back();
    }
    const std::size_t i = d.locate(x);
    if (x == d.nodes()[i]) return dr_[i];
    const double h = d.widths()[i];
    const double t = (x - d.nodes()[i]) / h;
    const auto b = hermite_dt(t);
    return (v_[i] * b[0] + v_[i + 1] * b[2]) / h + dr_[i] * b[1] + dl_[i + 1] * b[3];
}

std::vector<double> GridFunction::at_quadrature() const {
    const auto& d = *disc_;
    constexpr int G = Discretization::kQuadPoints;
    const std::size_t n = d.cells();
    std::vector<double> out(n * G);
    const auto h = d.widths();
    const auto& b0 = d.basis_at(0);
    const auto& b1 = d.basis_at(1);
    const auto& b2 = d.basis_at(2);
    const auto& b3 = d.basis_at(3);
    for (std::size_t i = 0; i < n; ++i) {
        const double c0 = v_[i], c1 = h[i] * dr_[i], c2 = v_[i + 1], c3 = h[i] * dl_[i + 1];
        for (int g = 0; g < G; ++g)
            out[i * G + g] = c0 * b0[g] + c1 * b1[g] + c2 * b2[g] + c3 * b3[g];
    }
    return out;
}

std::array<std::vector<double>, 4> GridFunction::coefficients() const {
    const std::size_t n = disc_->cells();
    const auto h = disc_->widths();
    std::array<std::vector<double>, 4> c;
    for (auto& v : c) v.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        c[0][i] = v_[i];
        c[1][i] = h[i] * dr_[i];
        c[2][i] = v_[i + 1];
        c[3][i] = h[i] * dl_[i + 1];
    }
    return c;
}

double GridFunction::sup_norm() const {
    double s = 0.0;
    for (double v : v_) s = std::max(s, std::abs(v));
    return s;
}

GridFunction combine(double a, const GridFunction& f, double b, const GridFunction& g, double c) {
    if (f.disc_ptr() != g.disc_ptr()) throw Precondition("grid functions live on different grids");
    const std::size_t n = f.values().size();
    std::vector<double> v(n), dl(n), dr(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = a * f.values()[i] + b * g.values()[i] + c;
        dl[i] = a * f.dleft()[i] + b * g.dleft()[i];
        dr[i] = a * f.dright()[i] + b * g.dright()[i];
    }
    auto tail = f.tail() == g.tail() ? f.tail() : GridFunction::Tail::Linear;
    return GridFunction(f.disc_ptr(), std::move(v), std::move(dl), std::move(dr), tail);
}

GridFunction scaled(double a, const GridFunction& f) { return combine(a, f, 0.0, f); }

double integrate_product(const GridFunction& f, const GridFunction& g) {
    if (f.disc_ptr() != g.disc_ptr()) throw Precondition("grid functions live on different grids");
    const auto& d = f.disc();
    const auto fq = f.at_quadrature(), gq = g.at_quadrature();
    double sum = kernels::weighted_dot()(fq.size(), d.quad_weights().data(), fq.data(), gq.data());
    const auto mass = d.node_mass();
    for (std::size_t k = 1; k < mass.size(); ++k)
        if (mass[k] > 0.0) sum += mass[k] * f.values()[k] * g.values()[k];
    return sum;
}

std::vector<double> cumulative_product(const GridFunction& f, const GridFunction& g) {
    if (f.disc_ptr() != g.disc_ptr()) throw Precondition("grid functions live on different grids");
    const auto& d = f.disc();
    constexpr int G = Discretization::kQuadPoints;
    const auto fq = f.at_quadrature(), gq = g.at_quadrature();
    const auto w = d.quad_weights();
    const auto mass = d.node_mass();
    std::vector<double> out(d.size(), 0.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < d.cells(); ++i) {
        double cell = 0.0;
        for (int k = 0; k < G; ++k) cell += w[i * G + k] * fq[i * G + k] * gq[i * G + k];
        acc += cell + mass[i + 1] * f.values()[i + 1] * g.values()[i + 1];
        out[i + 1] = acc;
    }
    return out;
}

ProductIntegral::ProductIntegral(GridFunction f, GridFunction g)
    : f_(std::move(f)), g_(std::move(g)), prefix_(cumulative_product(f_, g_)) {}

double ProductIntegral::operator()(double x) const {
    const auto& d = f_.disc();
    if (x <= 0.0) return 0.0;
    if (x >= d.end()) return prefix_.back();
    const std::size_t i = d.locate(x);
    const double a = d.nodes()[i];
    if (x == a) return prefix_[i];
    const auto& m = d.measure();
    const double part = gauss_integrate(
        [&](double y) { return f_(y) * g_(y) * m.density(y); }, a, x, Discretization::kQuadPoints);
    return prefix_[i] + part;
}

}  // namespace hdiff
