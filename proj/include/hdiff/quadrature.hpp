#pragma once

#include <span>
#include <vector>

namespace hdiff {

/// Gauss-Legendre rule mapped to [0, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Cached rule with n points (n >= 1). Thread-safe after first use.
const GaussRule& gauss_legendre(int n);

/// Integrate f over [a, b] with the n-point rule.
template <class F>
double gauss_integrate(F&& f, double a, double b, int n = 16) {
    const GaussRule& rule = gauss_legendre(n);
    const double h = b - a;
    double sum = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k)
        sum += rule.weights[k] * f(a + h * rule.nodes[k]);
    return sum * h;
}

}  // namespace hdiff
