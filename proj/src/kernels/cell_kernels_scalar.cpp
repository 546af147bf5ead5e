#include "hdiff/kernels.hpp"

namespace hdiff::kernels {

void contract_scalar(std::size_t n, const CellLanes& coef, const CellLanes& mass,
                     const CellLanes& lever, double* flux, double* value) {
    const auto& c = coef.lane;
    const auto& a = mass.lane;
    const auto& w = lever.lane;
    for (std::size_t i = 0; i < n; ++i) {
        flux[i] = c[0][i] * a[0][i] + c[1][i] * a[1][i] + c[2][i] * a[2][i] + c[3][i] * a[3][i];
        value[i] = c[0][i] * w[0][i] + c[1][i] * w[1][i] + c[2][i] * w[2][i] + c[3][i] * w[3][i];
    }
}

double weighted_dot_scalar(std::size_t n, const double* w, const double* a, const double* b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += w[i] * a[i] * b[i];
    return sum;
}

}  // namespace hdiff::kernels
