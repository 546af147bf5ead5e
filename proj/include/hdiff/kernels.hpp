#pragma once

#include <array>
#include <cstddef>
#include <string_view>

namespace hdiff::kernels {

/// Structure-of-arrays view of per-cell data: four lanes of length n.
struct CellLanes {
    std::array<const double*, 4> lane;
};

/// flux[i]  = sum_j coef.lane[j][i] * mass.lane[j][i]
/// value[i] = sum_j coef.lane[j][i] * lever.lane[j][i]
using ContractFn = void (*)(std::size_t n, const CellLanes& coef, const CellLanes& mass,
                            const CellLanes& lever, double* flux, double* value);

/// sum_i w[i] * a[i] * b[i]
using WeightedDotFn = double (*)(std::size_t n, const double* w, const double* a, const double* b);

void contract_scalar(std::size_t n, const CellLanes& coef, const CellLanes& mass,
                     const CellLanes& lever, double* flux, double* value);
double weighted_dot_scalar(std::size_t n, const double* w, const double* a, const double* b);

#if defined(HDIFF_HAVE_AVX2)
void contract_avx2(std::size_t n, const CellLanes& coef, const CellLanes& mass,
                   const CellLanes& lever, double* flux, double* value);
double weighted_dot_avx2(std::size_t n, const double* w, const double* a, const double* b);
#endif

enum class Isa { Scalar, Avx2 };

/// Best instruction set supported by this CPU and build.
Isa detected_isa();
/// Currently selected implementation (detected unless overridden).
Isa active_isa();
/// Override selection; requesting Avx2 on unsupported hardware falls back to Scalar.
void select_isa(Isa isa);
std::string_view to_string(Isa isa);

ContractFn contract();
WeightedDotFn weighted_dot();

}  // namespace hdiff::kernels
