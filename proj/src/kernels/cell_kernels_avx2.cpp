#include <immintrin.h>

#include "hdiff/kernels.hpp"

namespace hdiff::kernels {

void contract_avx2(std::size_t n, const CellLanes& coef, const CellLanes& mass,
                   const CellLanes& lever, double* flux, double* value) {
    const auto& c = coef.lane;
    const auto& a = mass.lane;
    const auto& w = lever.lane;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d c0 = _mm256_loadu_pd(c[0] + i);
        const __m256d c1 = _mm256_loadu_pd(c[1] + i);
        const __m256d c2 = _mm256_loadu_pd(c[2] + i);
        const __m256d c3 = _mm256_loadu_pd(c[3] + i);
        __m256d f = _mm256_mul_pd(c0, _mm256_loadu_pd(a[0] + i));
        f = _mm256_fmadd_pd(c1, _mm256_loadu_pd(a[1] + i), f);
        f = _mm256_fmadd_pd(c2, _mm256_loadu_pd(a[2] + i), f);
        f = _mm256_fmadd_pd(c3, _mm256_loadu_pd(a[3] + i), f);
        __m256d v = _mm256_mul_pd(c0, _mm256_loadu_pd(w[0] + i));
        v = _mm256_fmadd_pd(c1, _mm256_loadu_pd(w[1] + i), v);
        v = _mm256_fmadd_pd(c2, _mm256_loadu_pd(w[2] + i), v);
        v = _mm256_fmadd_pd(c3, _mm256_loadu_pd(w[3] + i), v);
        _mm256_storeu_pd(flux + i, f);
        _mm256_storeu_pd(value + i, v);
    }
    for (; i < n; ++i) {
        flux[i] = c[0][i] * a[0][i] + c[1][i] * a[1][i] + c[2][i] * a[2][i] + c[3][i] * a[3][i];
        value[i] = c[0][i] * w[0][i] + c[1][i] * w[1][i] + c[2][i] * w[2][i] + c[3][i] * w[3][i];
    }
}

double weighted_dot_avx2(std::size_t n, const double* w, const double* a, const double* b) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256d p0 = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(a + i));
        const __m256d p1 = _mm256_mul_pd(_mm256_loadu_pd(w + i + 4), _mm256_loadu_pd(a + i + 4));
        acc0 = _mm256_fmadd_pd(p0, _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(p1, _mm256_loadu_pd(b + i + 4), acc1);
    }
    const __m256d acc = _mm256_add_pd(acc0, acc1);
    const __m128d lo = _mm256_castpd256_pd128(acc);
    const __m128d hi = _mm256_extractf128_pd(acc, 1);
    const __m128d s2 = _mm_add_pd(lo, hi);
    double sum = _mm_cvtsd_f64(_mm_add_sd(s2, _mm_unpackhi_pd(s2, s2)));
    for (; i < n; ++i) sum += w[i] * a[i] * b[i];
    return sum;
}

}  // namespace hdiff::kernels
