// Compiled with -mavx2; only reached after a runtime CPU check.
#include "kernels_internal.hpp"

#include <immintrin.h>

namespace ttpx::simd::detail {

namespace {

double dot_avx2(const float* a, const float* b, std::size_t n) {
    __m256d lo = _mm256_setzero_pd();
    __m256d hi = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        __m256 va = _mm256_loadu_ps(a + i);
        __m256 vb = _mm256_loadu_ps(b + i);
        __m256d a_lo = _mm256_cvtps_pd(_mm256_castps256_ps128(va));
        __m256d a_hi = _mm256_cvtps_pd(_mm256_extractf128_ps(va, 1));
        __m256d b_lo = _mm256_cvtps_pd(_mm256_castps256_ps128(vb));
        __m256d b_hi = _mm256_cvtps_pd(_mm256_extractf128_ps(vb, 1));
        lo = _mm256_add_pd(lo, _mm256_mul_pd(a_lo, b_lo));
        hi = _mm256_add_pd(hi, _mm256_mul_pd(a_hi, b_hi));
    }
    alignas(32) double lane[kLanes];
    _mm256_store_pd(lane, lo);
    _mm256_store_pd(lane + 4, hi);
    return finish_tail(lane, a, b, i, n);
}

double sum_squares_avx2(const float* a, std::size_t n) { return dot_avx2(a, a, n); }

void scale_avx2(float* a, std::size_t n, float factor) {
    const __m256 f = _mm256_set1_ps(factor);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) _mm256_storeu_ps(a + i, _mm256_mul_ps(_mm256_loadu_ps(a + i), f));
    for (; i < n; ++i) a[i] *= factor;
}

void dot_rows_avx2(const float* query, const float* rows, std::size_t n_rows, std::size_t dim, double* out) {
    for (std::size_t r = 0; r < n_rows; ++r) out[r] = dot_avx2(query, rows + r * dim, dim);
}

} // namespace

const Kernels kAvx2Kernels{Isa::Avx2, dot_avx2, sum_squares_avx2, scale_avx2, dot_rows_avx2};

} // namespace ttpx::simd::detail
