#pragma once

#include "ttpx/simd/kernels.hpp"

namespace ttpx::simd::detail {

inline constexpr std::size_t kLanes = 8;

double dot_scalar(const float* a, const float* b, std::size_t n);
double sum_squares_scalar(const float* a, std::size_t n);
void scale_scalar(float* a, std::size_t n, float factor);
void dot_rows_scalar(const float* query, const float* rows, std::size_t n_rows, std::size_t dim, double* out);

// Adds the products of a[i..n) into lane[0..] and applies the shared reduction.
double finish_tail(double* lane, const float* a, const float* b, std::size_t i, std::size_t n);

#if defined(TTPX_HAVE_AVX2)
extern const Kernels kAvx2Kernels;
#endif
#if defined(TTPX_HAVE_NEON)
extern const Kernels kNeonKernels;
#endif

} // namespace ttpx::simd::detail
