#include "kernels_internal.hpp"

#include <arm_neon.h>

namespace ttpx::simd::detail {

namespace {

double dot_neon(const float* a, const float* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0), acc1 = vdupq_n_f64(0.0);
    float64x2_t acc2 = vdupq_n_f64(0.0), acc3 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        float32x4_t a0 = vld1q_f32(a + i), a1 = vld1q_f32(a + i + 4);
        float32x4_t b0 = vld1q_f32(b + i), b1 = vld1q_f32(b + i + 4);
        acc0 = vaddq_f64(acc0, vmulq_f64(vcvt_f64_f32(vget_low_f32(a0)), vcvt_f64_f32(vget_low_f32(b0))));
        acc1 = vaddq_f64(acc1, vmulq_f64(vcvt_high_f64_f32(a0), vcvt_high_f64_f32(b0)));
        acc2 = vaddq_f64(acc2, vmulq_f64(vcvt_f64_f32(vget_low_f32(a1)), vcvt_f64_f32(vget_low_f32(b1))));
        acc3 = vaddq_f64(acc3, vmulq_f64(vcvt_high_f64_f32(a1), vcvt_high_f64_f32(b1)));
    }
    double lane[kLanes];
    vst1q_f64(lane, acc0);
    vst1q_f64(lane + 2, acc1);
    vst1q_f64(lane + 4, acc2);
    vst1q_f64(lane + 6, acc3);
    return finish_tail(lane, a, b, i, n);
}

double sum_squares_neon(const float* a, std::size_t n) { return dot_neon(a, a, n); }

void scale_neon(float* a, std::size_t n, float factor) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) vst1q_f32(a + i, vmulq_n_f32(vld1q_f32(a + i), factor));
    for (; i < n; ++i) a[i] *= factor;
}

void dot_rows_neon(const float* query, const float* rows, std::size_t n_rows, std::size_t dim, double* out) {
    for (std::size_t r = 0; r < n_rows; ++r) out[r] = dot_neon(query, rows + r * dim, dim);
}

} // namespace

const Kernels kNeonKernels{Isa::Neon, dot_neon, sum_squares_neon, scale_neon, dot_rows_neon};

} // namespace ttpx::simd::detail
