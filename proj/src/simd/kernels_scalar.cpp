#include "kernels_internal.hpp"

namespace ttpx::simd::detail {

namespace {

double reduce_lanes(const double* lane) {
    double t0 = lane[0] + lane[4];
    double t1 = lane[1] + lane[5];
    double t2 = lane[2] + lane[6];
    double t3 = lane[3] + lane[7];
    return (t0 + t1) + (t2 + t3);
}

} // namespace

double dot_scalar(const float* a, const float* b, std::size_t n) {
    double lane[kLanes] = {};
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes)
        for (std::size_t j = 0; j < kLanes; ++j)
            lane[j] += static_cast<double>(a[i + j]) * static_cast<double>(b[i + j]);
    for (std::size_t j = 0; i < n; ++i, ++j) lane[j] += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    return reduce_lanes(lane);
}

double sum_squares_scalar(const float* a, std::size_t n) { return dot_scalar(a, a, n); }

void scale_scalar(float* a, std::size_t n, float factor) {
    for (std::size_t i = 0; i < n; ++i) a[i] *= factor;
}

void dot_rows_scalar(const float* query, const float* rows, std::size_t n_rows, std::size_t dim, double* out) {
    for (std::size_t r = 0; r < n_rows; ++r) out[r] = dot_scalar(query, rows + r * dim, dim);
}

double finish_tail(double* lane, const float* a, const float* b, std::size_t i, std::size_t n) {
    for (std::size_t j = 0; i < n; ++i, ++j) lane[j] += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    return reduce_lanes(lane);
}

} // namespace ttpx::simd::detail
