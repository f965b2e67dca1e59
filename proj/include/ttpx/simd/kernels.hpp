#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace ttpx::simd {

// Instruction sets with a kernel implementation.
enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa);

// Function table for the embedding arithmetic. Every variant accumulates float products
// in double precision across 8 fixed lanes (lane = index % 8) and reduces them as
//   t[j] = lane[j] + lane[j + 4];  result = (t[0] + t[1]) + (t[2] + t[3])
// A float*float product is exact in double, so all variants return bit-identical results.
struct Kernels {
    Isa isa;
    double (*dot)(const float* a, const float* b, std::size_t n);
    double (*sum_squares)(const float* a, std::size_t n);
    void (*scale)(float* a, std::size_t n, float factor);
    // out[r] = dot(query, rows + r * dim) for r in [0, n_rows)
    void (*dot_rows)(const float* query, const float* rows, std::size_t n_rows, std::size_t dim, double* out);
};

const Kernels& scalar_kernels();
// Kernels for `isa`, or nullptr when this build/CPU cannot run it.
const Kernels* kernels_for(Isa isa);
std::vector<Isa> available_isas();

// Best available variant, chosen once. The TTPX_SIMD environment variable
// (scalar | avx2 | neon) forces a specific variant when available.
const Kernels& active_kernels();

// Convenience wrappers over active_kernels().
double dot(std::span<const float> a, std::span<const float> b);
double l2_norm(std::span<const float> a);
// Scales `v` to unit L2 norm. Returns false (leaving v untouched) for a zero vector.
bool normalize(std::span<float> v);

} // namespace ttpx::simd
