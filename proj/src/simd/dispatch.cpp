#include "kernels_internal.hpp"

#include "ttpx/errors.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

namespace ttpx::simd {

namespace {

const Kernels kScalar{Isa::Scalar, detail::dot_scalar, detail::sum_squares_scalar, detail::scale_scalar,
                      detail::dot_rows_scalar};

bool cpu_has_avx2() {
#if defined(TTPX_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

const Kernels& select_kernels() {
    if (const char* forced = std::getenv("TTPX_SIMD")) {
        std::string want(forced);
        for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon})
            if (want == to_string(isa))
                if (const Kernels* k = kernels_for(isa)) return *k;
    }
    for (Isa isa : {Isa::Avx2, Isa::Neon})
        if (const Kernels* k = kernels_for(isa)) return *k;
    return kScalar;
}

} // namespace

std::string_view to_string(Isa isa) {
    switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
    }
    return "unknown";
}

const Kernels& scalar_kernels() { return kScalar; }

const Kernels* kernels_for(Isa isa) {
    switch (isa) {
    case Isa::Scalar: return &kScalar;
    case Isa::Avx2:
#if defined(TTPX_HAVE_AVX2)
        if (cpu_has_avx2()) return &detail::kAvx2Kernels;
#endif
        return nullptr;
    case Isa::Neon:
#if defined(TTPX_HAVE_NEON)
        return &detail::kNeonKernels;
#else
        return nullptr;
#endif
    }
    return nullptr;
}

std::vector<Isa> available_isas() {
    std::vector<Isa> out;
    for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon})
        if (kernels_for(isa)) out.push_back(isa);
    return out;
}

const Kernels& active_kernels() {
    static const Kernels& chosen = select_kernels();
    return chosen;
}

double dot(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) throw ValidationError("dot: dimension mismatch");
    return active_kernels().dot(a.data(), b.data(), a.size());
}

double l2_norm(std::span<const float> a) { return std::sqrt(active_kernels().sum_squares(a.data(), a.size())); }

bool normalize(std::span<float> v) {
    double norm = l2_norm(v);
    if (norm == 0.0 || !std::isfinite(norm)) return false;
    active_kernels().scale(v.data(), v.size(), static_cast<float>(1.0 / norm));
    return true;
}

} // namespace ttpx::simd
