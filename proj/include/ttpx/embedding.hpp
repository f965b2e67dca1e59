#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace ttpx {

// Dense embedding; stored vectors are L2-normalized.
using Embedding = std::vector<float>;

// Identifies the provider that produced a set of embeddings. Memory files record it so a
// store is never queried with vectors from a different embedding space.
struct EmbedderFingerprint {
    std::string name;
    std::size_t dim = 0;

    bool operator==(const EmbedderFingerprint&) const = default;
};

inline constexpr double kUnitNormTolerance = 1e-6;

} // namespace ttpx
