#include "ttpx/llm/embedder.hpp"

#include "ttpx/errors.hpp"
#include "ttpx/io.hpp"
#include "ttpx/simd/kernels.hpp"

#include <cctype>

namespace ttpx::llm {

namespace {

void add_feature(Embedding& v, std::string_view feature) {
    std::uint64_t h = io::fnv1a64(feature);
    std::size_t bucket = static_cast<std::size_t>(h % v.size());
    v[bucket] += (h >> 63) ? -1.0f : 1.0f;
}

} // namespace

HashingEmbedder::HashingEmbedder(std::size_t dim) : fingerprint_{"hashing-fnv1a-unibigram-v1", dim} {
    if (dim == 0) throw ValidationError("hashing embedder dimension must be positive");
}

std::vector<std::string> HashingEmbedder::tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c) || c >= 0x80) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

Embedding HashingEmbedder::embed_text(const std::string& text) const {
    if (text.empty()) throw ValidationError("cannot embed an empty text");
    Embedding v(fingerprint_.dim, 0.0f);
    auto tokens = tokenize(text);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        add_feature(v, "u:" + tokens[i]);
        if (i + 1 < tokens.size()) add_feature(v, "b:" + tokens[i] + " " + tokens[i + 1]);
    }
    // Punctuation-only text, or features that cancelled out: fall back to the raw bytes.
    if (!simd::normalize(v)) {
        add_feature(v, "r:" + text);
        simd::normalize(v);
    }
    return v;
}

std::vector<Embedding> HashingEmbedder::embed(const std::vector<std::string>& texts) {
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_text(t));
    return out;
}

} // namespace ttpx::llm
