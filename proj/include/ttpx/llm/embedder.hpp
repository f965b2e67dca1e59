#pragma once

#include "ttpx/embedding.hpp"

#include <string>
#include <vector>

namespace ttpx::llm {

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual const EmbedderFingerprint& fingerprint() const = 0;
    // Order-preserving; every vector has fingerprint().dim components and unit L2 norm.
    // Throws ValidationError on an empty text, TransportError for remote failures.
    virtual std::vector<Embedding> embed(const std::vector<std::string>& texts) = 0;

    Embedding embed_one(const std::string& text) { return embed({text}).front(); }
};

// Offline embedder: lowercase alphanumeric tokens, unigram and bigram features hashed
// (FNV-1a) into `dim` signed buckets, then L2-normalized. Deterministic across platforms.
class HashingEmbedder final : public Embedder {
public:
    explicit HashingEmbedder(std::size_t dim = 256);
    const EmbedderFingerprint& fingerprint() const override { return fingerprint_; }
    std::vector<Embedding> embed(const std::vector<std::string>& texts) override;

    // Token stream used for features (exposed for tests).
    static std::vector<std::string> tokenize(std::string_view text);

private:
    Embedding embed_text(const std::string& text) const;
    EmbedderFingerprint fingerprint_;
};

} // namespace ttpx::llm
