#pragma once

#include "ttpx/llm/chat_backend.hpp"
#include "ttpx/llm/embedder.hpp"

#include <chrono>
#include <string>

namespace ttpx::llm {

// Where an OpenAI-compatible HTTP service lives. The API key is read from the named
// environment variable at request time and never stored or logged.
struct RemoteEndpoint {
    std::string base_url;  // scheme://host[:port]
    std::string path;      // e.g. /v1/chat/completions
    std::string model;
    std::string api_key_env;
    std::chrono::milliseconds timeout{60000};
};

// POST {model, messages, temperature, max_tokens}; returns choices[0].message.content.
class RemoteChatBackend final : public ChatBackend {
public:
    explicit RemoteChatBackend(RemoteEndpoint endpoint);
    std::string send(const ChatRequest& request) override;
    std::string name() const override { return "remote:" + endpoint_.model; }

    // Request body exactly as sent (exposed for tests).
    static std::string build_body(const ChatRequest& request, const std::string& model);
    // Extracts the first choice's message content. Throws TransportError (non-transient).
    static std::string parse_response(const std::string& body);

private:
    RemoteEndpoint endpoint_;
};

// POST {model, input: [texts]}; vectors returned in input order (by "index" when present).
class RemoteEmbedder final : public Embedder {
public:
    RemoteEmbedder(RemoteEndpoint endpoint, std::size_t dim, int max_retries = 3);
    const EmbedderFingerprint& fingerprint() const override { return fingerprint_; }
    std::vector<Embedding> embed(const std::vector<std::string>& texts) override;

    static std::string build_body(const std::vector<std::string>& texts, const std::string& model);
    // Parses, reorders, checks dimension and normalizes. Throws TransportError.
    static std::vector<Embedding> parse_response(const std::string& body, std::size_t expected, std::size_t dim);

private:
    RemoteEndpoint endpoint_;
    EmbedderFingerprint fingerprint_;
    int max_retries_;
};

// Shared HTTP POST with JSON body. Maps connection failures, 429 and 5xx to transient
// TransportErrors and other non-2xx statuses to permanent ones.
std::string http_post_json(const RemoteEndpoint& endpoint, const std::string& body);

} // namespace ttpx::llm
