#include "ttpx/llm/remote.hpp"

#include "ttpx/simd/kernels.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdlib>
#include <thread>

namespace ttpx::llm {

using nlohmann::json;

std::string http_post_json(const RemoteEndpoint& endpoint, const std::string& body) {
    httplib::Client client(endpoint.base_url);
    if (!client.is_valid()) throw TransportError("invalid endpoint URL '" + endpoint.base_url + "'", false);
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(endpoint.timeout);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(endpoint.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers headers;
    if (!endpoint.api_key_env.empty()) {
        if (const char* key = std::getenv(endpoint.api_key_env.c_str()); key && *key)
            headers.emplace("Authorization", std::string("Bearer ") + key);
    }
    auto res = client.Post(endpoint.path, headers, body, "application/json");
    if (!res) throw TransportError("HTTP request failed: " + httplib::to_string(res.error()), true);
    if (res->status == 429 || res->status >= 500)
        throw TransportError("HTTP " + std::to_string(res->status) + " from " + endpoint.path, true);
    if (res->status < 200 || res->status >= 300)
        throw TransportError("HTTP " + std::to_string(res->status) + " from " + endpoint.path + ": " +
                                 res->body.substr(0, 512),
                             false);
    return res->body;
}

RemoteChatBackend::RemoteChatBackend(RemoteEndpoint endpoint) : endpoint_(std::move(endpoint)) {}

std::string RemoteChatBackend::build_body(const ChatRequest& request, const std::string& model) {
    json body;
    body["model"] = model.empty() ? request.params.model_name : model;
    body["messages"] = json::array();
    for (const auto& m : request.messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});
    body["temperature"] = request.params.temperature;
    body["max_tokens"] = request.params.max_output_tokens;
    return body.dump();
}

std::string RemoteChatBackend::parse_response(const std::string& body) {
    try {
        auto doc = json::parse(body);
        const auto& content = doc.at("choices").at(0).at("message").at("content");
        if (!content.is_string()) throw TransportError("chat response content is not a string", false);
        return content.get<std::string>();
    } catch (const json::exception& e) {
        throw TransportError(std::string("unexpected chat response: ") + e.what(), false);
    }
}

std::string RemoteChatBackend::send(const ChatRequest& request) {
    auto endpoint = endpoint_;
    endpoint.timeout = request.params.request_timeout;
    return parse_response(http_post_json(endpoint, build_body(request, endpoint_.model)));
}

RemoteEmbedder::RemoteEmbedder(RemoteEndpoint endpoint, std::size_t dim, int max_retries)
    : endpoint_(std::move(endpoint)), fingerprint_{"remote:" + endpoint_.model, dim}, max_retries_(max_retries) {
    if (dim == 0) throw ValidationError("remote embedder dimension must be positive");
}

std::string RemoteEmbedder::build_body(const std::vector<std::string>& texts, const std::string& model) {
    json body;
    body["model"] = model;
    body["input"] = texts;
    return body.dump();
}

std::vector<Embedding> RemoteEmbedder::parse_response(const std::string& body, std::size_t expected,
                                                      std::size_t dim) {
    std::vector<Embedding> out(expected);
    try {
        auto doc = json::parse(body);
        const auto& data = doc.at("data");
        if (!data.is_array() || data.size() != expected)
            throw TransportError("embedding response has " + std::to_string(data.size()) + " vectors, expected " +
                                     std::to_string(expected),
                                 false);
        for (std::size_t i = 0; i < data.size(); ++i) {
            std::size_t slot = data[i].contains("index") ? data[i]["index"].get<std::size_t>() : i;
            if (slot >= expected || !out[slot].empty())
                throw TransportError("embedding response has an invalid index", false);
            auto v = data[i].at("embedding").get<std::vector<float>>();
            if (v.size() != dim)
                throw TransportError("embedding dimension " + std::to_string(v.size()) + " != configured " +
                                         std::to_string(dim),
                                     false);
            if (!simd::normalize(v)) throw TransportError("embedding response contains a zero vector", false);
            out[slot] = std::move(v);
        }
    } catch (const json::exception& e) {
        throw TransportError(std::string("unexpected embedding response: ") + e.what(), false);
    }
    return out;
}

std::vector<Embedding> RemoteEmbedder::embed(const std::vector<std::string>& texts) {
    if (texts.empty()) return {};
    for (const auto& t : texts)
        if (t.empty()) throw ValidationError("cannot embed an empty text");
    const auto body = build_body(texts, endpoint_.model);
    for (int attempt = 0;; ++attempt) {
        try {
            return parse_response(http_post_json(endpoint_, body), texts.size(), fingerprint_.dim);
        } catch (const TransportError& e) {
            if (!e.transient() || attempt >= max_retries_) throw;
            std::this_thread::sleep_for(std::chrono::milliseconds(250) * (1 << attempt));
        }
    }
}

} // namespace ttpx::llm
