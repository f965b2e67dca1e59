#pragma once

#include "ttpx/errors.hpp"

#include <chrono>
#include <string>
#include <string_view>
#include <vector>

namespace ttpx::llm {

// One template per kind.
enum class PromptKind { GenerateSkr, OptimizeActions, Stage1Classify, Stage2Verify };

inline constexpr PromptKind kAllPromptKinds[] = {PromptKind::GenerateSkr, PromptKind::OptimizeActions,
                                                 PromptKind::Stage1Classify, PromptKind::Stage2Verify};

std::string_view to_string(PromptKind kind);
PromptKind parse_prompt_kind(std::string_view name);

struct ChatParams {
    std::string model_name;
    double temperature = 0.0;
    int max_output_tokens = 1024;
    std::chrono::milliseconds request_timeout{60000};
    int max_retries = 3;

    // Throws ValidationError.
    void validate() const;
};

struct ChatMessage {
    std::string role;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

struct ChatRequest {
    PromptKind kind = PromptKind::Stage1Classify;
    std::vector<ChatMessage> messages;
    ChatParams params;
    // Text the prompt is about (target or input sentence). Never sent to remote providers;
    // lets scripted backends key responses on it.
    std::string subject;

    // Stable hex digest of kind + message contents.
    std::string fingerprint() const;
};

// Transport-level failure. Transient failures (timeouts, 429, 5xx) are retried.
class TransportError : public Error {
public:
    TransportError(const std::string& what, bool transient) : Error(what), transient_(transient) {}
    bool transient() const noexcept { return transient_; }

private:
    bool transient_;
};

class ContextOverflowError : public Error {
public:
    using Error::Error;
};

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    // Returns the raw completion text. Must be safe to call concurrently.
    virtual std::string send(const ChatRequest& request) = 0;
    virtual std::string name() const = 0;
};

} // namespace ttpx::llm
