#pragma once

#include "ttpx/llm/chat_backend.hpp"
#include "ttpx/llm/prompts.hpp"
#include "ttpx/llm/structured.hpp"

#include <atomic>
#include <chrono>
#include <memory>
#include <semaphore>
#include <string>

namespace ttpx::llm {

struct GatewayOptions {
    // Prompt budget (system + user message), in estimated tokens. 0 disables the check.
    std::size_t context_budget_tokens = 32000;
    // Concurrent backend requests.
    std::size_t max_in_flight = 4;
    // Delay before retry n is backoff_base * 2^(n-1).
    std::chrono::milliseconds backoff_base{500};
};

struct Completion {
    std::string text;
    int attempts = 0;
};

struct StructuredCompletion {
    StructuredReply reply;
    std::string raw;
    // True when the first answer was unparseable and the JSON-only reminder was sent.
    bool reasked = false;
};

// Single entry point for chat completions. Safe for concurrent use.
class LlmGateway {
public:
    LlmGateway(std::shared_ptr<ChatBackend> backend, ChatParams params, GatewayOptions options = {},
               TemplateSet templates = TemplateSet::builtin());

    // Sends `prompt` as the user message after the system template. Retries transient
    // transport failures up to params.max_retries times with exponential backoff. Throws
    // ContextOverflowError (no request sent) when the prompt exceeds the budget, and
    // TransportError when retries are exhausted or the failure is permanent.
    Completion complete(PromptKind kind, const std::string& prompt, const std::string& subject = {});
    Completion complete(PromptKind kind, const std::string& prompt, const ChatParams& params,
                        const std::string& subject);

    // complete() + parse_structured(). An unparseable answer triggers exactly one re-ask
    // with the JSON-only reminder appended; a second failure throws StructuredOutputError.
    StructuredCompletion complete_structured(PromptKind kind, const std::string& prompt,
                                             const std::string& subject = {});

    RenderedPrompt render(const PromptPayload& payload) const;

    const ChatParams& params() const noexcept { return params_; }
    const TemplateSet& templates() const noexcept { return templates_; }
    const GatewayOptions& options() const noexcept { return options_; }
    std::string backend_name() const { return backend_->name(); }
    // Requests handed to the backend so far.
    std::size_t backend_calls() const noexcept { return backend_calls_.load(); }

private:
    std::shared_ptr<ChatBackend> backend_;
    ChatParams params_;
    GatewayOptions options_;
    TemplateSet templates_;
    std::counting_semaphore<1024> in_flight_;
    std::atomic<std::size_t> backend_calls_{0};
};

} // namespace ttpx::llm
