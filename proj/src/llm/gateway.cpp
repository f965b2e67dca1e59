#include "ttpx/llm/gateway.hpp"

#include "ttpx/io.hpp"

#include <thread>

namespace ttpx::llm {

std::string_view to_string(PromptKind kind) {
    switch (kind) {
    case PromptKind::GenerateSkr: return "generate_skr";
    case PromptKind::OptimizeActions: return "optimize_actions";
    case PromptKind::Stage1Classify: return "stage1_classify";
    case PromptKind::Stage2Verify: return "stage2_verify";
    }
    return "unknown";
}

PromptKind parse_prompt_kind(std::string_view name) {
    for (PromptKind k : kAllPromptKinds)
        if (to_string(k) == name) return k;
    throw ConfigError("unknown prompt kind '" + std::string(name) + "'");
}

void ChatParams::validate() const {
    if (!(temperature >= 0.0)) throw ValidationError("temperature must be >= 0");
    if (max_retries < 0) throw ValidationError("max_retries must be >= 0");
    if (max_output_tokens <= 0) throw ValidationError("max_output_tokens must be positive");
    if (request_timeout.count() <= 0) throw ValidationError("request_timeout must be positive");
}

std::string ChatRequest::fingerprint() const {
    std::string all(to_string(kind));
    for (const auto& m : messages) {
        all += '\0';
        all += m.role;
        all += '\0';
        all += m.content;
    }
    return io::hex64(io::fnv1a64(all));
}

namespace {

class SemaphoreGuard {
public:
    explicit SemaphoreGuard(std::counting_semaphore<1024>& s) : s_(s) { s_.acquire(); }
    ~SemaphoreGuard() { s_.release(); }
    SemaphoreGuard(const SemaphoreGuard&) = delete;
    SemaphoreGuard& operator=(const SemaphoreGuard&) = delete;

private:
    std::counting_semaphore<1024>& s_;
};

std::ptrdiff_t clamp_in_flight(std::size_t n) {
    if (n == 0) throw ValidationError("max_in_flight must be at least 1");
    return static_cast<std::ptrdiff_t>(std::min<std::size_t>(n, 1024));
}

} // namespace

LlmGateway::LlmGateway(std::shared_ptr<ChatBackend> backend, ChatParams params, GatewayOptions options,
                       TemplateSet templates)
    : backend_(std::move(backend)), params_(std::move(params)), options_(options), templates_(std::move(templates)),
      in_flight_(clamp_in_flight(options.max_in_flight)) {
    if (!backend_) throw ValidationError("gateway needs a chat backend");
    params_.validate();
}

Completion LlmGateway::complete(PromptKind kind, const std::string& prompt, const std::string& subject) {
    return complete(kind, prompt, params_, subject);
}

Completion LlmGateway::complete(PromptKind kind, const std::string& prompt, const ChatParams& params,
                                const std::string& subject) {
    if (prompt.empty()) throw ValidationError("prompt is empty");
    params.validate();
    ChatRequest request;
    request.kind = kind;
    request.params = params;
    request.subject = subject;
    request.messages = {{"system", templates_.get("system")}, {"user", prompt}};

    if (options_.context_budget_tokens > 0) {
        std::size_t tokens = estimate_tokens(request.messages[0].content) + estimate_tokens(prompt);
        if (tokens > options_.context_budget_tokens)
            throw ContextOverflowError("prompt needs ~" + std::to_string(tokens) + " tokens, budget is " +
                                       std::to_string(options_.context_budget_tokens));
    }

    for (int attempt = 1;; ++attempt) {
        try {
            SemaphoreGuard guard(in_flight_);
            ++backend_calls_;
            return {backend_->send(request), attempt};
        } catch (const TransportError& e) {
            if (!e.transient() || attempt > params.max_retries) throw;
        }
        if (options_.backoff_base.count() > 0)
            std::this_thread::sleep_for(options_.backoff_base * (1LL << std::min(attempt - 1, 10)));
    }
}

StructuredCompletion LlmGateway::complete_structured(PromptKind kind, const std::string& prompt,
                                                     const std::string& subject) {
    auto first = complete(kind, prompt, subject);
    try {
        return {parse_structured(kind, first.text), first.text, false};
    } catch (const StructuredOutputError&) {
    }
    auto second = complete(kind, prompt + templates_.get("json_reminder"), subject);
    return {parse_structured(kind, second.text), second.text, true};
}

RenderedPrompt LlmGateway::render(const PromptPayload& payload) const {
    std::size_t budget = 0;
    if (options_.context_budget_tokens > 0) {
        std::size_t system = estimate_tokens(templates_.get("system"));
        budget = options_.context_budget_tokens > system ? options_.context_budget_tokens - system : 1;
    }
    return render_prompt(payload, templates_, budget);
}

} // namespace ttpx::llm
