#pragma once

#include "ttpx/llm/chat_backend.hpp"
#include "ttpx/skr.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ttpx::llm {

// stage1_classify / stage2_verify reply. Technique strings are kept raw; the pipeline
// decides which of them are acceptable.
struct ClassificationReply {
    std::vector<std::string> techniques;
    std::string rationale;

    bool operator==(const ClassificationReply&) const = default;
};

// optimize_actions reply.
struct ActionsReply {
    std::map<TechniqueId, std::string> actions;

    bool operator==(const ActionsReply&) const = default;
};

using StructuredReply = std::variant<SkrInstance, ActionsReply, ClassificationReply>;

class StructuredOutputError : public Error {
public:
    enum class Reason { NoJsonObject, SchemaViolation };

    StructuredOutputError(Reason reason, const std::string& detail, std::string raw)
        : Error(std::string(reason == Reason::NoJsonObject ? "no JSON object in model output"
                                                           : "model output violates schema") +
                (detail.empty() ? "" : ": " + detail)),
          reason_(reason), raw_(std::move(raw)) {}
    Reason reason() const noexcept { return reason_; }
    // Model output as received, for audit.
    const std::string& raw() const noexcept { return raw_; }

private:
    Reason reason_;
    std::string raw_;
};

// First balanced `{...}` span that parses as a JSON object; string literals and escapes
// are respected when balancing braces.
std::optional<std::string> extract_json_object(std::string_view raw);

// Throws StructuredOutputError.
StructuredReply parse_structured(PromptKind kind, std::string_view raw);

} // namespace ttpx::llm
