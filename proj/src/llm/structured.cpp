#include "ttpx/llm/structured.hpp"

#include <nlohmann/json.hpp>

namespace ttpx::llm {

using nlohmann::json;

namespace {

// End offset (exclusive) of the balanced object starting at `open`, if any.
std::optional<std::size_t> balanced_end(std::string_view s, std::size_t open) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = open; i < s.size(); ++i) {
        char c = s[i];
        if (in_string) {
            if (escaped) escaped = false;
            else if (c == '\\') escaped = true;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        else if (c == '{') ++depth;
        else if (c == '}' && --depth == 0) return i + 1;
    }
    return std::nullopt;
}

[[noreturn]] void schema(const std::string& detail, std::string_view raw) {
    throw StructuredOutputError(StructuredOutputError::Reason::SchemaViolation, detail, std::string(raw));
}

ClassificationReply parse_classification(const json& obj, std::string_view raw) {
    auto it = obj.find("techniques");
    if (it == obj.end()) schema("missing key 'techniques'", raw);
    if (!it->is_array()) schema("'techniques' is not an array", raw);
    ClassificationReply reply;
    for (const auto& t : *it) {
        if (!t.is_string()) schema("'techniques' contains a non-string element", raw);
        reply.techniques.push_back(t.get<std::string>());
    }
    if (auto r = obj.find("rationale"); r != obj.end() && !r->is_null()) {
        if (!r->is_string()) schema("'rationale' is not a string", raw);
        reply.rationale = r->get<std::string>();
    }
    return reply;
}

ActionsReply parse_actions(const json& obj, std::string_view raw) {
    auto it = obj.find("action");
    if (it == obj.end()) schema("missing key 'action'", raw);
    if (!it->is_object() || it->empty()) schema("'action' is not a non-empty object", raw);
    ActionsReply reply;
    for (const auto& [key, value] : it->items()) {
        auto id = TechniqueId::try_normalize(key);
        if (!id) schema("invalid technique id key '" + key + "'", raw);
        if (!value.is_string() || value.get<std::string>().empty())
            schema("action for " + key + " is not a non-empty string", raw);
        if (!reply.actions.emplace(*id, value.get<std::string>()).second) schema("duplicate key " + id->str(), raw);
    }
    return reply;
}

} // namespace

std::optional<std::string> extract_json_object(std::string_view raw) {
    for (std::size_t pos = raw.find('{'); pos != std::string_view::npos; pos = raw.find('{', pos + 1)) {
        auto end = balanced_end(raw, pos);
        if (!end) continue;
        std::string candidate(raw.substr(pos, *end - pos));
        auto parsed = json::parse(candidate, nullptr, false);
        if (!parsed.is_discarded() && parsed.is_object()) return candidate;
    }
    return std::nullopt;
}

StructuredReply parse_structured(PromptKind kind, std::string_view raw) {
    auto text = extract_json_object(raw);
    if (!text) throw StructuredOutputError(StructuredOutputError::Reason::NoJsonObject, "", std::string(raw));
    auto obj = json::parse(*text);
    switch (kind) {
    case PromptKind::GenerateSkr:
        try {
            return skr_from_json(obj);
        } catch (const Error& e) {
            schema(e.what(), raw);
        }
    case PromptKind::OptimizeActions: return parse_actions(obj, raw);
    case PromptKind::Stage1Classify:
    case PromptKind::Stage2Verify: return parse_classification(obj, raw);
    }
    schema("unknown prompt kind", raw);
}

} // namespace ttpx::llm
