#pragma once

#include "ttpx/dataset.hpp"
#include "ttpx/llm/chat_backend.hpp"
#include "ttpx/technique_id.hpp"

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace ttpx::llm {

struct DefinitionView {
    TechniqueId id;
    std::string name;
    std::string description;
};

// One retrieved SKR as shown to the model.
struct ContextView {
    std::string state;
    std::map<TechniqueId, std::string> actions;
    std::map<TechniqueId, std::vector<std::string>> examples;
};

struct GenerateSkrPayload {
    LabeledSentence target;
    std::vector<LabeledSentence> similar;
    std::vector<DefinitionView> definitions;
};

// Also used for conflict resolution: `competing` then holds the proposals for the single
// requested technique.
struct OptimizeActionsPayload {
    std::string state;
    std::map<TechniqueId, std::string> existing_actions;
    LabeledSentence evidence;
    std::vector<LabeledSentence> similar;
    std::vector<TechniqueId> requested;
    std::vector<DefinitionView> definitions;
    std::vector<std::string> competing;
};

struct Stage1Payload {
    std::string input_text;
    std::vector<ContextView> contexts;
    std::set<TechniqueId> candidates;
    std::map<TechniqueId, std::string> names;
    bool allow_empty = true;
};

struct Stage2Payload {
    std::string input_text;
    std::set<TechniqueId> prior;
    std::vector<ContextView> contexts;
    std::set<TechniqueId> candidates;
    std::map<TechniqueId, std::string> names;
    bool allow_empty = true;
};

using PromptPayload = std::variant<GenerateSkrPayload, OptimizeActionsPayload, Stage1Payload, Stage2Payload>;

PromptKind kind_of(const PromptPayload& payload);

// `{{name}}` templates, one per prompt kind plus "system" and "json_reminder".
class TemplateSet {
public:
    // Compiled-in defaults.
    static const TemplateSet& builtin();
    // Files named <template>.tmpl in `dir` override the defaults.
    static TemplateSet from_directory(const std::filesystem::path& dir);

    const std::string& get(const std::string& name) const;
    // Content digest identifying this template set in reports.
    const std::string& version() const noexcept { return version_; }

private:
    explicit TemplateSet(std::map<std::string, std::string> texts);
    std::map<std::string, std::string> texts_;
    std::string version_;
};

// Replaces every `{{name}}`. Throws ValidationError for a placeholder without a value.
std::string fill_template(const std::string& tmpl, const std::map<std::string, std::string>& values);

struct RenderedPrompt {
    std::string text;
    // Truncation notes (empty when the payload fit the budget untouched).
    std::vector<std::string> notes;
};

// Conservative token estimate for budget checks (4 bytes per token, rounded up).
std::size_t estimate_tokens(std::string_view text);

// Deterministic rendering. Technique-ID tokens inside free text that fall outside the
// payload's permitted set are masked. With budget_tokens > 0, optional sections are cut in
// order (similar sentences, then official descriptions) until the prompt fits; the target
// or input sentence is never cut. Throws ValidationError when the payload is incomplete.
RenderedPrompt render_prompt(const PromptPayload& payload, const TemplateSet& templates = TemplateSet::builtin(),
                             std::size_t budget_tokens = 0);

// Technique IDs the rendered prompt may mention.
std::set<TechniqueId> permitted_ids(const PromptPayload& payload);

} // namespace ttpx::llm
