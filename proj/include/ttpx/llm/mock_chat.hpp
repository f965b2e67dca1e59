#pragma once

#include "ttpx/dataset.hpp"
#include "ttpx/llm/chat_backend.hpp"
#include "ttpx/skr.hpp"

#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace ttpx::llm {

// Scripted chat backend for tests and offline runs.
//
// Script (JSON):
//   {
//     "rules": [ { "kind"?, "subject"?, "contains"?, "fingerprint"?,   // all given must match
//                  "fail_times"?: n, "fail_transient"?: true,          // fail the first n matches
//                  "response": "..." | "responses": ["...", ...] } ],  // sequence, last repeats
//     "echo": { "fixtures": [ {"id","text","labels", "skr"?} ] | "fixtures_path": "data.jsonl" },
//     "default": "..."
//   }
// Rules are tried in order, then echo, then default; an unmatched request fails permanently.
//
// Echo oracle: answers classification prompts with the gold labels of the fixture whose
// text equals the request subject, and generation prompts with the fixture's SKR (or one
// synthesized from the sentence and its labels).
class MockChatBackend final : public ChatBackend {
public:
    struct Rule {
        std::optional<PromptKind> kind;
        std::optional<std::string> subject;
        std::optional<std::string> contains;
        std::optional<std::string> fingerprint;
        int fail_times = 0;
        bool fail_transient = true;
        std::vector<std::string> responses;
    };
    struct Fixture {
        LabeledSentence sentence;
        std::optional<SkrInstance> skr;
    };

    MockChatBackend() = default;
    MockChatBackend(std::vector<Rule> rules, std::vector<Fixture> fixtures, std::optional<std::string> fallback);
    MockChatBackend(MockChatBackend&& other) noexcept;

    // `base_dir` resolves a relative fixtures_path.
    static MockChatBackend from_json(const nlohmann::json& script, const std::filesystem::path& base_dir = {});
    static MockChatBackend from_file(const std::filesystem::path& path);
    static MockChatBackend echo_oracle(std::vector<LabeledSentence> fixtures);

    void add_rule(Rule rule);
    std::string send(const ChatRequest& request) override;
    std::string name() const override { return "mock"; }

    // Total send() calls, including failed ones.
    std::size_t calls() const;

    // SKR the echo oracle produces for a sentence without an explicit one.
    static SkrInstance synthesize_skr(const LabeledSentence& sentence);

private:
    std::optional<std::string> echo(const ChatRequest& request) const;

    struct RuleState {
        Rule rule;
        std::size_t matched = 0;
    };
    mutable std::mutex mu_;
    std::vector<RuleState> rules_;
    std::map<std::string, Fixture> fixtures_;  // keyed by sentence text
    std::optional<std::string> fallback_;
    std::size_t calls_ = 0;
};

} // namespace ttpx::llm
