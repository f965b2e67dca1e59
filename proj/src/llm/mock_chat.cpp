#include "ttpx/llm/mock_chat.hpp"

#include "ttpx/io.hpp"

#include <nlohmann/json.hpp>

namespace ttpx::llm {

using nlohmann::json;

namespace {

std::string strip_ids(const std::string& text) {
    std::string out;
    std::size_t pos = 0;
    for (const auto& tok : scan_id_tokens(text)) {
        out.append(text, pos, tok.offset - pos);
        pos = tok.offset + tok.length;
    }
    out.append(text, pos, std::string::npos);
    return out;
}

std::string joined_content(const ChatRequest& request) {
    std::string all;
    for (const auto& m : request.messages) {
        all += m.content;
        all += '\n';
    }
    return all;
}

} // namespace

MockChatBackend::MockChatBackend(std::vector<Rule> rules, std::vector<Fixture> fixtures,
                                 std::optional<std::string> fallback)
    : fallback_(std::move(fallback)) {
    for (auto& r : rules) rules_.push_back({std::move(r), 0});
    for (auto& f : fixtures) {
        auto key = f.sentence.text;
        fixtures_.insert_or_assign(std::move(key), std::move(f));
    }
}

MockChatBackend MockChatBackend::from_json(const json& script, const std::filesystem::path& base_dir) {
    if (!script.is_object()) throw ConfigError("mock script must be a JSON object");
    std::vector<Rule> rules;
    try {
        for (const auto& r : script.value("rules", json::array())) {
            Rule rule;
            if (r.contains("kind")) rule.kind = parse_prompt_kind(r["kind"].get<std::string>());
            if (r.contains("subject")) rule.subject = r["subject"].get<std::string>();
            if (r.contains("contains")) rule.contains = r["contains"].get<std::string>();
            if (r.contains("fingerprint")) rule.fingerprint = r["fingerprint"].get<std::string>();
            rule.fail_times = r.value("fail_times", 0);
            rule.fail_transient = r.value("fail_transient", true);
            if (r.contains("response")) rule.responses.push_back(r["response"].get<std::string>());
            if (r.contains("responses")) {
                for (const auto& s : r["responses"]) rule.responses.push_back(s.get<std::string>());
            }
            if (rule.responses.empty() && rule.fail_times == 0)
                throw ConfigError("mock rule without response");
            rules.push_back(std::move(rule));
        }
        std::vector<Fixture> fixtures;
        if (auto echo = script.find("echo"); echo != script.end()) {
            if (echo->contains("fixtures_path")) {
                std::filesystem::path p = (*echo)["fixtures_path"].get<std::string>();
                if (p.is_relative()) p = base_dir / p;
                for (auto& s : load_dataset(p)) fixtures.push_back({std::move(s), std::nullopt});
            }
            for (const auto& f : echo->value("fixtures", json::array())) {
                Fixture fx;
                fx.sentence.id = f.value("id", "");
                fx.sentence.text = f.at("text").get<std::string>();
                for (const auto& l : f.at("labels")) fx.sentence.labels.insert(TechniqueId::normalize(l.get<std::string>()));
                if (f.contains("skr")) fx.skr = skr_from_json(f["skr"]);
                fixtures.push_back(std::move(fx));
            }
        }
        std::optional<std::string> fallback;
        if (script.contains("default")) fallback = script["default"].get<std::string>();
        return MockChatBackend(std::move(rules), std::move(fixtures), std::move(fallback));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed mock script: ") + e.what());
    }
}

MockChatBackend MockChatBackend::from_file(const std::filesystem::path& path) {
    json script;
    try {
        script = json::parse(io::read_file(path));
    } catch (const json::parse_error& e) {
        throw ConfigError("mock script '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return from_json(script, path.parent_path());
}

MockChatBackend MockChatBackend::echo_oracle(std::vector<LabeledSentence> fixtures) {
    std::vector<Fixture> fx;
    for (auto& s : fixtures) fx.push_back({std::move(s), std::nullopt});
    return MockChatBackend({}, std::move(fx), std::nullopt);
}

MockChatBackend::MockChatBackend(MockChatBackend&& other) noexcept {
    std::lock_guard lock(other.mu_);
    rules_ = std::move(other.rules_);
    fixtures_ = std::move(other.fixtures_);
    fallback_ = std::move(other.fallback_);
    calls_ = other.calls_;
}

void MockChatBackend::add_rule(Rule rule) {
    std::lock_guard lock(mu_);
    rules_.push_back({std::move(rule), 0});
}

std::size_t MockChatBackend::calls() const {
    std::lock_guard lock(mu_);
    return calls_;
}

SkrInstance MockChatBackend::synthesize_skr(const LabeledSentence& sentence) {
    SkrInstance skr;
    skr.state = "Situational context: " + strip_ids(sentence.text);
    for (const auto& label : sentence.labels)
        skr.actions.emplace(label, "Manifestation of " + label.str() + " as observed in: " + sentence.text);
    return skr;
}

std::optional<std::string> MockChatBackend::echo(const ChatRequest& request) const {
    auto it = fixtures_.find(request.subject);
    if (it == fixtures_.end()) return std::nullopt;
    const auto& fx = it->second;
    switch (request.kind) {
    case PromptKind::GenerateSkr:
        return "```json\n" + serialize_skr(fx.skr ? *fx.skr : synthesize_skr(fx.sentence)) + "\n```";
    case PromptKind::OptimizeActions: {
        auto skr = fx.skr ? *fx.skr : synthesize_skr(fx.sentence);
        json actions = json::object();
        for (const auto& [id, text] : skr.actions) actions[id.str()] = text;
        return json{{"action", actions}}.dump();
    }
    case PromptKind::Stage1Classify:
    case PromptKind::Stage2Verify: {
        json ids = json::array();
        for (const auto& l : fx.sentence.labels) ids.push_back(l.str());
        return json{{"techniques", ids}, {"rationale", "echo oracle"}}.dump();
    }
    }
    return std::nullopt;
}

std::string MockChatBackend::send(const ChatRequest& request) {
    std::lock_guard lock(mu_);
    ++calls_;
    const std::string content = joined_content(request);
    for (auto& state : rules_) {
        const auto& r = state.rule;
        if (r.kind && *r.kind != request.kind) continue;
        if (r.subject && *r.subject != request.subject) continue;
        if (r.contains && content.find(*r.contains) == std::string::npos) continue;
        if (r.fingerprint && *r.fingerprint != request.fingerprint()) continue;
        std::size_t n = state.matched++;
        if (n < static_cast<std::size_t>(r.fail_times) || r.responses.empty())
            throw TransportError("mock: scripted failure", r.fail_transient);
        std::size_t idx = n - static_cast<std::size_t>(r.fail_times);
        return r.responses[std::min(idx, r.responses.size() - 1)];
    }
    if (auto reply = echo(request)) return *reply;
    if (fallback_) return *fallback_;
    throw TransportError("mock: no scripted response for " + std::string(to_string(request.kind)) + " request", false);
}

} // namespace ttpx::llm
