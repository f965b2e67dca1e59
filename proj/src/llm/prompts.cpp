#include "ttpx/llm/prompts.hpp"

#include "ttpx/errors.hpp"
#include "ttpx/io.hpp"

#include <algorithm>

namespace ttpx::llm::detail {
const std::map<std::string, std::string>& default_template_texts();
}

namespace ttpx::llm {

namespace {

constexpr const char* kMaskedId = "[other technique]";

// Masks technique-ID tokens that are not in `allowed`.
std::string redact(const std::string& text, const std::set<TechniqueId>& allowed) {
    auto tokens = scan_id_tokens(text);
    if (tokens.empty()) return text;
    std::string out;
    std::size_t pos = 0;
    for (const auto& tok : tokens) {
        out.append(text, pos, tok.offset - pos);
        if (allowed.count(tok.id))
            out.append(text, tok.offset, tok.length);
        else
            out += kMaskedId;
        pos = tok.offset + tok.length;
    }
    out.append(text, pos, std::string::npos);
    return out;
}

std::string id_list(const std::set<TechniqueId>& ids) {
    std::string out;
    for (const auto& id : ids) {
        if (!out.empty()) out += ", ";
        out += id.str();
    }
    return out.empty() ? "(none)" : out;
}

std::string display_name(const std::map<TechniqueId, std::string>& names, const TechniqueId& id) {
    auto it = names.find(id);
    return it == names.end() || it->second.empty() ? std::string("unnamed technique") : it->second;
}

std::string first_sentence(const std::string& text) {
    auto pos = text.find(". ");
    return pos == std::string::npos ? text : text.substr(0, pos + 1);
}

enum class DescriptionMode { Full, FirstSentence, Omitted };

std::string render_definitions(const std::vector<DefinitionView>& defs, DescriptionMode mode,
                               const std::set<TechniqueId>& allowed) {
    if (defs.empty()) return "(none)";
    std::string out;
    for (const auto& d : defs) {
        out += d.id.str() + " - " + (d.name.empty() ? std::string("unnamed technique") : d.name);
        if (mode != DescriptionMode::Omitted && !d.description.empty()) {
            out += ": ";
            out += redact(mode == DescriptionMode::Full ? d.description : first_sentence(d.description), allowed);
        }
        out += '\n';
    }
    out.pop_back();
    return out;
}

std::string render_sentences(const std::vector<LabeledSentence>& sentences, std::size_t limit,
                             const std::set<TechniqueId>& allowed) {
    if (sentences.empty() || limit == 0) return "(none)";
    std::string out;
    for (std::size_t i = 0; i < sentences.size() && i < limit; ++i) {
        out += std::to_string(i + 1) + ". " + redact(sentences[i].text, allowed) +
               "\n   Labeled techniques: " + id_list(sentences[i].labels) + "\n";
    }
    out.pop_back();
    return out;
}

std::string render_contexts(const std::vector<ContextView>& contexts, const std::map<TechniqueId, std::string>& names,
                            const std::set<TechniqueId>& allowed, const std::set<TechniqueId>* marked) {
    if (contexts.empty()) return "(none)";
    std::string out;
    for (std::size_t i = 0; i < contexts.size(); ++i) {
        const auto& c = contexts[i];
        out += "Context " + std::to_string(i + 1) + "\nState: " + redact(c.state, allowed) + "\n";
        for (const auto& [id, text] : c.actions) {
            out += "- " + id.str() + " - " + display_name(names, id) + ": " + redact(text, allowed);
            if (marked && marked->count(id)) out += " [prior]";
            out += '\n';
            if (auto ex = c.examples.find(id); ex != c.examples.end())
                for (const auto& s : ex->second) out += "    e.g. \"" + redact(s, allowed) + "\"\n";
        }
        if (i + 1 < contexts.size()) out += '\n';
    }
    out.pop_back();
    return out;
}

std::string render_candidates(const std::set<TechniqueId>& ids, const std::map<TechniqueId, std::string>& names) {
    std::string out;
    for (const auto& id : ids) out += "- " + id.str() + " - " + display_name(names, id) + "\n";
    if (!out.empty()) out.pop_back();
    return out;
}

std::string empty_policy(bool allow_empty) {
    return allow_empty ? "If none of the candidates is described by the input text, return an empty \"techniques\" list."
                       : "Return at least one technique from the candidate list.";
}

void require(bool ok, const char* what) {
    if (!ok) throw ValidationError(std::string("incomplete prompt payload: ") + what);
}

struct Renderer {
    const TemplateSet& templates;

    std::string operator()(const GenerateSkrPayload& p, std::size_t similar_limit, DescriptionMode mode) const {
        require(!p.target.text.empty(), "target sentence text");
        require(!p.target.labels.empty(), "target labels");
        auto allowed = permitted_ids(PromptPayload{p});
        return fill_template(templates.get("generate_skr"),
                             {{"target_sentence", redact(p.target.text, allowed)},
                              {"target_labels", id_list(p.target.labels)},
                              {"definitions", render_definitions(p.definitions, mode, allowed)},
                              {"similar_sentences", render_sentences(p.similar, similar_limit, allowed)}});
    }

    std::string operator()(const OptimizeActionsPayload& p, std::size_t similar_limit, DescriptionMode mode) const {
        require(!p.state.empty(), "state");
        require(!p.evidence.text.empty() || !p.competing.empty(), "evidence sentence or competing proposals");
        require(!p.requested.empty(), "requested techniques");
        auto allowed = permitted_ids(PromptPayload{p});
        std::string existing;
        for (const auto& [id, text] : p.existing_actions) existing += "- " + id.str() + ": " + redact(text, allowed) + "\n";
        if (existing.empty()) existing = "(none)";
        else existing.pop_back();
        std::string competing;
        for (std::size_t i = 0; i < p.competing.size(); ++i)
            competing += std::to_string(i + 1) + ". " + redact(p.competing[i], allowed) + "\n";
        if (competing.empty()) competing = "(none)";
        else competing.pop_back();
        return fill_template(templates.get("optimize_actions"),
                             {{"state", redact(p.state, allowed)},
                              {"existing_actions", existing},
                              {"evidence_sentence", p.evidence.text.empty() ? "(none)" : redact(p.evidence.text, allowed)},
                              {"evidence_labels", id_list(p.evidence.labels)},
                              {"requested_techniques",
                               id_list(std::set<TechniqueId>(p.requested.begin(), p.requested.end()))},
                              {"definitions", render_definitions(p.definitions, mode, allowed)},
                              {"similar_sentences", render_sentences(p.similar, similar_limit, allowed)},
                              {"competing_proposals", competing}});
    }

    std::string operator()(const Stage1Payload& p, std::size_t, DescriptionMode) const {
        require(!p.input_text.empty(), "input text");
        require(!p.candidates.empty(), "candidate techniques");
        for (const auto& c : p.contexts)
            for (const auto& [id, text] : c.actions)
                if (!p.candidates.count(id))
                    throw ValidationError("context action " + id.str() + " is not among the candidates");
        return fill_template(templates.get("stage1_classify"),
                             {{"input_text", redact(p.input_text, p.candidates)},
                              {"contexts", render_contexts(p.contexts, p.names, p.candidates, nullptr)},
                              {"candidates", render_candidates(p.candidates, p.names)},
                              {"empty_policy", empty_policy(p.allow_empty)}});
    }

    std::string operator()(const Stage2Payload& p, std::size_t, DescriptionMode) const {
        require(!p.input_text.empty(), "input text");
        require(!p.prior.empty(), "prior classification");
        require(!p.candidates.empty(), "candidate techniques");
        for (const auto& id : p.prior)
            if (!p.candidates.count(id)) throw ValidationError("prior technique " + id.str() + " is not among the candidates");
        for (const auto& c : p.contexts)
            for (const auto& [id, text] : c.actions)
                if (!p.candidates.count(id))
                    throw ValidationError("context action " + id.str() + " is not among the candidates");
        std::string prior;
        for (const auto& id : p.prior) prior += "- " + id.str() + " - " + display_name(p.names, id) + "\n";
        prior.pop_back();
        return fill_template(templates.get("stage2_verify"),
                             {{"input_text", redact(p.input_text, p.candidates)},
                              {"prior", prior},
                              {"contexts", render_contexts(p.contexts, p.names, p.candidates, &p.prior)},
                              {"candidates", render_candidates(p.candidates, p.names)},
                              {"empty_policy", empty_policy(p.allow_empty)}});
    }
};

std::size_t similar_count(const PromptPayload& payload) {
    if (auto* g = std::get_if<GenerateSkrPayload>(&payload)) return g->similar.size();
    if (auto* o = std::get_if<OptimizeActionsPayload>(&payload)) return o->similar.size();
    return 0;
}

bool has_definitions(const PromptPayload& payload) {
    if (auto* g = std::get_if<GenerateSkrPayload>(&payload)) return !g->definitions.empty();
    if (auto* o = std::get_if<OptimizeActionsPayload>(&payload)) return !o->definitions.empty();
    return false;
}

} // namespace

PromptKind kind_of(const PromptPayload& payload) {
    static constexpr PromptKind kinds[] = {PromptKind::GenerateSkr, PromptKind::OptimizeActions,
                                           PromptKind::Stage1Classify, PromptKind::Stage2Verify};
    return kinds[payload.index()];
}

TemplateSet::TemplateSet(std::map<std::string, std::string> texts) : texts_(std::move(texts)) {
    std::string all;
    for (const auto& [name, text] : texts_) all += name + '\0' + text + '\0';
    version_ = "tmpl-" + io::hex64(io::fnv1a64(all));
}

const TemplateSet& TemplateSet::builtin() {
    static const TemplateSet set(detail::default_template_texts());
    return set;
}

TemplateSet TemplateSet::from_directory(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw ConfigError("template directory '" + dir.string() + "' not found");
    auto texts = detail::default_template_texts();
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() != ".tmpl") continue;
        texts[entry.path().stem().string()] = io::read_file(entry.path());
    }
    return TemplateSet(std::move(texts));
}

const std::string& TemplateSet::get(const std::string& name) const {
    auto it = texts_.find(name);
    if (it == texts_.end()) throw ConfigError("no prompt template named '" + name + "'");
    return it->second;
}

std::string fill_template(const std::string& tmpl, const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size() + 256);
    std::size_t pos = 0;
    for (;;) {
        auto open = tmpl.find("{{", pos);
        if (open == std::string::npos) break;
        auto close = tmpl.find("}}", open + 2);
        if (close == std::string::npos) break;
        out.append(tmpl, pos, open - pos);
        std::string key = tmpl.substr(open + 2, close - open - 2);
        auto it = values.find(key);
        if (it == values.end()) throw ValidationError("template placeholder '" + key + "' has no value");
        out += it->second;
        pos = close + 2;
    }
    out.append(tmpl, pos, std::string::npos);
    return out;
}

std::size_t estimate_tokens(std::string_view text) { return (text.size() + 3) / 4; }

std::set<TechniqueId> permitted_ids(const PromptPayload& payload) {
    std::set<TechniqueId> ids;
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, GenerateSkrPayload>) {
                ids.insert(p.target.labels.begin(), p.target.labels.end());
                for (const auto& s : p.similar) ids.insert(s.labels.begin(), s.labels.end());
                for (const auto& d : p.definitions) ids.insert(d.id);
            } else if constexpr (std::is_same_v<T, OptimizeActionsPayload>) {
                for (const auto& [id, text] : p.existing_actions) ids.insert(id);
                ids.insert(p.evidence.labels.begin(), p.evidence.labels.end());
                for (const auto& s : p.similar) ids.insert(s.labels.begin(), s.labels.end());
                ids.insert(p.requested.begin(), p.requested.end());
                for (const auto& d : p.definitions) ids.insert(d.id);
            } else {
                ids = p.candidates;
            }
        },
        payload);
    return ids;
}

RenderedPrompt render_prompt(const PromptPayload& payload, const TemplateSet& templates, std::size_t budget_tokens) {
    Renderer renderer{templates};
    auto render = [&](std::size_t similar_limit, DescriptionMode mode) {
        return std::visit([&](const auto& p) { return renderer(p, similar_limit, mode); }, payload);
    };
    const std::size_t n_similar = similar_count(payload);
    RenderedPrompt out{render(n_similar, DescriptionMode::Full), {}};
    if (budget_tokens == 0 || estimate_tokens(out.text) <= budget_tokens) return out;

    std::size_t keep = n_similar;
    while (keep > 0 && estimate_tokens(out.text) > budget_tokens) {
        --keep;
        out.text = render(keep, DescriptionMode::Full);
    }
    if (keep < n_similar)
        out.notes.push_back("dropped " + std::to_string(n_similar - keep) + " of " + std::to_string(n_similar) +
                            " similar sentences to fit the context budget");
    if (estimate_tokens(out.text) <= budget_tokens || !has_definitions(payload)) return out;

    out.text = render(keep, DescriptionMode::FirstSentence);
    out.notes.push_back("shortened official descriptions to their first sentence");
    if (estimate_tokens(out.text) <= budget_tokens) return out;
    out.text = render(keep, DescriptionMode::Omitted);
    out.notes.push_back("omitted official descriptions");
    return out;
}

} // namespace ttpx::llm
