#include "ttpx/pipeline.hpp"

#include "ttpx/parallel.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>

namespace ttpx {

using nlohmann::json;

std::string_view to_string(Stage stage) {
    switch (stage) {
    case Stage::Stage1: return "stage1";
    case Stage::Stage2: return "stage2";
    case Stage::External: return "external";
    }
    return "stage1";
}

BatchMode parse_batch_mode(std::string_view name) {
    if (name == "full") return BatchMode::Full;
    if (name == "stage1") return BatchMode::Stage1;
    if (name == "verify-external") return BatchMode::VerifyExternal;
    throw ValidationError("unknown extraction mode '" + std::string(name) + "' (full, stage1, verify-external)");
}

std::string_view to_string(BatchMode mode) {
    switch (mode) {
    case BatchMode::Full: return "full";
    case BatchMode::Stage1: return "stage1";
    case BatchMode::VerifyExternal: return "verify-external";
    }
    return "full";
}

void PipelineConfig::validate() const {
    if (k_state == 0) throw ValidationError("k_state must be at least 1");
    if (k_action == 0) throw ValidationError("k_action must be at least 1");
}

namespace {

std::string joined(const std::vector<std::string>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + v[i];
    return out;
}

llm::ContextView view_of(const MemoryEntry& e) { return {e.skr.state, e.skr.actions, e.skr.examples}; }

} // namespace

ExternalInputError::ExternalInputError(std::vector<std::string> rejected)
    : Error(rejected.empty() ? std::string("no external technique ids supplied")
                              : "no usable external technique id among: " + joined(rejected)),
      rejected_(std::move(rejected)) {}

ExtractionPipeline::ExtractionPipeline(const MemoryStore& store, llm::LlmGateway& gateway, llm::Embedder& embedder,
                                       const Catalog* catalog, PipelineConfig config)
    : store_(store), gateway_(gateway), embedder_(embedder), catalog_(catalog), config_(config) {
    config_.validate();
    if (store_.fingerprint() != embedder_.fingerprint())
        throw VersionMismatchError("memory was built with embedder " + store_.fingerprint().name + "/" +
                                   std::to_string(store_.fingerprint().dim) + ", configured " +
                                   embedder_.fingerprint().name + "/" + std::to_string(embedder_.fingerprint().dim));
}

std::map<TechniqueId, std::string> ExtractionPipeline::names_for(const std::set<TechniqueId>& ids) const {
    std::map<TechniqueId, std::string> out;
    if (!catalog_) return out;
    for (const auto& id : ids) {
        auto name = catalog_->name_of(id);
        if (!name.empty()) out.emplace(id, std::move(name));
    }
    return out;
}

std::set<TechniqueId> ExtractionPipeline::accept(const llm::ClassificationReply& reply,
                                                 const std::set<TechniqueId>& candidates,
                                                 std::vector<std::string>& warnings) const {
    std::set<TechniqueId> out;
    for (const auto& raw : reply.techniques) {
        auto id = TechniqueId::try_normalize(raw);
        if (!id) {
            warnings.push_back("invalid technique id '" + raw + "' dropped");
            continue;
        }
        if (!candidates.count(*id)) {
            warnings.push_back(id->str() + " is outside the candidate set, dropped");
            continue;
        }
        out.insert(*id);
    }
    return out;
}

Classification ExtractionPipeline::stage1_classify(const std::string& text) const {
    if (store_.empty()) throw EmptyStoreError();
    auto query = embedder_.embed_one(text);
    auto hits = store_.retrieve_by_state(query, config_.k_state);

    Classification c;
    c.stage = Stage::Stage1;
    llm::Stage1Payload payload;
    payload.input_text = text;
    payload.allow_empty = config_.allow_empty;
    for (const auto& h : hits) {
        c.retrieved_entry_ids.push_back(h.entry->id);
        payload.contexts.push_back(view_of(*h.entry));
        for (const auto& [id, _] : h.entry->skr.actions) c.candidates_considered.insert(id);
    }
    payload.candidates = c.candidates_considered;
    payload.names = names_for(c.candidates_considered);

    try {
        auto rendered = gateway_.render(payload);
        for (const auto& n : rendered.notes) c.warnings.push_back("prompt: " + n);
        auto completion = gateway_.complete_structured(llm::PromptKind::Stage1Classify, rendered.text, text);
        if (completion.reasked) c.warnings.push_back("model output needed the JSON reminder");
        const auto& reply = std::get<llm::ClassificationReply>(completion.reply);
        c.technique_ids = accept(reply, c.candidates_considered, c.warnings);
        c.rationale = reply.rationale;
    } catch (const EmptyStoreError&) {
        throw;
    } catch (const std::exception& e) {
        throw ExtractionError(Stage::Stage1, c.retrieved_entry_ids, e.what());
    }
    if (c.technique_ids.empty() && !config_.allow_empty)
        throw ExtractionError(Stage::Stage1, c.retrieved_entry_ids, "no technique selected and empty answers are disabled");
    return c;
}

Classification ExtractionPipeline::verify(const std::string& text, const std::set<TechniqueId>& prior,
                                          std::vector<std::string> warnings) const {
    if (store_.empty()) throw EmptyStoreError();
    auto query = embedder_.embed_one(text);
    auto retrieval = store_.retrieve_by_action(query, prior, config_.k_action);

    Classification c;
    c.stage = Stage::Stage2;
    c.warnings = std::move(warnings);
    if (retrieval.no_coverage) {
        c.stage = Stage::External;
        c.technique_ids = prior;
        c.candidates_considered = prior;
        c.warnings.push_back("no memory coverage for prior labels");
        return c;
    }

    // Every covered prior gets at least its best manifestation into the context.
    std::vector<ActionHit> hits = retrieval.hits;
    std::set<TechniqueId> covered, uncovered;
    for (const auto& p : prior) {
        bool in_hits = std::any_of(hits.begin(), hits.end(),
                                   [&](const ActionHit& h) { return parent_child_related(h.technique, p); });
        if (in_hits) {
            covered.insert(p);
            continue;
        }
        auto single = store_.retrieve_by_action(query, {p}, 1);
        if (single.no_coverage) {
            uncovered.insert(p);
        } else {
            covered.insert(p);
            hits.push_back(single.hits.front());
        }
    }
    for (const auto& p : uncovered) c.warnings.push_back("no memory coverage for prior label " + p.str() + ", excluded");

    llm::Stage2Payload payload;
    payload.input_text = text;
    payload.allow_empty = config_.allow_empty;
    std::set<std::string> seen;
    for (const auto& h : hits) {
        if (!seen.insert(h.entry->id).second) continue;
        c.retrieved_entry_ids.push_back(h.entry->id);
        payload.contexts.push_back(view_of(*h.entry));
        for (const auto& [id, _] : h.entry->skr.actions) c.candidates_considered.insert(id);
    }
    // Priors matched only through a parent/child relative stay selectable.
    for (const auto& p : covered) c.candidates_considered.insert(p);
    payload.prior = covered;
    payload.candidates = c.candidates_considered;
    payload.names = names_for(c.candidates_considered);

    try {
        auto rendered = gateway_.render(payload);
        for (const auto& n : rendered.notes) c.warnings.push_back("prompt: " + n);
        auto completion = gateway_.complete_structured(llm::PromptKind::Stage2Verify, rendered.text, text);
        if (completion.reasked) c.warnings.push_back("model output needed the JSON reminder");
        const auto& reply = std::get<llm::ClassificationReply>(completion.reply);
        std::size_t before = c.warnings.size();
        c.technique_ids = accept(reply, c.candidates_considered, c.warnings);
        if (c.warnings.size() != before)
            c.warnings.push_back("stage2 answers are restricted to the candidate set");
        c.rationale = reply.rationale;
    } catch (const std::exception& e) {
        throw ExtractionError(Stage::Stage2, c.retrieved_entry_ids, e.what());
    }
    if (c.technique_ids.empty() && !config_.allow_empty)
        throw ExtractionError(Stage::Stage2, c.retrieved_entry_ids, "no technique selected and empty answers are disabled");
    return c;
}

Classification ExtractionPipeline::stage2_verify(const std::string& text, const Classification& prior) const {
    if (prior.technique_ids.empty()) {
        Classification c = prior;
        c.warnings.push_back("empty prior, nothing to verify");
        return c;
    }
    auto c = verify(text, prior.technique_ids, {});
    if (c.stage == Stage::External) {
        // Nothing in memory to verify against: keep the prior as it was.
        Classification kept = prior;
        kept.warnings.insert(kept.warnings.end(), c.warnings.begin(), c.warnings.end());
        return kept;
    }
    return c;
}

Classification ExtractionPipeline::stage2_verify(const std::string& text, const std::set<TechniqueId>& prior) const {
    if (prior.empty()) {
        Classification c;
        c.stage = Stage::External;
        c.warnings.push_back("empty prior, nothing to verify");
        return c;
    }
    return verify(text, prior, {});
}

Classification ExtractionPipeline::extract(const std::string& text) const {
    auto first = stage1_classify(text);
    Classification second;
    try {
        second = stage2_verify(text, first);
    } catch (const ExtractionError& e) {
        std::vector<std::string> trace = first.retrieved_entry_ids;
        for (const auto& id : e.trace())
            if (std::find(trace.begin(), trace.end(), id) == trace.end()) trace.push_back(id);
        throw ExtractionError(Stage::Stage2, std::move(trace), e.what());
    }
    if (second.stage != Stage::Stage2) return second;

    Classification out = second;
    out.retrieved_entry_ids = first.retrieved_entry_ids;
    for (const auto& id : second.retrieved_entry_ids)
        if (std::find(out.retrieved_entry_ids.begin(), out.retrieved_entry_ids.end(), id) == out.retrieved_entry_ids.end())
            out.retrieved_entry_ids.push_back(id);
    out.warnings.clear();
    for (const auto& w : first.warnings) out.warnings.push_back("stage1: " + w);
    for (const auto& w : second.warnings) out.warnings.push_back("stage2: " + w);
    return out;
}

Classification ExtractionPipeline::standardize_external(const std::string& text,
                                                        const std::vector<std::string>& external_ids) const {
    std::set<TechniqueId> prior;
    std::vector<std::string> warnings, rejected;
    for (const auto& raw : external_ids) {
        auto id = TechniqueId::try_normalize(raw);
        if (!id) {
            warnings.push_back("invalid external id '" + raw + "' ignored");
            rejected.push_back(raw);
            continue;
        }
        if (catalog_ && !catalog_->contains(*id)) {
            warnings.push_back("external id " + id->str() + " not in catalog, ignored");
            rejected.push_back(raw);
            continue;
        }
        prior.insert(*id);
    }
    if (prior.empty()) throw ExternalInputError(rejected);

    auto c = verify(text, prior, warnings);
    Delta d;
    for (const auto& id : c.technique_ids)
        if (!prior.count(id)) d.added.insert(id);
    for (const auto& id : prior)
        if (!c.technique_ids.count(id)) d.removed.insert(id);
    c.delta = std::move(d);
    return c;
}

std::vector<BatchResult> ExtractionPipeline::batch_extract(const std::vector<BatchItem>& items, BatchMode mode,
                                                           std::size_t worker_limit) const {
    if (worker_limit == 0) throw ValidationError("worker_limit must be at least 1");
    std::vector<BatchResult> results(items.size());
    parallel_for(items.size(), worker_limit, [&](std::size_t i) {
        auto& r = results[i];
        r.id = items[i].id;
        try {
            switch (mode) {
            case BatchMode::Full: r.classification = extract(items[i].text); break;
            case BatchMode::Stage1: r.classification = stage1_classify(items[i].text); break;
            case BatchMode::VerifyExternal:
                r.classification = standardize_external(items[i].text, items[i].external);
                break;
            }
        } catch (const ExtractionError& e) {
            r.error = e.what();
            r.failed_stage = e.stage();
            r.trace = e.trace();
        } catch (const std::exception& e) {
            r.error = e.what();
        }
    });
    return results;
}

json to_json(const Classification& c) {
    auto ids = [](const std::set<TechniqueId>& s) {
        json a = json::array();
        for (const auto& id : s) a.push_back(id.str());
        return a;
    };
    json out{{"techniques", ids(c.technique_ids)},
             {"stage", std::string(to_string(c.stage))},
             {"rationale", c.rationale},
             {"candidates", ids(c.candidates_considered)},
             {"retrieved_entry_ids", c.retrieved_entry_ids},
             {"warnings", c.warnings}};
    if (c.delta) out["delta"] = {{"added", ids(c.delta->added)}, {"removed", ids(c.delta->removed)}};
    return out;
}

std::string to_jsonl_line(const BatchResult& r) {
    json out;
    out["id"] = r.id;
    if (r.classification) {
        out["status"] = "ok";
        out.update(to_json(*r.classification));
    } else {
        out["status"] = "error";
        out["error"] = r.error;
        if (r.failed_stage) out["stage"] = std::string(to_string(*r.failed_stage));
        out["retrieved_entry_ids"] = r.trace;
    }
    return out.dump();
}

} // namespace ttpx
