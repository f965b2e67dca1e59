#include "ttpx/lifecycle.hpp"

#include "ttpx/parallel.hpp"
#include "ttpx/simd/kernels.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <numeric>

namespace ttpx {

using nlohmann::json;

void LifecycleConfig::validate() const {
    if (similar_k == 0) throw ValidationError("similar_k must be at least 1");
    if (!(merge_threshold >= 0.0 && merge_threshold <= 1.0))
        throw ValidationError("merge_threshold must lie in [0, 1]");
    if (!(utility_threshold >= 0.0 && utility_threshold <= 1.0))
        throw ValidationError("utility_threshold must lie in [0, 1]");
    if (dataset_id.empty()) throw ValidationError("dataset_id is empty");
}

std::string_view to_string(SentenceOutcome::Path path) {
    switch (path) {
    case SentenceOutcome::Path::Created: return "created";
    case SentenceOutcome::Path::Merged: return "merged";
    case SentenceOutcome::Path::Optimized: return "optimized";
    case SentenceOutcome::Path::AlreadyCovered: return "already_covered";
    case SentenceOutcome::Path::Failed: return "failed";
    }
    return "failed";
}

namespace {

json ids_json(const std::vector<TechniqueId>& ids) {
    json out = json::array();
    for (const auto& id : ids) out.push_back(id.str());
    return out;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
    return out;
}

} // namespace

json to_json(const SentenceOutcome& o) {
    json out{{"sentence_id", o.sentence_id}, {"path", std::string(to_string(o.path))}};
    if (!o.entry_id.empty()) out["entry_id"] = o.entry_id;
    out["added"] = ids_json(o.added);
    if (!o.reason.empty()) out["reason"] = o.reason;
    out["notes"] = o.notes;
    return out;
}

json to_json(const InitReport& r) {
    json outcomes = json::array();
    for (const auto& o : r.outcomes) outcomes.push_back(to_json(o));
    return {{"skipped", r.skipped}, {"created", r.created}, {"merged", r.merged},
            {"failed", r.failed},   {"outcomes", std::move(outcomes)}};
}

json to_json(const UpdateReport& r) {
    json outcomes = json::array();
    for (const auto& o : r.outcomes) outcomes.push_back(to_json(o));
    return {{"failed", r.failed},
            {"conflicts", r.conflicts},
            {"warnings", r.warnings},
            {"outcomes", std::move(outcomes)}};
}

json to_json(const ForgetReport& r) {
    json pruned = json::array();
    for (const auto& p : r.pruned)
        pruned.push_back({{"id", p.id}, {"uses", p.stats.uses}, {"hits", p.stats.hits}, {"utility", p.utility}});
    return {{"min_uses", r.min_uses},
            {"utility_threshold", r.utility_threshold},
            {"pruned_count", r.pruned.size()},
            {"pruned", std::move(pruned)}};
}

KnowledgeLifecycle::KnowledgeLifecycle(llm::LlmGateway& gateway, llm::Embedder& embedder, const Catalog& catalog,
                                       LifecycleConfig config)
    : gateway_(gateway), embedder_(embedder), catalog_(catalog), config_(std::move(config)) {
    config_.validate();
}

std::set<TechniqueId> KnowledgeLifecycle::resolve_labels(const LabeledSentence& s,
                                                         std::vector<std::string>* notes) const {
    std::set<TechniqueId> out;
    for (const auto& label : s.labels) {
        if (catalog_.contains(label)) {
            out.insert(label);
            continue;
        }
        auto parent = label.parent();
        if (parent && catalog_.contains(*parent)) {
            if (notes) notes->push_back("label " + label.str() + " resolved to parent " + parent->str());
            out.insert(*parent);
            continue;
        }
        throw GenerationError(s.id, "label " + label.str() + " is not in the catalog");
    }
    return out;
}

std::vector<llm::DefinitionView> KnowledgeLifecycle::definitions_for(const std::set<TechniqueId>& ids) const {
    std::vector<llm::DefinitionView> out;
    for (const auto& id : ids)
        if (const auto* rec = catalog_.find(id)) out.push_back({id, rec->name, rec->description});
    return out;
}

SourceSentenceRef KnowledgeLifecycle::provenance_of(const LabeledSentence& s) const {
    return {config_.dataset_id, s.id, s.text, s.labels};
}

std::vector<Embedding> KnowledgeLifecycle::embed_all(const std::vector<std::string>& texts) {
    if (texts.empty()) return {};
    return embedder_.embed(texts);
}

std::vector<std::size_t> KnowledgeLifecycle::nearest(const Embedding& query, const std::vector<Embedding>& pool,
                                                     const std::vector<std::string>& pool_ids, std::size_t k,
                                                     const std::string& exclude_id) const {
    std::vector<Candidate> scored;
    scored.reserve(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (pool_ids[i] == exclude_id) continue;
        scored.push_back({i, simd::dot(query, pool[i])});
    }
    auto better = [&](const Candidate& a, const Candidate& b) {
        if (a.score != b.score) return a.score > b.score;
        return pool_ids[a.index] < pool_ids[b.index];
    };
    std::size_t take = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(), better);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < take; ++i) out.push_back(scored[i].index);
    return out;
}

GeneratedSkr KnowledgeLifecycle::generate_entry(const LabeledSentence& target,
                                                const std::vector<LabeledSentence>& similar) {
    GeneratedSkr out;
    out.resolved_labels = resolve_labels(target, &out.notes);

    std::set<TechniqueId> allowed = out.resolved_labels;
    std::vector<LabeledSentence> similar_view;
    for (const auto& s : similar) {
        LabeledSentence view{s.id, s.text, {}};
        for (const auto& label : s.labels) {
            if (catalog_.contains(label)) {
                view.labels.insert(label);
            } else if (auto p = label.parent(); p && catalog_.contains(*p)) {
                view.labels.insert(*p);
            } else {
                out.notes.push_back("similar sentence " + s.id + ": label " + label.str() + " not in catalog, omitted");
            }
        }
        if (view.labels.empty()) continue;
        allowed.insert(view.labels.begin(), view.labels.end());
        similar_view.push_back(std::move(view));
    }

    llm::GenerateSkrPayload payload{{target.id, target.text, out.resolved_labels}, similar_view,
                                    definitions_for(allowed)};
    auto rendered = gateway_.render(payload);
    for (const auto& n : rendered.notes) out.notes.push_back("prompt: " + n);

    std::string prompt = rendered.text;
    std::vector<std::string> violations;
    for (int attempt = 0; attempt < 2; ++attempt) {
        auto completion = gateway_.complete_structured(llm::PromptKind::GenerateSkr, prompt, target.text);
        if (completion.reasked) out.notes.push_back("model output needed the JSON reminder");
        SkrInstance skr = std::get<SkrInstance>(completion.reply);

        // Keys the model answered at sub-technique granularity the catalog lacks.
        SkrInstance cleaned{skr.state, {}, {}};
        for (const auto& [id, text] : skr.actions) {
            TechniqueId key = id;
            if (!allowed.count(key)) {
                auto p = key.parent();
                if (p && allowed.count(*p) && !catalog_.contains(key)) {
                    out.notes.push_back("action key " + key.str() + " resolved to parent " + p->str());
                    key = *p;
                } else {
                    out.notes.push_back("action key " + key.str() + " not among the labels involved, dropped");
                    continue;
                }
            }
            if (cleaned.actions.count(key)) {
                out.notes.push_back("duplicate action for " + key.str() + " after resolution, first kept");
                continue;
            }
            cleaned.actions.emplace(key, text);
            if (auto ex = skr.examples.find(id); ex != skr.examples.end()) cleaned.examples[key] = ex->second;
        }

        violations = validate_skr(cleaned, &catalog_, true);
        for (const auto& label : out.resolved_labels)
            if (!cleaned.actions.count(label)) violations.push_back("label " + label.str() + " has no action");
        if (violations.empty()) {
            out.skr = std::move(cleaned);
            return out;
        }
        if (attempt == 0) {
            out.notes.push_back("re-asked after: " + join(violations, "; "));
            prompt = rendered.text + "\n\nYour previous answer was rejected:\n";
            for (const auto& v : violations) prompt += "- " + v + "\n";
            prompt += "Return a corrected JSON object with an action for every target label.";
        }
    }
    throw GenerationError(target.id, "generated SKR rejected: " + join(violations, "; "));
}

MemoryEntry KnowledgeLifecycle::make_entry(MemoryStore& store, const GeneratedSkr& generated,
                                           const LabeledSentence& source) {
    MemoryEntry e;
    e.id = store.next_id();
    e.skr = generated.skr;
    std::vector<std::string> texts{generated.skr.state};
    for (const auto& [id, text] : generated.skr.actions) texts.push_back(text);
    auto vecs = embed_all(texts);
    e.state_embedding = std::move(vecs[0]);
    std::size_t i = 1;
    for (const auto& [id, text] : generated.skr.actions) e.action_embeddings.emplace(id, std::move(vecs[i++]));
    e.provenance.push_back(provenance_of(source));
    e.created_at = e.updated_at = store.now();
    return e;
}

InitReport KnowledgeLifecycle::initialize_memory(const std::vector<LabeledSentence>& dataset, MemoryStore& store,
                                                 const InitOptions& options) {
    if (dataset.empty()) throw ValidationError("dataset is empty");
    if (store.fingerprint() != embedder_.fingerprint())
        throw VersionMismatchError("store embedder " + store.fingerprint().name + " differs from configured " +
                                   embedder_.fingerprint().name);

    InitReport report;
    std::vector<std::string> texts, ids;
    for (const auto& s : dataset) {
        texts.push_back(s.text);
        ids.push_back(s.id);
    }
    const auto pool = embed_all(texts);

    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (options.processed.count(dataset[i].id))
            ++report.skipped;
        else
            pending.push_back(i);
    }

    struct Work {
        std::optional<GeneratedSkr> generated;
        Embedding state_embedding;
        std::string error;
    };

    const std::size_t chunk = std::max<std::size_t>(options.chunk_size, 1);
    for (std::size_t begin = 0; begin < pending.size(); begin += chunk) {
        const std::size_t end = std::min(pending.size(), begin + chunk);
        std::vector<Work> work(end - begin);

        parallel_for(work.size(), options.workers, [&](std::size_t w) {
            const std::size_t i = pending[begin + w];
            try {
                std::vector<LabeledSentence> similar;
                for (auto j : nearest(pool[i], pool, ids, config_.similar_k, dataset[i].id))
                    similar.push_back(dataset[j]);
                auto gen = generate_entry(dataset[i], similar);
                work[w].state_embedding = embedder_.embed_one(gen.skr.state);
                work[w].generated = std::move(gen);
            } catch (const std::exception& e) {
                work[w].error = e.what();
            }
        });

        std::vector<std::string> committed;
        for (std::size_t w = 0; w < work.size(); ++w) {
            const auto& source = dataset[pending[begin + w]];
            SentenceOutcome outcome;
            outcome.sentence_id = source.id;
            if (!work[w].generated) {
                outcome.reason = work[w].error;
                ++report.failed;
                report.outcomes.push_back(std::move(outcome));
                continue;
            }
            const auto& gen = *work[w].generated;
            outcome.notes = gen.notes;
            try {
                std::optional<StateHit> best;
                if (!store.empty()) best = store.retrieve_by_state(work[w].state_embedding, 1).front();
                if (best && best->score >= config_.merge_threshold) {
                    const auto& target = *best->entry;
                    std::map<TechniqueId, NewAction> additions;
                    for (const auto& [id, text] : gen.skr.actions) {
                        if (target.skr.actions.count(id)) {
                            outcome.notes.push_back("existing action for " + id.str() + " kept");
                            continue;
                        }
                        NewAction a{text, embedder_.embed_one(text), {}};
                        if (auto ex = gen.skr.examples.find(id); ex != gen.skr.examples.end())
                            a.examples = ex->second;
                        additions.emplace(id, std::move(a));
                    }
                    store.add_actions(target.id, additions, {provenance_of(source)});
                    outcome.entry_id = target.id;
                    for (const auto& [id, a] : additions) outcome.added.push_back(id);
                    outcome.path = additions.empty() ? SentenceOutcome::Path::AlreadyCovered
                                                     : SentenceOutcome::Path::Merged;
                    outcome.reason = "state similarity " + std::to_string(best->score) + " to " + target.id;
                    ++report.merged;
                } else {
                    auto entry = make_entry(store, gen, source);
                    outcome.entry_id = entry.id;
                    for (const auto& [id, text] : entry.skr.actions) outcome.added.push_back(id);
                    store.insert(std::move(entry));
                    outcome.path = SentenceOutcome::Path::Created;
                    ++report.created;
                }
                committed.push_back(source.id);
            } catch (const std::exception& e) {
                outcome.path = SentenceOutcome::Path::Failed;
                outcome.reason = e.what();
                ++report.failed;
            }
            report.outcomes.push_back(std::move(outcome));
        }
        if (options.on_commit) options.on_commit(committed);
    }
    return report;
}

UpdateReport KnowledgeLifecycle::update_memory(MemoryStore& store, const LabeledSentence& sentence) {
    return update_memory(store, std::vector<LabeledSentence>{sentence});
}

UpdateReport KnowledgeLifecycle::update_memory(MemoryStore& store, const std::vector<LabeledSentence>& sentences) {
    if (store.fingerprint() != embedder_.fingerprint())
        throw VersionMismatchError("store embedder " + store.fingerprint().name + " differs from configured " +
                                   embedder_.fingerprint().name);
    UpdateReport report;
    if (sentences.empty()) return report;

    // Similar-sentence pool: sentences already recorded in memory.
    std::vector<LabeledSentence> pool;
    {
        std::set<std::pair<std::string, std::string>> seen;
        for (const auto& e : store.entries())
            for (const auto& p : e->provenance)
                if (seen.emplace(p.dataset_id, p.sentence_id).second)
                    pool.push_back({p.sentence_id, p.text, p.labels});
    }
    std::vector<std::string> pool_texts, pool_ids;
    for (const auto& s : pool) {
        pool_texts.push_back(s.text);
        pool_ids.push_back(s.id);
    }
    auto pool_vecs = embed_all(pool_texts);

    struct Proposal {
        std::string text;
        std::vector<std::string> examples;
        std::size_t outcome;
    };
    // entry id -> technique -> proposals, in sentence order
    std::map<std::string, std::map<TechniqueId, std::vector<Proposal>>> proposals;
    std::map<std::string, std::vector<SourceSentenceRef>> pending_provenance;

    for (const auto& sentence : sentences) {
        report.outcomes.push_back({});
        const std::size_t oi = report.outcomes.size() - 1;
        auto& outcome = report.outcomes[oi];
        outcome.sentence_id = sentence.id;
        try {
            auto resolved = resolve_labels(sentence, &outcome.notes);
            auto query = embedder_.embed_one(sentence.text);
            std::vector<LabeledSentence> similar;
            for (auto j : nearest(query, pool_vecs, pool_ids, config_.similar_k, sentence.id))
                similar.push_back(pool[j]);

            std::optional<StateHit> best;
            if (!store.empty()) best = store.retrieve_by_state(query, 1).front();

            if (best && best->score >= config_.merge_threshold) {
                const auto& entry = *best->entry;
                outcome.entry_id = entry.id;
                std::vector<TechniqueId> uncovered;
                for (const auto& l : resolved)
                    if (!entry.skr.actions.count(l)) uncovered.push_back(l);
                if (uncovered.empty()) {
                    outcome.path = SentenceOutcome::Path::AlreadyCovered;
                    outcome.reason = "nearest state " + entry.id + " (similarity " + std::to_string(best->score) +
                                     ") already covers every label";
                    continue;
                }

                std::set<TechniqueId> def_ids(uncovered.begin(), uncovered.end());
                for (const auto& [id, text] : entry.skr.actions) def_ids.insert(id);
                llm::OptimizeActionsPayload payload{entry.skr.state,
                                                    entry.skr.actions,
                                                    {sentence.id, sentence.text, resolved},
                                                    similar,
                                                    uncovered,
                                                    definitions_for(def_ids),
                                                    {}};
                auto rendered = gateway_.render(payload);
                std::map<TechniqueId, std::string> got;
                std::string prompt = rendered.text;
                for (int attempt = 0; attempt < 2; ++attempt) {
                    auto completion =
                        gateway_.complete_structured(llm::PromptKind::OptimizeActions, prompt, sentence.text);
                    const auto& reply = std::get<llm::ActionsReply>(completion.reply);
                    for (const auto& t : uncovered) {
                        auto it = reply.actions.find(t);
                        if (it != reply.actions.end() && !it->second.empty()) got.emplace(t, it->second);
                    }
                    for (const auto& [id, text] : reply.actions)
                        if (std::find(uncovered.begin(), uncovered.end(), id) == uncovered.end())
                            outcome.notes.push_back("unrequested action for " + id.str() + " ignored");
                    if (got.size() == uncovered.size()) break;
                    if (attempt == 0) {
                        std::vector<std::string> missing;
                        for (const auto& t : uncovered)
                            if (!got.count(t)) missing.push_back(t.str());
                        outcome.notes.push_back("re-asked for missing actions: " + join(missing, ", "));
                        prompt = rendered.text + "\n\nYour previous answer lacked actions for: " +
                                 join(missing, ", ") + ". Return all requested actions.";
                    }
                }
                if (got.size() != uncovered.size())
                    throw GenerationError(sentence.id, "model did not supply every requested action");

                for (const auto& [id, text] : got) {
                    outcome.added.push_back(id);
                    proposals[entry.id][id].push_back({text, {}, oi});
                }
                pending_provenance[entry.id].push_back(provenance_of(sentence));
                outcome.path = SentenceOutcome::Path::Optimized;
                outcome.reason = "nearest state " + entry.id + " (similarity " + std::to_string(best->score) +
                                 ") lacks " + std::to_string(uncovered.size()) + " label(s)";
                continue;
            }

            auto gen = generate_entry(sentence, similar);
            outcome.notes.insert(outcome.notes.end(), gen.notes.begin(), gen.notes.end());
            auto state_vec = embedder_.embed_one(gen.skr.state);
            std::optional<StateHit> twin;
            if (!store.empty()) twin = store.retrieve_by_state(state_vec, 1).front();
            if (twin && twin->score >= config_.merge_threshold) {
                const auto& entry = *twin->entry;
                outcome.entry_id = entry.id;
                for (const auto& [id, text] : gen.skr.actions) {
                    if (entry.skr.actions.count(id)) {
                        outcome.notes.push_back("existing action for " + id.str() + " kept");
                        continue;
                    }
                    std::vector<std::string> ex;
                    if (auto it = gen.skr.examples.find(id); it != gen.skr.examples.end()) ex = it->second;
                    outcome.added.push_back(id);
                    proposals[entry.id][id].push_back({text, ex, oi});
                }
                pending_provenance[entry.id].push_back(provenance_of(sentence));
                outcome.path = outcome.added.empty() ? SentenceOutcome::Path::AlreadyCovered
                                                     : SentenceOutcome::Path::Merged;
                outcome.reason = "generated state matches " + entry.id + " (similarity " +
                                 std::to_string(twin->score) + ")";
                continue;
            }

            auto e = make_entry(store, gen, sentence);
            outcome.entry_id = e.id;
            for (const auto& [id, text] : e.skr.actions) outcome.added.push_back(id);
            store.insert(std::move(e));
            outcome.path = SentenceOutcome::Path::Created;
            outcome.reason = best ? "nearest state similarity " + std::to_string(best->score) + " below threshold"
                                  : "memory was empty";
            // Later sentences in the batch may draw on this one.
            pool.push_back(sentence);
            pool_ids.push_back(sentence.id);
            pool_vecs.push_back(query);
        } catch (const std::exception& e) {
            outcome.path = SentenceOutcome::Path::Failed;
            outcome.reason = e.what();
            outcome.added.clear();
        }
    }

    // Apply deferred proposals entry by entry.
    std::set<std::string> touched;
    for (const auto& [id, _] : proposals) touched.insert(id);
    for (const auto& [id, _] : pending_provenance) touched.insert(id);
    for (const auto& entry_id : touched) {
        std::vector<std::size_t> contributors;
        try {
            auto entry = store.get(entry_id);
            std::map<TechniqueId, NewAction> additions;
            for (const auto& [tech, list] : proposals[entry_id]) {
                std::vector<std::string> candidates;
                std::vector<std::string> examples;
                for (const auto& p : list) {
                    candidates.push_back(p.text);
                    examples.insert(examples.end(), p.examples.begin(), p.examples.end());
                    contributors.push_back(p.outcome);
                }
                std::set<std::string> distinct(candidates.begin(), candidates.end());
                std::string text = candidates.front();
                if (distinct.size() > 1) {
                    report.conflicts.push_back(entry_id + "/" + tech.str());
                    text = resolve_action_conflict(entry->skr.state, tech, candidates, &report.warnings,
                                                   entry->skr.actions);
                }
                additions.emplace(tech, NewAction{text, embedder_.embed_one(text), examples});
            }
            store.add_actions(entry_id, additions, pending_provenance[entry_id]);
        } catch (const std::exception& e) {
            report.warnings.push_back("update of " + entry_id + " failed: " + e.what());
            for (auto& o : report.outcomes) {
                if (o.entry_id == entry_id &&
                    (o.path == SentenceOutcome::Path::Optimized || o.path == SentenceOutcome::Path::Merged ||
                     o.path == SentenceOutcome::Path::AlreadyCovered)) {
                    o.path = SentenceOutcome::Path::Failed;
                    o.reason = e.what();
                    o.added.clear();
                }
            }
        }
    }

    for (const auto& o : report.outcomes)
        if (o.path == SentenceOutcome::Path::Failed) ++report.failed;
    return report;
}

std::string KnowledgeLifecycle::resolve_action_conflict(const std::string& state, const TechniqueId& technique,
                                                        const std::vector<std::string>& candidates,
                                                        std::vector<std::string>* warnings,
                                                        const std::map<TechniqueId, std::string>& existing_actions) {
    std::set<std::string> distinct(candidates.begin(), candidates.end());
    distinct.erase(std::string{});
    if (distinct.empty()) throw ValidationError("no non-empty candidate manifestation for " + technique.str());
    if (distinct.size() == 1) return *distinct.begin();

    const std::string fallback = *distinct.begin();
    auto warn = [&](const std::string& why) {
        if (warnings)
            warnings->push_back("conflict for " + technique.str() + " resolved by fallback to smallest candidate: " +
                                why);
    };
    try {
        llm::OptimizeActionsPayload payload;
        payload.state = state;
        payload.existing_actions = existing_actions;
        payload.existing_actions.erase(technique);
        payload.requested = {technique};
        payload.definitions = definitions_for({technique});
        payload.competing.assign(distinct.begin(), distinct.end());
        auto rendered = gateway_.render(payload);
        auto completion = gateway_.complete_structured(llm::PromptKind::OptimizeActions, rendered.text, state);
        const auto& reply = std::get<llm::ActionsReply>(completion.reply);
        auto it = reply.actions.find(technique);
        if (it == reply.actions.end() || it->second.empty()) {
            warn("reply lacked " + technique.str());
            return fallback;
        }
        return it->second;
    } catch (const std::exception& e) {
        warn(e.what());
        return fallback;
    }
}

ForgetReport run_forgetting(MemoryStore& store, const LifecycleConfig& config) {
    ForgetReport report;
    report.min_uses = config.min_uses;
    report.utility_threshold = config.utility_threshold;
    std::map<std::string, UsageStats> before;
    for (const auto& e : store.entries()) before.emplace(e->id, e->stats);
    for (const auto& id : store.forget_pass(config.min_uses, config.utility_threshold)) {
        const auto& s = before.at(id);
        report.pruned.push_back({id, s, s.utility()});
    }
    return report;
}

ForgetReport KnowledgeLifecycle::run_forgetting(MemoryStore& store) { return ttpx::run_forgetting(store, config_); }

} // namespace ttpx
