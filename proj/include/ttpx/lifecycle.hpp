#pragma once

#include "ttpx/catalog.hpp"
#include "ttpx/dataset.hpp"
#include "ttpx/llm/embedder.hpp"
#include "ttpx/llm/gateway.hpp"
#include "ttpx/memory_store.hpp"

#include <nlohmann/json_fwd.hpp>

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ttpx {

struct LifecycleConfig {
    std::size_t similar_k = 5;
    double merge_threshold = 0.95;
    std::uint64_t min_uses = 5;
    double utility_threshold = 0.3;
    // Recorded in provenance refs.
    std::string dataset_id = "dataset";

    // Throws ValidationError.
    void validate() const;
};

// Generation failed for one sentence (invalid or unusable model output after the re-ask,
// or labels that cannot be resolved against the catalog).
class GenerationError : public Error {
public:
    GenerationError(const std::string& sentence_id, const std::string& what)
        : Error("sentence '" + sentence_id + "': " + what), sentence_id_(sentence_id) {}
    const std::string& sentence_id() const noexcept { return sentence_id_; }

private:
    std::string sentence_id_;
};

struct GeneratedSkr {
    SkrInstance skr;
    // Labels after parent resolution; the generated actions cover all of them.
    std::set<TechniqueId> resolved_labels;
    std::vector<std::string> notes;
};

struct SentenceOutcome {
    enum class Path { Created, Merged, Optimized, AlreadyCovered, Failed };

    std::string sentence_id;
    Path path = Path::Failed;
    std::string entry_id;
    std::vector<TechniqueId> added;
    std::string reason;
    std::vector<std::string> notes;
};

std::string_view to_string(SentenceOutcome::Path path);

struct InitOptions {
    // Sentences already integrated by an earlier, interrupted run.
    std::set<std::string> processed;
    // Generation concurrency (model calls are additionally bounded by the gateway).
    std::size_t workers = 1;
    // Sentences integrated between commits.
    std::size_t chunk_size = 16;
    // Called after each chunk is integrated with the ids that succeeded in it.
    std::function<void(const std::vector<std::string>&)> on_commit;
};

struct InitReport {
    std::vector<SentenceOutcome> outcomes;
    std::size_t skipped = 0;
    std::size_t created = 0;
    std::size_t merged = 0;
    std::size_t failed = 0;
};

struct UpdateReport {
    std::vector<SentenceOutcome> outcomes;
    // (entry, technique) pairs that received several distinct proposals.
    std::vector<std::string> conflicts;
    std::vector<std::string> warnings;
    std::size_t failed = 0;
};

struct ForgetReport {
    struct Pruned {
        std::string id;
        UsageStats stats;
        double utility;
    };
    std::vector<Pruned> pruned;  // sorted by id
    std::uint64_t min_uses = 0;
    double utility_threshold = 0;
};

// Prunes through MemoryStore::forget_pass and reports the pruned entries' final stats.
// Needs no model access.
ForgetReport run_forgetting(MemoryStore& store, const LifecycleConfig& config);

nlohmann::json to_json(const SentenceOutcome& outcome);
nlohmann::json to_json(const InitReport& report);
nlohmann::json to_json(const UpdateReport& report);
nlohmann::json to_json(const ForgetReport& report);

// Memory generation, optimization and forgetting.
//
// Model calls for distinct sentences may run concurrently; every store mutation happens on
// the calling thread, in dataset order.
class KnowledgeLifecycle {
public:
    KnowledgeLifecycle(llm::LlmGateway& gateway, llm::Embedder& embedder, const Catalog& catalog,
                       LifecycleConfig config);

    // One SKR for `target`, grounded in the official definitions of every label involved
    // and in `similar`. Validation failures get one re-ask. Throws GenerationError.
    GeneratedSkr generate_entry(const LabeledSentence& target, const std::vector<LabeledSentence>& similar);

    // Builds memory from a labeled dataset. Similar sentences come from the whole dataset.
    // A generated state within merge_threshold of an existing state is merged into that
    // entry (append-only) instead of creating a duplicate.
    InitReport initialize_memory(const std::vector<LabeledSentence>& dataset, MemoryStore& store,
                                 const InitOptions& options = {});

    // Integrates new labeled evidence; similar sentences come from store provenance. Merge
    // proposals are collected over the whole batch, so several proposals for one
    // (entry, technique) go through resolve_action_conflict before anything is written.
    UpdateReport update_memory(MemoryStore& store, const std::vector<LabeledSentence>& sentences);
    UpdateReport update_memory(MemoryStore& store, const LabeledSentence& sentence);

    // Picks or synthesizes one manifestation among competing proposals. Identical proposals
    // short-circuit without a model call; on gateway failure the lexicographically
    // smallest candidate is returned and a warning appended.
    std::string resolve_action_conflict(const std::string& state, const TechniqueId& technique,
                                        const std::vector<std::string>& candidates,
                                        std::vector<std::string>* warnings = nullptr,
                                        const std::map<TechniqueId, std::string>& existing_actions = {});

    ForgetReport run_forgetting(MemoryStore& store);

    const LifecycleConfig& config() const noexcept { return config_; }

    // Labels mapped to catalog granularity: kept when known, otherwise replaced by a known
    // parent. Throws GenerationError for labels with neither.
    std::set<TechniqueId> resolve_labels(const LabeledSentence& sentence, std::vector<std::string>* notes) const;

private:
    struct Candidate {
        std::size_t index;
        double score;
    };

    MemoryEntry make_entry(MemoryStore& store, const GeneratedSkr& generated, const LabeledSentence& source);
    SourceSentenceRef provenance_of(const LabeledSentence& s) const;
    std::vector<llm::DefinitionView> definitions_for(const std::set<TechniqueId>& ids) const;
    std::vector<Embedding> embed_all(const std::vector<std::string>& texts);
    std::vector<std::size_t> nearest(const Embedding& query, const std::vector<Embedding>& pool,
                                     const std::vector<std::string>& pool_ids, std::size_t k,
                                     const std::string& exclude_id) const;

    llm::LlmGateway& gateway_;
    llm::Embedder& embedder_;
    const Catalog& catalog_;
    LifecycleConfig config_;
};

} // namespace ttpx
