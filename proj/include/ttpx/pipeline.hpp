#pragma once

#include "ttpx/catalog.hpp"
#include "ttpx/llm/embedder.hpp"
#include "ttpx/llm/gateway.hpp"
#include "ttpx/memory_store.hpp"

#include <nlohmann/json_fwd.hpp>

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ttpx {

enum class Stage { Stage1, Stage2, External };

std::string_view to_string(Stage stage);

struct Delta {
    std::set<TechniqueId> added;
    std::set<TechniqueId> removed;

    bool empty() const noexcept { return added.empty() && removed.empty(); }
    bool operator==(const Delta&) const = default;
};

struct Classification {
    std::set<TechniqueId> technique_ids;
    std::string rationale;
    Stage stage = Stage::Stage1;
    std::set<TechniqueId> candidates_considered;
    // Entries whose knowledge fed the decision, in retrieval order.
    std::vector<std::string> retrieved_entry_ids;
    std::vector<std::string> warnings;
    // Input vs. output, for standardized external predictions.
    std::optional<Delta> delta;

    bool operator==(const Classification&) const = default;
};

struct PipelineConfig {
    std::size_t k_state = 5;
    std::size_t k_action = 5;
    bool allow_empty = true;

    void validate() const;
};

// A stage could not produce a classification. Carries what had been retrieved so far.
class ExtractionError : public Error {
public:
    ExtractionError(Stage stage, std::vector<std::string> trace, const std::string& what)
        : Error(std::string(to_string(stage)) + ": " + what), stage_(stage), trace_(std::move(trace)) {}
    Stage stage() const noexcept { return stage_; }
    const std::vector<std::string>& trace() const noexcept { return trace_; }

private:
    Stage stage_;
    std::vector<std::string> trace_;
};

// Every externally supplied ID was unusable.
class ExternalInputError : public Error {
public:
    explicit ExternalInputError(std::vector<std::string> rejected);
    const std::vector<std::string>& rejected() const noexcept { return rejected_; }

private:
    std::vector<std::string> rejected_;
};

struct BatchItem {
    std::string id;
    std::string text;
    // Raw external technique IDs for VerifyExternal mode.
    std::vector<std::string> external;
};

struct BatchResult {
    std::string id;
    std::optional<Classification> classification;
    // Set on failure.
    std::string error;
    std::optional<Stage> failed_stage;
    std::vector<std::string> trace;

    bool ok() const noexcept { return classification.has_value(); }
    bool operator==(const BatchResult&) const = default;
};

enum class BatchMode { Full, Stage1, VerifyExternal };

BatchMode parse_batch_mode(std::string_view name);
std::string_view to_string(BatchMode mode);

// Two-stage extraction. Never writes to the store; safe for concurrent use.
class ExtractionPipeline {
public:
    ExtractionPipeline(const MemoryStore& store, llm::LlmGateway& gateway, llm::Embedder& embedder,
                       const Catalog* catalog, PipelineConfig config);

    // Throws EmptyStoreError, ExtractionError.
    Classification stage1_classify(const std::string& text) const;

    // Contrastive verification of `prior`. An empty prior is returned unchanged with a
    // warning; so is a prior no memory entry covers.
    Classification stage2_verify(const std::string& text, const Classification& prior) const;
    Classification stage2_verify(const std::string& text, const std::set<TechniqueId>& prior) const;

    // stage1 then stage2, traces concatenated.
    Classification extract(const std::string& text) const;

    // Stage 2 over an external system's labels. Invalid or unknown IDs become warnings;
    // throws ExternalInputError when none remain.
    Classification standardize_external(const std::string& text, const std::vector<std::string>& external_ids) const;

    // Results in input order; one failing item never aborts the batch.
    std::vector<BatchResult> batch_extract(const std::vector<BatchItem>& items, BatchMode mode,
                                           std::size_t worker_limit) const;

    const PipelineConfig& config() const noexcept { return config_; }

private:
    Classification verify(const std::string& text, const std::set<TechniqueId>& prior,
                          std::vector<std::string> warnings) const;
    std::set<TechniqueId> accept(const llm::ClassificationReply& reply, const std::set<TechniqueId>& candidates,
                                 std::vector<std::string>& warnings) const;
    std::map<TechniqueId, std::string> names_for(const std::set<TechniqueId>& ids) const;

    const MemoryStore& store_;
    llm::LlmGateway& gateway_;
    llm::Embedder& embedder_;
    const Catalog* catalog_;
    PipelineConfig config_;
};

nlohmann::json to_json(const Classification& c);
// One output line (no trailing newline).
std::string to_jsonl_line(const BatchResult& r);

} // namespace ttpx
