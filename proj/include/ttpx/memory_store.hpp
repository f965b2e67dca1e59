#pragma once

#include "ttpx/clock.hpp"
#include "ttpx/embedding.hpp"
#include "ttpx/errors.hpp"
#include "ttpx/skr.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

namespace ttpx {

struct UsageStats {
    std::uint64_t uses = 0;  // retrievals that fed a final classification
    std::uint64_t hits = 0;  // of those, classifications intersecting gold

    // Laplace-smoothed hit rate.
    double utility() const noexcept {
        return (static_cast<double>(hits) + 1.0) / (static_cast<double>(uses) + 2.0);
    }
    bool operator==(const UsageStats&) const = default;
};

struct SourceSentenceRef {
    std::string dataset_id;
    std::string sentence_id;
    std::string text;
    std::set<TechniqueId> labels;

    bool operator==(const SourceSentenceRef&) const = default;
};

struct MemoryEntry {
    std::string id;
    SkrInstance skr;
    Embedding state_embedding;
    std::map<TechniqueId, Embedding> action_embeddings;
    std::vector<SourceSentenceRef> provenance;
    UsageStats stats;
    std::int64_t created_at = 0;
    std::int64_t updated_at = 0;

    bool operator==(const MemoryEntry&) const = default;
};

using EntryPtr = std::shared_ptr<const MemoryEntry>;

struct StateHit {
    EntryPtr entry;
    double score;
};

struct ActionHit {
    EntryPtr entry;
    TechniqueId technique;
    double score;
};

struct ActionRetrieval {
    std::vector<ActionHit> hits;
    // Set when no entry carries any focus technique (or a parent/child of one).
    bool no_coverage = false;
};

// Payload for append-only action insertion.
struct NewAction {
    std::string text;
    Embedding embedding;
    std::vector<std::string> examples;
};

class EmptyStoreError : public Error {
public:
    EmptyStoreError() : Error("memory store is empty") {}
};

class DuplicateEntryError : public Error {
public:
    explicit DuplicateEntryError(const std::string& id) : Error("duplicate memory entry id '" + id + "'") {}
};

class UnknownEntryError : public Error {
public:
    explicit UnknownEntryError(const std::string& id) : Error("unknown memory entry id '" + id + "'") {}
};

// add_actions would overwrite an existing action.
class ActionCollisionError : public Error {
public:
    ActionCollisionError(const std::string& entry_id, const TechniqueId& technique)
        : Error("entry '" + entry_id + "' already has an action for " + technique.str()) {}
};

class VersionMismatchError : public Error {
public:
    using Error::Error;
};

inline constexpr int kMemoryFormatVersion = 1;

// Persistent SKR memory with exhaustive cosine retrieval.
//
// Concurrency: any number of concurrent readers (retrieval, snapshots) or one writer at a
// time; the store enforces this with an internal shared mutex. Entries are immutable once
// published: mutations swap in a new entry object, so pointers handed to readers stay valid
// and unchanged.
class MemoryStore {
public:
    explicit MemoryStore(EmbedderFingerprint fingerprint, Clock clock = wall_clock());
    MemoryStore(MemoryStore&& other) noexcept;
    MemoryStore& operator=(MemoryStore&& other) noexcept;
    MemoryStore(const MemoryStore&) = delete;
    MemoryStore& operator=(const MemoryStore&) = delete;

    const EmbedderFingerprint& fingerprint() const noexcept { return fingerprint_; }
    std::size_t size() const;
    bool empty() const { return size() == 0; }
    bool contains(const std::string& id) const;
    // Throws UnknownEntryError.
    EntryPtr get(const std::string& id) const;
    // Snapshot sorted by id.
    std::vector<EntryPtr> entries() const;

    // Fresh id not present in the store ("m" + 8 digits).
    std::string next_id();
    std::int64_t now() const { return clock_(); }

    // Invariant violations of `entry` against this store's dimension; empty means valid.
    std::vector<std::string> check_entry(const MemoryEntry& entry) const;

    std::string insert(MemoryEntry entry);

    // Top-k by cosine(query, state), descending; ties by ascending entry id.
    std::vector<StateHit> retrieve_by_state(std::span<const float> query, std::size_t k) const;

    // Top-k (entry, technique) pairs whose technique equals, or is parent/child of, a focus
    // id; ranked by cosine(query, action embedding), ties by entry id then technique.
    ActionRetrieval retrieve_by_action(std::span<const float> query, const std::set<TechniqueId>& focus,
                                       std::size_t k) const;

    // Append-only extension. State and existing actions are never modified. An empty
    // `new_actions` with non-empty provenance only records the contributing sentences.
    EntryPtr add_actions(const std::string& entry_id, const std::map<TechniqueId, NewAction>& new_actions,
                         const std::vector<SourceSentenceRef>& new_provenance);

    void record_outcome(const std::vector<std::string>& entry_ids, bool correct);

    // Removes entries with uses >= min_uses and utility < threshold. Returns sorted ids.
    std::vector<std::string> forget_pass(std::uint64_t min_uses, double utility_threshold);

    // Line-delimited JSON: header line, then one entry per line sorted by id.
    std::string serialize() const;
    void persist(const std::filesystem::path& path) const;
    static MemoryStore parse(std::string_view text, Clock clock = wall_clock());
    static MemoryStore load(const std::filesystem::path& path, Clock clock = wall_clock());

    // FNV-1a over serialize(); used to prove read-only phases left the store untouched.
    std::uint64_t checksum() const;

private:
    void rebuild_index_locked();
    std::vector<std::string> check_entry_locked(const MemoryEntry& entry) const;

    EmbedderFingerprint fingerprint_;
    Clock clock_;
    mutable std::shared_mutex mu_;
    std::map<std::string, EntryPtr> entries_;
    std::uint64_t next_seq_ = 1;
    // Row-major state embeddings aligned with index_entries_.
    std::vector<EntryPtr> index_entries_;
    std::vector<float> index_rows_;
};

nlohmann::json entry_to_json(const MemoryEntry& entry);
MemoryEntry entry_from_json(const nlohmann::json& obj);

} // namespace ttpx
