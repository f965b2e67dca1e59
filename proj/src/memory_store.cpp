#include "ttpx/memory_store.hpp"

#include "ttpx/io.hpp"
#include "ttpx/simd/kernels.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <sstream>

namespace ttpx {

using nlohmann::json;

namespace {

constexpr const char* kFormatName = "skr-memory";

bool ranks_before(double sa, const std::string& ida, double sb, const std::string& idb) {
    if (sa != sb) return sa > sb;
    return ida < idb;
}

void check_vector(const Embedding& v, std::size_t dim, const std::string& what, std::vector<std::string>& out) {
    if (v.size() != dim) {
        out.push_back(what + " has dimension " + std::to_string(v.size()) + ", expected " + std::to_string(dim));
        return;
    }
    double norm = simd::l2_norm(v);
    if (!(std::abs(norm - 1.0) <= kUnitNormTolerance))
        out.push_back(what + " is not unit length (norm " + std::to_string(norm) + ")");
}

json vector_to_json(const Embedding& v) {
    json arr = json::array();
    for (float x : v) arr.push_back(static_cast<double>(x));
    return arr;
}

Embedding vector_from_json(const json& arr) {
    if (!arr.is_array()) throw ParseError("embedding is not an array");
    Embedding v;
    v.reserve(arr.size());
    for (const auto& x : arr) {
        if (!x.is_number()) throw ParseError("embedding component is not a number");
        v.push_back(static_cast<float>(x.get<double>()));
    }
    return v;
}

std::uint64_t id_sequence(const std::string& id) {
    if (id.size() < 2 || id[0] != 'm') return 0;
    std::uint64_t n = 0;
    for (std::size_t i = 1; i < id.size(); ++i) {
        if (id[i] < '0' || id[i] > '9') return 0;
        n = n * 10 + static_cast<std::uint64_t>(id[i] - '0');
    }
    return n;
}

} // namespace

json entry_to_json(const MemoryEntry& e) {
    json j;
    j["id"] = e.id;
    j["skr"] = skr_to_json(e.skr);
    j["state_embedding"] = vector_to_json(e.state_embedding);
    json actions = json::object();
    for (const auto& [id, v] : e.action_embeddings) actions[id.str()] = vector_to_json(v);
    j["action_embeddings"] = std::move(actions);
    json prov = json::array();
    for (const auto& p : e.provenance) {
        json labels = json::array();
        for (const auto& l : p.labels) labels.push_back(l.str());
        prov.push_back({{"dataset_id", p.dataset_id}, {"sentence_id", p.sentence_id}, {"text", p.text},
                        {"labels", std::move(labels)}});
    }
    j["provenance"] = std::move(prov);
    j["stats"] = {{"uses", e.stats.uses}, {"hits", e.stats.hits}};
    j["created_at"] = e.created_at;
    j["updated_at"] = e.updated_at;
    return j;
}

MemoryEntry entry_from_json(const json& j) {
    try {
        MemoryEntry e;
        e.id = j.at("id").get<std::string>();
        e.skr = skr_from_json(j.at("skr"));
        e.state_embedding = vector_from_json(j.at("state_embedding"));
        for (const auto& [key, v] : j.at("action_embeddings").items())
            e.action_embeddings.emplace(TechniqueId::parse(key), vector_from_json(v));
        for (const auto& p : j.at("provenance")) {
            SourceSentenceRef ref;
            ref.dataset_id = p.at("dataset_id").get<std::string>();
            ref.sentence_id = p.at("sentence_id").get<std::string>();
            ref.text = p.at("text").get<std::string>();
            for (const auto& l : p.at("labels")) ref.labels.insert(TechniqueId::parse(l.get<std::string>()));
            e.provenance.push_back(std::move(ref));
        }
        e.stats.uses = j.at("stats").at("uses").get<std::uint64_t>();
        e.stats.hits = j.at("stats").at("hits").get<std::uint64_t>();
        e.created_at = j.at("created_at").get<std::int64_t>();
        e.updated_at = j.at("updated_at").get<std::int64_t>();
        return e;
    } catch (const json::exception& ex) {
        throw ParseError(std::string("malformed memory entry: ") + ex.what());
    } catch (const GrammarError& ex) {
        throw ParseError(std::string("malformed memory entry: ") + ex.what());
    }
}

MemoryStore::MemoryStore(EmbedderFingerprint fingerprint, Clock clock)
    : fingerprint_(std::move(fingerprint)), clock_(std::move(clock)) {
    if (fingerprint_.dim == 0) throw ValidationError("embedding dimension must be positive");
}

MemoryStore::MemoryStore(MemoryStore&& other) noexcept {
    std::unique_lock lock(other.mu_);
    fingerprint_ = std::move(other.fingerprint_);
    clock_ = std::move(other.clock_);
    entries_ = std::move(other.entries_);
    next_seq_ = other.next_seq_;
    index_entries_ = std::move(other.index_entries_);
    index_rows_ = std::move(other.index_rows_);
}

MemoryStore& MemoryStore::operator=(MemoryStore&& other) noexcept {
    if (this == &other) return *this;
    std::scoped_lock lock(mu_, other.mu_);
    fingerprint_ = std::move(other.fingerprint_);
    clock_ = std::move(other.clock_);
    entries_ = std::move(other.entries_);
    next_seq_ = other.next_seq_;
    index_entries_ = std::move(other.index_entries_);
    index_rows_ = std::move(other.index_rows_);
    return *this;
}

std::size_t MemoryStore::size() const {
    std::shared_lock lock(mu_);
    return entries_.size();
}

bool MemoryStore::contains(const std::string& id) const {
    std::shared_lock lock(mu_);
    return entries_.count(id) != 0;
}

EntryPtr MemoryStore::get(const std::string& id) const {
    std::shared_lock lock(mu_);
    auto it = entries_.find(id);
    if (it == entries_.end()) throw UnknownEntryError(id);
    return it->second;
}

std::vector<EntryPtr> MemoryStore::entries() const {
    std::shared_lock lock(mu_);
    std::vector<EntryPtr> out;
    out.reserve(entries_.size());
    for (const auto& [id, e] : entries_) out.push_back(e);
    return out;
}

std::string MemoryStore::next_id() {
    std::unique_lock lock(mu_);
    for (;;) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "m%08llu", static_cast<unsigned long long>(next_seq_++));
        if (!entries_.count(buf)) return buf;
    }
}

std::vector<std::string> MemoryStore::check_entry(const MemoryEntry& entry) const {
    std::shared_lock lock(mu_);
    return check_entry_locked(entry);
}

std::vector<std::string> MemoryStore::check_entry_locked(const MemoryEntry& e) const {
    std::vector<std::string> out;
    if (e.id.empty()) out.push_back("entry id is empty");
    for (auto& v : validate_skr(e.skr)) out.push_back("skr: " + v);
    check_vector(e.state_embedding, fingerprint_.dim, "state embedding", out);
    for (const auto& [id, v] : e.action_embeddings) {
        if (!e.skr.actions.count(id)) out.push_back("action embedding " + id.str() + " has no action");
        check_vector(v, fingerprint_.dim, "action embedding " + id.str(), out);
    }
    for (const auto& [id, text] : e.skr.actions)
        if (!e.action_embeddings.count(id)) out.push_back("action " + id.str() + " has no embedding");
    if (e.provenance.empty()) out.push_back("provenance is empty");
    for (const auto& p : e.provenance) {
        if (p.text.empty()) out.push_back("provenance sentence " + p.sentence_id + " has empty text");
        if (p.labels.empty()) out.push_back("provenance sentence " + p.sentence_id + " has no labels");
    }
    if (e.stats.hits > e.stats.uses) out.push_back("hits exceed uses");
    return out;
}

std::string MemoryStore::insert(MemoryEntry entry) {
    std::unique_lock lock(mu_);
    if (entries_.count(entry.id)) throw DuplicateEntryError(entry.id);
    auto violations = check_entry_locked(entry);
    if (!violations.empty()) {
        std::string msg = "invalid memory entry '" + entry.id + "':";
        for (const auto& v : violations) msg += " " + v + ";";
        throw ValidationError(msg);
    }
    next_seq_ = std::max(next_seq_, id_sequence(entry.id) + 1);
    auto ptr = std::make_shared<const MemoryEntry>(std::move(entry));
    entries_.emplace(ptr->id, ptr);
    index_entries_.push_back(ptr);
    index_rows_.insert(index_rows_.end(), ptr->state_embedding.begin(), ptr->state_embedding.end());
    return ptr->id;
}

void MemoryStore::rebuild_index_locked() {
    index_entries_.clear();
    index_rows_.clear();
    index_rows_.reserve(entries_.size() * fingerprint_.dim);
    for (const auto& [id, e] : entries_) {
        index_entries_.push_back(e);
        index_rows_.insert(index_rows_.end(), e->state_embedding.begin(), e->state_embedding.end());
    }
}

std::vector<StateHit> MemoryStore::retrieve_by_state(std::span<const float> query, std::size_t k) const {
    if (k == 0) throw ValidationError("retrieval k must be at least 1");
    if (query.size() != fingerprint_.dim) throw ValidationError("query dimension mismatch");
    std::shared_lock lock(mu_);
    if (entries_.empty()) throw EmptyStoreError();

    const std::size_t n = index_entries_.size();
    std::vector<double> scores(n);
    simd::active_kernels().dot_rows(query.data(), index_rows_.data(), n, fingerprint_.dim, scores.data());

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    const std::size_t take = std::min(k, n);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          return ranks_before(scores[a], index_entries_[a]->id, scores[b], index_entries_[b]->id);
                      });
    std::vector<StateHit> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) out.push_back({index_entries_[order[i]], scores[order[i]]});
    return out;
}

ActionRetrieval MemoryStore::retrieve_by_action(std::span<const float> query, const std::set<TechniqueId>& focus,
                                                std::size_t k) const {
    if (k == 0) throw ValidationError("retrieval k must be at least 1");
    if (focus.empty()) throw ValidationError("action retrieval needs at least one focus technique");
    if (query.size() != fingerprint_.dim) throw ValidationError("query dimension mismatch");
    std::shared_lock lock(mu_);

    const auto& kernels = simd::active_kernels();
    std::vector<ActionHit> candidates;
    for (const auto& [id, e] : entries_) {
        for (const auto& [tech, emb] : e->action_embeddings) {
            bool eligible = std::any_of(focus.begin(), focus.end(),
                                        [&](const TechniqueId& f) { return parent_child_related(f, tech); });
            if (!eligible) continue;
            candidates.push_back({e, tech, kernels.dot(query.data(), emb.data(), emb.size())});
        }
    }
    ActionRetrieval out;
    if (candidates.empty()) {
        out.no_coverage = true;
        return out;
    }
    const std::size_t take = std::min(k, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take), candidates.end(),
                      [](const ActionHit& a, const ActionHit& b) {
                          if (a.score != b.score) return a.score > b.score;
                          if (a.entry->id != b.entry->id) return a.entry->id < b.entry->id;
                          return a.technique < b.technique;
                      });
    candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(take), candidates.end());
    out.hits = std::move(candidates);
    return out;
}

EntryPtr MemoryStore::add_actions(const std::string& entry_id, const std::map<TechniqueId, NewAction>& new_actions,
                                  const std::vector<SourceSentenceRef>& new_provenance) {
    std::unique_lock lock(mu_);
    auto it = entries_.find(entry_id);
    if (it == entries_.end()) throw UnknownEntryError(entry_id);
    if (new_actions.empty() && new_provenance.empty()) return it->second;

    MemoryEntry updated = *it->second;
    for (const auto& [tech, action] : new_actions) {
        if (updated.skr.actions.count(tech)) throw ActionCollisionError(entry_id, tech);
        updated.skr.actions.emplace(tech, action.text);
        updated.action_embeddings.emplace(tech, action.embedding);
        if (!action.examples.empty()) updated.skr.examples[tech] = action.examples;
    }
    updated.provenance.insert(updated.provenance.end(), new_provenance.begin(), new_provenance.end());
    updated.updated_at = std::max(clock_(), updated.updated_at + 1);

    auto violations = check_entry_locked(updated);
    if (!violations.empty()) {
        std::string msg = "add_actions on '" + entry_id + "' would break invariants:";
        for (const auto& v : violations) msg += " " + v + ";";
        throw ValidationError(msg);
    }
    auto ptr = std::make_shared<const MemoryEntry>(std::move(updated));
    it->second = ptr;
    // State embedding is unchanged; only the pointer in the index needs refreshing.
    for (auto& e : index_entries_)
        if (e->id == entry_id) e = ptr;
    return ptr;
}

void MemoryStore::record_outcome(const std::vector<std::string>& entry_ids, bool correct) {
    std::unique_lock lock(mu_);
    for (const auto& id : entry_ids)
        if (!entries_.count(id)) throw UnknownEntryError(id);
    for (const auto& id : entry_ids) {
        auto& slot = entries_[id];
        MemoryEntry updated = *slot;
        ++updated.stats.uses;
        if (correct) ++updated.stats.hits;
        slot = std::make_shared<const MemoryEntry>(std::move(updated));
    }
    rebuild_index_locked();
}

std::vector<std::string> MemoryStore::forget_pass(std::uint64_t min_uses, double utility_threshold) {
    std::unique_lock lock(mu_);
    std::vector<std::string> pruned;
    for (auto it = entries_.begin(); it != entries_.end();) {
        const auto& s = it->second->stats;
        if (s.uses >= min_uses && s.utility() < utility_threshold) {
            pruned.push_back(it->first);
            it = entries_.erase(it);
        } else {
            ++it;
        }
    }
    if (!pruned.empty()) rebuild_index_locked();
    return pruned;  // map order is already sorted
}

std::string MemoryStore::serialize() const {
    std::shared_lock lock(mu_);
    nlohmann::ordered_json header;
    header["format"] = kFormatName;
    header["version"] = kMemoryFormatVersion;
    header["dim"] = fingerprint_.dim;
    header["embedder"] = fingerprint_.name;
    std::string out = header.dump();
    out += '\n';
    for (const auto& [id, e] : entries_) {
        out += entry_to_json(*e).dump();
        out += '\n';
    }
    return out;
}

void MemoryStore::persist(const std::filesystem::path& path) const { io::write_file_atomic(path, serialize()); }

MemoryStore MemoryStore::parse(std::string_view text, Clock clock) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line)) throw ParseError("memory file is empty");
    json header;
    try {
        header = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed memory header: ") + e.what(), 1);
    }
    if (!header.is_object() || header.value("format", "") != kFormatName)
        throw ParseError("not a skr-memory file", 1);
    if (!header.contains("version") || !header["version"].is_number_integer() ||
        header["version"].get<int>() != kMemoryFormatVersion)
        throw VersionMismatchError("memory file version " + header.value("version", json()).dump() +
                                   " is not supported (expected " + std::to_string(kMemoryFormatVersion) + ")");
    EmbedderFingerprint fp;
    try {
        fp.dim = header.at("dim").get<std::size_t>();
        fp.name = header.at("embedder").get<std::string>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed memory header: ") + e.what(), 1);
    }
    MemoryStore store(fp, std::move(clock));
    std::size_t line_no = 1;
    std::string prev_id;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(std::string("malformed memory entry: ") + e.what(), line_no);
        }
        MemoryEntry entry;
        try {
            entry = entry_from_json(obj);
        } catch (const ParseError& e) {
            throw ParseError(e.what(), line_no);
        } catch (const ValidationError& e) {
            throw ParseError(e.what(), line_no);
        }
        if (!prev_id.empty() && entry.id <= prev_id) throw ParseError("memory entries are not sorted by id", line_no);
        prev_id = entry.id;
        store.insert(std::move(entry));
    }
    return store;
}

MemoryStore MemoryStore::load(const std::filesystem::path& path, Clock clock) {
    return parse(io::read_file(path), std::move(clock));
}

std::uint64_t MemoryStore::checksum() const { return io::fnv1a64(serialize()); }

} // namespace ttpx
