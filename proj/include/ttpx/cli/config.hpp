#pragma once

#include "ttpx/catalog.hpp"
#include "ttpx/lifecycle.hpp"
#include "ttpx/llm/gateway.hpp"
#include "ttpx/llm/remote.hpp"
#include "ttpx/pipeline.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace ttpx::cli {

namespace fs = std::filesystem;

struct ChatProviderConfig {
    enum class Kind { Mock, Remote };
    Kind kind = Kind::Mock;
    fs::path mock_script;
    llm::RemoteEndpoint endpoint;
    llm::ChatParams params;
};

struct EmbeddingProviderConfig {
    enum class Kind { Hashing, Remote };
    Kind kind = Kind::Hashing;
    std::size_t dim = 256;
    llm::RemoteEndpoint endpoint;
};

enum class TimestampMode { Auto, Logical, Wall };

// One JSON document holding every knob. Relative paths resolve against the file's directory.
//
//   {
//     "catalog": {"path": "...", "format": "simplified-json" | "stix-bundle", "version"?: "..."},
//     "memory": "memory.jsonl",
//     "datasets": {"train": "...", "eval"?: "...", "update"?: "..."},
//     "chat": {"provider": "mock", "script": "mock.json"}
//           | {"provider": "openai-compatible", "base_url", "path"?, "model", "api_key_env"?,
//              "temperature"?, "max_output_tokens"?, "timeout_ms"?, "max_retries"?},
//     "embedding": {"provider": "hashing", "dim"?: 256}
//                | {"provider": "openai-compatible", "base_url", "path"?, "model", "dim", "api_key_env"?},
//     "lifecycle": {"similar_k", "merge_threshold", "min_uses", "utility_threshold", "dataset_id"},
//     "pipeline": {"k_state", "k_action", "allow_empty"},
//     "gateway": {"context_budget_tokens", "max_in_flight", "backoff_ms"},
//     "workers"?: 4, "log"?: "run.log", "templates"?: "dir", "timestamps"?: "auto" | "logical" | "wall",
//     "strict_labels"?: false, "parent_resolution"?: false
//   }
struct AppConfig {
    fs::path source;
    fs::path catalog_path;
    CatalogFormat catalog_format = CatalogFormat::SimplifiedJson;
    std::string catalog_version;
    fs::path memory_path;
    std::map<std::string, fs::path> datasets;
    ChatProviderConfig chat;
    EmbeddingProviderConfig embedding;
    LifecycleConfig lifecycle;
    PipelineConfig pipeline;
    llm::GatewayOptions gateway;
    std::size_t workers = 1;
    std::optional<fs::path> log_path;
    std::optional<fs::path> templates_dir;
    TimestampMode timestamps = TimestampMode::Auto;
    bool strict_labels = false;
    bool parent_resolution = false;

    // Logical timestamps when asked for, or under the mock provider in auto mode.
    bool logical_timestamps() const;
    // Throws ConfigError when a referenced dataset name is not configured.
    const fs::path& dataset(const std::string& name) const;
};

// Throws ConfigError (with the offending key) for unreadable or inconsistent configuration.
AppConfig load_config(const fs::path& path);
AppConfig parse_config(std::string_view text, const fs::path& base_dir);

// Throws ConfigError unless `path` names an existing regular file.
void require_file(const fs::path& path, const std::string& what);

// Advisory exclusive lock held for the object's lifetime (flock on a sibling ".lock" file).
class FileLock {
public:
    // Throws LockError when another process holds the lock.
    explicit FileLock(const fs::path& guarded);
    ~FileLock();
    FileLock(const FileLock&) = delete;
    FileLock& operator=(const FileLock&) = delete;

private:
    int fd_ = -1;
};

class LockError : public Error {
public:
    using Error::Error;
};

} // namespace ttpx::cli
