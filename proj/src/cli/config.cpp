#include "ttpx/cli/config.hpp"

#include "ttpx/io.hpp"

#include <nlohmann/json.hpp>

#include <cerrno>
#include <cstring>
#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

namespace ttpx::cli {

using nlohmann::json;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : (base / path).lexically_normal();
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key '" + where + key + "' has the wrong type");
    }
}

const json& section(const json& root, const char* key) {
    static const json empty = json::object();
    auto it = root.find(key);
    if (it == root.end() || it->is_null()) return empty;
    if (!it->is_object()) throw ConfigError(std::string("config key '") + key + "' must be an object");
    return *it;
}

std::string required_string(const json& obj, const char* key, const std::string& where) {
    auto v = get_or<std::string>(obj, key, "", where);
    if (v.empty()) throw ConfigError("config key '" + where + key + "' is required");
    return v;
}

llm::RemoteEndpoint endpoint_from(const json& obj, const std::string& where, const std::string& default_path) {
    llm::RemoteEndpoint ep;
    ep.base_url = required_string(obj, "base_url", where);
    ep.path = get_or<std::string>(obj, "path", default_path, where);
    ep.model = required_string(obj, "model", where);
    ep.api_key_env = get_or<std::string>(obj, "api_key_env", "", where);
    ep.timeout = std::chrono::milliseconds(get_or<std::int64_t>(obj, "timeout_ms", 60000, where));
    return ep;
}

bool is_remote(const std::string& provider) {
    return provider == "openai-compatible" || provider == "openai" || provider == "remote";
}

} // namespace

bool AppConfig::logical_timestamps() const {
    switch (timestamps) {
    case TimestampMode::Logical: return true;
    case TimestampMode::Wall: return false;
    case TimestampMode::Auto: return chat.kind == ChatProviderConfig::Kind::Mock;
    }
    return false;
}

const fs::path& AppConfig::dataset(const std::string& name) const {
    auto it = datasets.find(name);
    if (it == datasets.end()) throw ConfigError("no dataset '" + name + "' configured (datasets." + name + ")");
    return it->second;
}

void require_file(const fs::path& path, const std::string& what) {
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) throw ConfigError(what + " not found: " + path.string());
}

AppConfig parse_config(std::string_view text, const fs::path& base_dir) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config must be a JSON object");

    AppConfig cfg;
    const auto& cat = section(root, "catalog");
    cfg.catalog_path = resolve(base_dir, required_string(cat, "path", "catalog."));
    try {
        cfg.catalog_format = parse_catalog_format(get_or<std::string>(cat, "format", "simplified-json", "catalog."));
    } catch (const Error& e) {
        throw ConfigError(std::string("catalog.format: ") + e.what());
    }
    cfg.catalog_version = get_or<std::string>(cat, "version", "", "catalog.");

    cfg.memory_path = resolve(base_dir, required_string(root, "memory", ""));
    for (const auto& [name, value] : section(root, "datasets").items()) {
        if (!value.is_string()) throw ConfigError("config key 'datasets." + name + "' must be a path");
        cfg.datasets.emplace(name, resolve(base_dir, value.get<std::string>()));
    }

    const auto& chat = section(root, "chat");
    const auto chat_provider = get_or<std::string>(chat, "provider", "", "chat.");
    if (chat_provider == "mock") {
        cfg.chat.kind = ChatProviderConfig::Kind::Mock;
        cfg.chat.mock_script = resolve(base_dir, required_string(chat, "script", "chat."));
        cfg.chat.params.model_name = "mock";
    } else if (is_remote(chat_provider)) {
        cfg.chat.kind = ChatProviderConfig::Kind::Remote;
        cfg.chat.endpoint = endpoint_from(chat, "chat.", "/v1/chat/completions");
        cfg.chat.params.model_name = cfg.chat.endpoint.model;
        cfg.chat.params.temperature = get_or<double>(chat, "temperature", 0.0, "chat.");
        cfg.chat.params.max_output_tokens = get_or<int>(chat, "max_output_tokens", 1024, "chat.");
        cfg.chat.params.request_timeout = cfg.chat.endpoint.timeout;
        cfg.chat.params.max_retries = get_or<int>(chat, "max_retries", 3, "chat.");
    } else if (chat_provider.empty()) {
        throw ConfigError("config key 'chat.provider' is required (mock | openai-compatible)");
    } else {
        throw ConfigError("unknown chat.provider '" + chat_provider + "'");
    }

    const auto& emb = section(root, "embedding");
    const auto emb_provider = get_or<std::string>(emb, "provider", "hashing", "embedding.");
    if (emb_provider == "hashing") {
        cfg.embedding.kind = EmbeddingProviderConfig::Kind::Hashing;
        cfg.embedding.dim = get_or<std::size_t>(emb, "dim", 256, "embedding.");
    } else if (is_remote(emb_provider)) {
        cfg.embedding.kind = EmbeddingProviderConfig::Kind::Remote;
        cfg.embedding.endpoint = endpoint_from(emb, "embedding.", "/v1/embeddings");
        cfg.embedding.dim = get_or<std::size_t>(emb, "dim", 0, "embedding.");
    } else {
        throw ConfigError("unknown embedding.provider '" + emb_provider + "'");
    }
    if (cfg.embedding.dim == 0) throw ConfigError("embedding.dim must be positive");

    const auto& lc = section(root, "lifecycle");
    cfg.lifecycle.similar_k = get_or<std::size_t>(lc, "similar_k", cfg.lifecycle.similar_k, "lifecycle.");
    cfg.lifecycle.merge_threshold = get_or<double>(lc, "merge_threshold", cfg.lifecycle.merge_threshold, "lifecycle.");
    cfg.lifecycle.min_uses = get_or<std::uint64_t>(lc, "min_uses", cfg.lifecycle.min_uses, "lifecycle.");
    cfg.lifecycle.utility_threshold =
        get_or<double>(lc, "utility_threshold", cfg.lifecycle.utility_threshold, "lifecycle.");
    cfg.lifecycle.dataset_id = get_or<std::string>(lc, "dataset_id", cfg.lifecycle.dataset_id, "lifecycle.");

    const auto& pc = section(root, "pipeline");
    cfg.pipeline.k_state = get_or<std::size_t>(pc, "k_state", cfg.pipeline.k_state, "pipeline.");
    cfg.pipeline.k_action = get_or<std::size_t>(pc, "k_action", cfg.pipeline.k_action, "pipeline.");
    cfg.pipeline.allow_empty = get_or<bool>(pc, "allow_empty", cfg.pipeline.allow_empty, "pipeline.");

    const auto& gw = section(root, "gateway");
    cfg.gateway.context_budget_tokens =
        get_or<std::size_t>(gw, "context_budget_tokens", cfg.gateway.context_budget_tokens, "gateway.");
    cfg.gateway.max_in_flight = get_or<std::size_t>(gw, "max_in_flight", cfg.gateway.max_in_flight, "gateway.");
    cfg.gateway.backoff_base =
        std::chrono::milliseconds(get_or<std::int64_t>(gw, "backoff_ms", cfg.gateway.backoff_base.count(), "gateway."));

    cfg.workers = get_or<std::size_t>(root, "workers", 1, "");
    if (auto log = get_or<std::string>(root, "log", "", ""); !log.empty()) cfg.log_path = resolve(base_dir, log);
    if (auto t = get_or<std::string>(root, "templates", "", ""); !t.empty()) cfg.templates_dir = resolve(base_dir, t);
    const auto ts = get_or<std::string>(root, "timestamps", "auto", "");
    if (ts == "auto")
        cfg.timestamps = TimestampMode::Auto;
    else if (ts == "logical")
        cfg.timestamps = TimestampMode::Logical;
    else if (ts == "wall")
        cfg.timestamps = TimestampMode::Wall;
    else
        throw ConfigError("timestamps must be auto, logical or wall");
    cfg.strict_labels = get_or<bool>(root, "strict_labels", false, "");
    cfg.parent_resolution = get_or<bool>(root, "parent_resolution", false, "");

    try {
        cfg.lifecycle.validate();
        cfg.pipeline.validate();
        cfg.chat.params.validate();
    } catch (const ValidationError& e) {
        throw ConfigError(e.what());
    }
    if (cfg.workers == 0) throw ConfigError("workers must be at least 1");
    if (cfg.gateway.max_in_flight == 0 || cfg.gateway.max_in_flight > 1024)
        throw ConfigError("gateway.max_in_flight must lie in [1, 1024]");
    return cfg;
}

AppConfig load_config(const fs::path& path) {
    std::string text;
    try {
        text = io::read_file(path);
    } catch (const IoError& e) {
        throw ConfigError(std::string("cannot read config: ") + e.what());
    }
    auto cfg = parse_config(text, fs::absolute(path).parent_path());
    cfg.source = path;
    return cfg;
}

FileLock::FileLock(const fs::path& guarded) {
    const auto lock_path = guarded.string() + ".lock";
    // First run: the memory directory may not exist yet.
    if (guarded.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(guarded.parent_path(), ec);
    }
    fd_ = ::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw IoError("cannot open lock file " + lock_path + ": " + std::strerror(errno));
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
        int err = errno;
        ::close(fd_);
        fd_ = -1;
        if (err == EWOULDBLOCK) throw LockError("memory store is locked by another process (" + lock_path + ")");
        throw IoError("cannot lock " + lock_path + ": " + std::strerror(err));
    }
}

FileLock::~FileLock() {
    if (fd_ >= 0) {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
}

} // namespace ttpx::cli
