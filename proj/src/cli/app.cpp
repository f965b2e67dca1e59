#include "ttpx/cli/app.hpp"

#include "ttpx/cli/config.hpp"
#include "ttpx/evaluation.hpp"
#include "ttpx/io.hpp"
#include "ttpx/lifecycle.hpp"
#include "ttpx/llm/mock_chat.hpp"
#include "ttpx/llm/remote.hpp"
#include "ttpx/pipeline.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <atomic>
#include <fstream>
#include <sstream>

namespace ttpx::cli {

using nlohmann::json;

namespace {

struct Options {
    std::string config_path;
    std::optional<std::size_t> workers;
    std::string mock_script;

    std::string input;
    std::string output;
    std::string mode = "full";
    std::string predictions;
    std::string report_dir;
    std::string technique;
    std::string contains;
    std::string entry_id;
    bool fresh = false;
    bool feedback = false;
    std::optional<bool> parent_resolution;
};

// Everything a command needs, built before the first model call so configuration
// problems surface with exit code 2 and no side effects.
struct Runtime {
    AppConfig cfg;
    Catalog catalog;
    std::unique_ptr<llm::Embedder> embedder;
    std::shared_ptr<llm::ChatBackend> backend;
    std::unique_ptr<llm::LlmGateway> gateway;
    std::shared_ptr<std::atomic<std::int64_t>> logical;
    Clock clock;
    std::ofstream log;

    void note(const std::string& line) {
        if (log) log << line << '\n' << std::flush;
    }
    // Continue logical time after the newest timestamp in a loaded store.
    void advance_clock(const MemoryStore& store) {
        if (!logical) return;
        std::int64_t latest = 0;
        for (const auto& e : store.entries()) latest = std::max({latest, e->created_at, e->updated_at});
        std::int64_t cur = logical->load();
        if (latest > cur) logical->store(latest);
    }
    json generated_at() const {
        if (logical) return "logical";
        return wall_clock()();
    }
};

Runtime make_runtime(const Options& opt, bool need_chat) {
    Runtime rt;
    rt.cfg = load_config(opt.config_path);
    auto& cfg = rt.cfg;
    if (opt.workers) {
        if (*opt.workers == 0) throw ConfigError("--workers must be at least 1");
        cfg.workers = *opt.workers;
    }
    if (!opt.mock_script.empty()) {
        cfg.chat.kind = ChatProviderConfig::Kind::Mock;
        cfg.chat.mock_script = fs::absolute(opt.mock_script);
        cfg.chat.params.model_name = "mock";
    }
    if (opt.parent_resolution) cfg.parent_resolution = *opt.parent_resolution;

    require_file(cfg.catalog_path, "catalog");
    try {
        rt.catalog = load_catalog(cfg.catalog_path, cfg.catalog_format, cfg.catalog_version);
    } catch (const Error& e) {
        throw ConfigError(std::string("catalog ") + cfg.catalog_path.string() + ": " + e.what());
    }

    if (cfg.embedding.kind == EmbeddingProviderConfig::Kind::Hashing)
        rt.embedder = std::make_unique<llm::HashingEmbedder>(cfg.embedding.dim);
    else
        rt.embedder = std::make_unique<llm::RemoteEmbedder>(cfg.embedding.endpoint, cfg.embedding.dim);

    if (need_chat) {
        if (cfg.chat.kind == ChatProviderConfig::Kind::Mock) {
            require_file(cfg.chat.mock_script, "mock script");
            rt.backend = std::make_shared<llm::MockChatBackend>(llm::MockChatBackend::from_file(cfg.chat.mock_script));
        } else {
            rt.backend = std::make_shared<llm::RemoteChatBackend>(cfg.chat.endpoint);
        }
        auto templates = cfg.templates_dir ? llm::TemplateSet::from_directory(*cfg.templates_dir)
                                           : llm::TemplateSet::builtin();
        rt.gateway = std::make_unique<llm::LlmGateway>(rt.backend, cfg.chat.params, cfg.gateway, std::move(templates));
    }

    if (cfg.logical_timestamps()) {
        rt.logical = std::make_shared<std::atomic<std::int64_t>>(0);
        rt.clock = [c = rt.logical] { return ++*c; };
    } else {
        rt.clock = wall_clock();
    }
    if (cfg.log_path) rt.log.open(*cfg.log_path, std::ios::app);
    return rt;
}

json config_echo(const Runtime& rt) {
    const auto& c = rt.cfg;
    json out{{"config_file", c.source.string()},
             {"catalog", {{"path", c.catalog_path.string()},
                          {"format", std::string(to_string(c.catalog_format))},
                          {"version", rt.catalog.version()},
                          {"techniques", rt.catalog.size()}}},
             {"memory", c.memory_path.string()},
             {"embedder", {{"name", rt.embedder->fingerprint().name}, {"dim", rt.embedder->fingerprint().dim}}},
             {"lifecycle", {{"similar_k", c.lifecycle.similar_k},
                            {"merge_threshold", c.lifecycle.merge_threshold},
                            {"min_uses", c.lifecycle.min_uses},
                            {"utility_threshold", c.lifecycle.utility_threshold},
                            {"dataset_id", c.lifecycle.dataset_id}}},
             {"pipeline", {{"k_state", c.pipeline.k_state},
                           {"k_action", c.pipeline.k_action},
                           {"allow_empty", c.pipeline.allow_empty}}},
             {"workers", c.workers},
             {"parent_resolution", c.parent_resolution}};
    if (rt.gateway) {
        out["chat"] = {{"backend", rt.gateway->backend_name()},
                       {"model", c.chat.params.model_name},
                       {"temperature", c.chat.params.temperature},
                       {"templates_version", rt.gateway->templates().version()}};
    }
    return out;
}

fs::path beside_memory(const AppConfig& cfg, const std::string& suffix) {
    return cfg.memory_path.parent_path() / (cfg.memory_path.filename().string() + suffix);
}

void write_report(const fs::path& path, const json& report) { io::write_file_atomic(path, report.dump(2) + "\n"); }

MemoryStore load_memory(Runtime& rt) {
    require_file(rt.cfg.memory_path, "memory file");
    auto store = MemoryStore::load(rt.cfg.memory_path, rt.clock);
    if (store.fingerprint() != rt.embedder->fingerprint())
        throw ConfigError("memory was built with embedder " + store.fingerprint().name + "/" +
                          std::to_string(store.fingerprint().dim) + " but the configured embedder is " +
                          rt.embedder->fingerprint().name + "/" + std::to_string(rt.embedder->fingerprint().dim));
    rt.advance_clock(store);
    return store;
}

std::set<std::string> read_checkpoint(const fs::path& path) {
    std::set<std::string> ids;
    std::istringstream in(io::read_file(path));
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ids.insert(line);
    return ids;
}

void write_checkpoint(const fs::path& path, const std::vector<std::string>& ordered) {
    std::string text;
    for (const auto& id : ordered) text += id + "\n";
    io::write_file_atomic(path, text);
}

// --- catalog ---------------------------------------------------------------

int cmd_catalog_check(const Options& opt, std::ostream& out, std::ostream& err) {
    auto cfg = load_config(opt.config_path);
    require_file(cfg.catalog_path, "catalog");
    Catalog catalog;
    try {
        catalog = load_catalog(cfg.catalog_path, cfg.catalog_format, cfg.catalog_version);
    } catch (const IntegrityError& e) {
        err << "catalog check failed: " << e.what() << "\n";
        for (const auto& id : e.offenders()) err << "  " << id << "\n";
        return kExitPartial;
    } catch (const Error& e) {
        err << "catalog check failed: " << e.what() << "\n";
        return kExitPartial;
    }
    std::size_t subs = 0, deprecated = 0;
    for (const auto& [id, rec] : catalog.records()) {
        subs += id.is_subtechnique();
        deprecated += rec.deprecated;
    }
    out << "catalog " << catalog.version() << ": " << catalog.size() << " techniques (" << subs
        << " sub-techniques, " << deprecated << " deprecated)\n";
    return kExitOk;
}

// --- memory ----------------------------------------------------------------

int cmd_memory_init(const Options& opt, std::ostream& out, std::ostream& err) {
    auto rt = make_runtime(opt, true);
    const fs::path dataset_path = opt.input.empty() ? rt.cfg.dataset("train") : fs::path(opt.input);
    require_file(dataset_path, "dataset");
    std::vector<LabeledSentence> dataset;
    try {
        dataset = load_dataset(dataset_path, {true, &rt.catalog, rt.cfg.strict_labels});
    } catch (const ParseError& e) {
        throw ConfigError("dataset " + dataset_path.string() + ": " + e.what());
    }
    if (dataset.empty()) throw ConfigError("dataset " + dataset_path.string() + " is empty");

    FileLock lock(rt.cfg.memory_path);
    const auto checkpoint = beside_memory(rt.cfg, ".checkpoint");
    InitOptions options;
    options.workers = rt.cfg.workers;

    std::optional<MemoryStore> store;
    std::vector<std::string> done;
    if (!opt.fresh && fs::exists(checkpoint) && fs::exists(rt.cfg.memory_path)) {
        store.emplace(load_memory(rt));
        options.processed = read_checkpoint(checkpoint);
        for (const auto& s : dataset)
            if (options.processed.count(s.id)) done.push_back(s.id);
        out << "resuming: " << options.processed.size() << " sentence(s) already processed\n";
    } else {
        store.emplace(rt.embedder->fingerprint(), rt.clock);
    }

    KnowledgeLifecycle lifecycle(*rt.gateway, *rt.embedder, rt.catalog, rt.cfg.lifecycle);
    options.on_commit = [&](const std::vector<std::string>& ids) {
        store->persist(rt.cfg.memory_path);
        done.insert(done.end(), ids.begin(), ids.end());
        write_checkpoint(checkpoint, done);
        rt.note("memory init: committed " + std::to_string(ids.size()) + " sentence(s)");
    };
    auto report = lifecycle.initialize_memory(dataset, *store, options);
    store->persist(rt.cfg.memory_path);
    write_checkpoint(checkpoint, done);

    json doc = to_json(report);
    doc["command"] = "memory init";
    doc["dataset"] = dataset_path.string();
    doc["entries"] = store->size();
    doc["generated_at"] = rt.generated_at();
    doc["config"] = config_echo(rt);
    write_report(beside_memory(rt.cfg, ".init-report.json"), doc);

    for (const auto& o : report.outcomes)
        if (o.path == SentenceOutcome::Path::Failed) err << "sentence " << o.sentence_id << " failed: " << o.reason << "\n";
    out << "memory init: " << dataset.size() << " sentences, " << report.created << " created, " << report.merged
        << " merged, " << report.skipped << " skipped, " << report.failed << " failed; " << store->size()
        << " entries\n";
    return report.failed ? kExitPartial : kExitOk;
}

int cmd_memory_update(const Options& opt, std::ostream& out, std::ostream& err) {
    auto rt = make_runtime(opt, true);
    const fs::path input = opt.input.empty() ? rt.cfg.dataset("update") : fs::path(opt.input);
    require_file(input, "update file");
    std::vector<LabeledSentence> sentences;
    try {
        sentences = load_dataset(input, {true, &rt.catalog, rt.cfg.strict_labels});
    } catch (const ParseError& e) {
        throw ConfigError("update file " + input.string() + ": " + e.what());
    }
    FileLock lock(rt.cfg.memory_path);
    auto store = load_memory(rt);
    if (sentences.empty()) {
        out << "memory update: no sentences, nothing to do\n";
        return kExitOk;
    }
    KnowledgeLifecycle lifecycle(*rt.gateway, *rt.embedder, rt.catalog, rt.cfg.lifecycle);
    auto report = lifecycle.update_memory(store, sentences);
    store.persist(rt.cfg.memory_path);

    json doc = to_json(report);
    doc["command"] = "memory update";
    doc["input"] = input.string();
    doc["entries"] = store.size();
    doc["generated_at"] = rt.generated_at();
    doc["config"] = config_echo(rt);
    write_report(beside_memory(rt.cfg, ".update-report.json"), doc);

    std::map<std::string, std::size_t> paths;
    for (const auto& o : report.outcomes) {
        ++paths[std::string(to_string(o.path))];
        if (o.path == SentenceOutcome::Path::Failed) err << "sentence " << o.sentence_id << " failed: " << o.reason << "\n";
    }
    for (const auto& w : report.warnings) err << "warning: " << w << "\n";
    out << "memory update: " << sentences.size() << " sentences";
    for (const auto& [p, n] : paths) out << ", " << n << " " << p;
    out << "; " << report.conflicts.size() << " conflict(s); " << store.size() << " entries\n";
    return report.failed ? kExitPartial : kExitOk;
}

int cmd_memory_forget(const Options& opt, std::ostream& out, std::ostream&) {
    auto rt = make_runtime(opt, false);
    FileLock lock(rt.cfg.memory_path);
    auto store = load_memory(rt);
    auto report = run_forgetting(store, rt.cfg.lifecycle);
    if (!report.pruned.empty()) store.persist(rt.cfg.memory_path);

    json doc = to_json(report);
    doc["command"] = "memory forget";
    doc["entries"] = store.size();
    doc["generated_at"] = rt.generated_at();
    doc["config"] = config_echo(rt);
    write_report(beside_memory(rt.cfg, ".forget-report.json"), doc);

    for (const auto& p : report.pruned)
        out << "pruned " << p.id << " (uses " << p.stats.uses << ", hits " << p.stats.hits << ", utility "
            << p.utility << ")\n";
    out << report.pruned.size() << " pruned, " << store.size() << " entries remain\n";
    return kExitOk;
}

int cmd_memory_inspect(const Options& opt, std::ostream& out, std::ostream&) {
    auto rt = make_runtime(opt, false);
    auto store = load_memory(rt);
    std::optional<TechniqueId> tech;
    if (!opt.technique.empty()) {
        tech = TechniqueId::try_normalize(opt.technique);
        if (!tech) throw ConfigError("--technique '" + opt.technique + "' is not a technique id");
    }
    std::size_t shown = 0;
    for (const auto& e : store.entries()) {
        if (!opt.entry_id.empty() && e->id != opt.entry_id) continue;
        if (tech && std::none_of(e->skr.actions.begin(), e->skr.actions.end(),
                                 [&](const auto& kv) { return parent_child_related(kv.first, *tech); }))
            continue;
        if (!opt.contains.empty() && e->skr.state.find(opt.contains) == std::string::npos) continue;
        ++shown;
        out << "== " << e->id << "  uses " << e->stats.uses << "  hits " << e->stats.hits << "  utility "
            << e->stats.utility() << "\n";
        out << serialize_skr(e->skr) << "\n";
        out << "provenance:";
        for (const auto& p : e->provenance) out << " " << p.dataset_id << "/" << p.sentence_id;
        out << "\n";
    }
    out << shown << " of " << store.size() << " entries shown\n";
    return kExitOk;
}

// --- extract / evaluate ----------------------------------------------------

std::map<std::string, std::vector<std::string>> load_external(const fs::path& path) {
    std::map<std::string, std::vector<std::string>> out;
    std::istringstream in(io::read_file(path));
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(std::string("malformed JSON: ") + e.what(), n);
        }
        if (!obj.is_object() || !obj.contains("id") || !obj.contains("techniques") || !obj["techniques"].is_array())
            throw ParseError("external prediction needs \"id\" and a \"techniques\" array", n);
        std::string id = obj["id"].is_string() ? obj["id"].get<std::string>() : obj["id"].dump();
        std::vector<std::string> ids;
        for (const auto& t : obj["techniques"]) ids.push_back(t.is_string() ? t.get<std::string>() : t.dump());
        if (!out.emplace(id, std::move(ids)).second) throw ParseError("duplicate id '" + id + "'", n);
    }
    return out;
}

std::vector<LabeledSentence> load_inputs(const fs::path& path, const Runtime& rt, bool labels) {
    require_file(path, "input");
    try {
        return load_dataset(path, {labels, labels ? &rt.catalog : nullptr, labels && rt.cfg.strict_labels});
    } catch (const ParseError& e) {
        throw ConfigError("input " + path.string() + ": " + e.what());
    }
}

int cmd_extract(const Options& opt, std::ostream& out, std::ostream& err) {
    auto rt = make_runtime(opt, true);
    BatchMode mode;
    try {
        mode = parse_batch_mode(opt.mode);
    } catch (const ValidationError& e) {
        throw ConfigError(e.what());
    }
    if (opt.input.empty() || opt.output.empty()) throw ConfigError("extract needs --input and --output");
    auto inputs = load_inputs(opt.input, rt, false);
    std::map<std::string, std::vector<std::string>> external;
    if (mode == BatchMode::VerifyExternal) {
        if (opt.predictions.empty()) throw ConfigError("--mode verify-external needs --predictions");
        require_file(opt.predictions, "predictions file");
        try {
            external = load_external(opt.predictions);
        } catch (const ParseError& e) {
            throw ConfigError("predictions " + opt.predictions + ": " + e.what());
        }
    }
    auto store = load_memory(rt);
    ExtractionPipeline pipeline(store, *rt.gateway, *rt.embedder, &rt.catalog, rt.cfg.pipeline);

    std::vector<BatchItem> items;
    for (const auto& s : inputs) {
        BatchItem item{s.id, s.text, {}};
        if (mode == BatchMode::VerifyExternal) {
            auto it = external.find(s.id);
            if (it != external.end()) item.external = it->second;
        }
        items.push_back(std::move(item));
    }
    auto results = pipeline.batch_extract(items, mode, rt.cfg.workers);

    std::string text;
    std::size_t ok = 0, failed = 0, warnings = 0, changed = 0;
    for (const auto& r : results) {
        text += to_jsonl_line(r) + "\n";
        if (r.ok()) {
            ++ok;
            warnings += r.classification->warnings.size();
            if (r.classification->delta && !r.classification->delta->empty()) ++changed;
        } else {
            ++failed;
            err << "item " << r.id << " failed: " << r.error << "\n";
        }
    }
    io::write_file_atomic(opt.output, text);
    rt.note("extract: " + std::to_string(results.size()) + " items");
    out << "extract (" << to_string(mode) << "): " << results.size() << " items, " << ok << " ok, " << failed
        << " failed, " << warnings << " warnings";
    if (mode == BatchMode::VerifyExternal) out << ", " << changed << " changed by verification";
    out << "\n";
    return failed ? kExitPartial : kExitOk;
}

int cmd_evaluate(const Options& opt, std::ostream& out, std::ostream& err) {
    const bool live = opt.predictions.empty();
    auto rt = make_runtime(opt, live);
    const fs::path dataset_path =
        !opt.input.empty() ? fs::path(opt.input)
                           : (rt.cfg.datasets.count("eval") ? rt.cfg.dataset("eval") : rt.cfg.dataset("train"));
    auto samples = load_inputs(dataset_path, rt, true);
    if (opt.feedback && !live) throw ConfigError("--feedback needs a live run (omit --predictions)");

    Predictions preds;
    std::map<std::string, std::vector<std::string>> traces;
    std::string system = "predictions";
    std::size_t failed = 0;
    json config = config_echo(rt);
    config["dataset"] = dataset_path.string();

    std::optional<FileLock> lock;
    std::optional<MemoryStore> store;
    if (live) {
        BatchMode mode;
        try {
            mode = parse_batch_mode(opt.mode);
        } catch (const ValidationError& e) {
            throw ConfigError(e.what());
        }
        if (mode == BatchMode::VerifyExternal) throw ConfigError("evaluate supports --mode full or stage1");
        system = std::string(to_string(mode));
        if (opt.feedback) lock.emplace(rt.cfg.memory_path);
        store.emplace(load_memory(rt));
        ExtractionPipeline pipeline(*store, *rt.gateway, *rt.embedder, &rt.catalog, rt.cfg.pipeline);
        std::vector<BatchItem> items;
        for (const auto& s : samples) items.push_back({s.id, s.text, {}});
        auto results = pipeline.batch_extract(items, mode, rt.cfg.workers);
        std::string lines;
        for (const auto& r : results) {
            lines += to_jsonl_line(r) + "\n";
            if (!r.ok()) {
                ++failed;
                err << "item " << r.id << " failed: " << r.error << "\n";
                continue;
            }
            preds.emplace(r.id, r.classification->technique_ids);
            traces.emplace(r.id, r.classification->retrieved_entry_ids);
        }
        config["mode"] = system;
        const fs::path dir = opt.report_dir.empty() ? rt.cfg.memory_path.parent_path() : fs::path(opt.report_dir);
        fs::create_directories(dir);
        io::write_file_atomic(dir / "evaluation-predictions.jsonl", lines);
    } else {
        require_file(opt.predictions, "predictions file");
        try {
            preds = load_predictions(opt.predictions);
        } catch (const ParseError& e) {
            throw ConfigError("predictions " + opt.predictions + ": " + e.what());
        }
        config["predictions"] = opt.predictions;
    }

    auto report = score(preds, samples, rt.cfg.parent_resolution);
    report.config = config;
    std::string table = format_table({{system, &report}});

    json doc = to_json(report);
    doc["command"] = "evaluate";
    doc["failed_items"] = failed;
    doc["generated_at"] = rt.generated_at();
    if (opt.feedback) {
        auto fb = feedback_to_memory(report, traces, *store);
        store->persist(rt.cfg.memory_path);
        doc["feedback"] = {{"samples", fb.samples}, {"outcomes_recorded", fb.outcomes_recorded}, {"warnings", fb.warnings}};
        for (const auto& w : fb.warnings) err << "warning: " << w << "\n";
        out << "feedback: " << fb.outcomes_recorded << " outcome(s) recorded over " << fb.samples << " sample(s)\n";
    }
    const fs::path dir = opt.report_dir.empty() ? rt.cfg.memory_path.parent_path() : fs::path(opt.report_dir);
    fs::create_directories(dir);
    write_report(dir / "evaluation-report.json", doc);
    io::write_file_atomic(dir / "evaluation-table.txt", table);
    out << table;
    return failed ? kExitPartial : kExitOk;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Standard-driven ATT&CK technique extraction over SKR memory", "ttpx"};
    app.require_subcommand(1);
    // Global options are also accepted after a subcommand name.
    app.fallthrough();
    Options opt;
    app.add_option("--config", opt.config_path, "JSON configuration file")->required();
    app.add_option("--workers", opt.workers, "concurrent items / generations");
    app.add_option("--mock-script", opt.mock_script, "use the scripted mock chat backend");

    auto* catalog = app.add_subcommand("catalog", "technique catalog");
    catalog->require_subcommand(1);
    auto* catalog_check = catalog->add_subcommand("check", "load and validate the catalog");

    auto* memory = app.add_subcommand("memory", "memory lifecycle");
    memory->require_subcommand(1);
    auto* init = memory->add_subcommand("init", "build memory from the training dataset");
    init->add_option("--input", opt.input, "labeled dataset (default: datasets.train)");
    init->add_flag("--fresh", opt.fresh, "ignore an existing checkpoint");
    auto* update = memory->add_subcommand("update", "integrate new labeled sentences");
    update->add_option("--input", opt.input, "labeled sentences (default: datasets.update)");
    auto* forget = memory->add_subcommand("forget", "prune low-utility entries");
    auto* inspect = memory->add_subcommand("inspect", "print entries");
    inspect->add_option("--technique", opt.technique, "entries with an action for this technique");
    inspect->add_option("--contains", opt.contains, "entries whose state contains this text");
    inspect->add_option("--id", opt.entry_id, "a single entry");

    auto* extract = app.add_subcommand("extract", "classify sentences");
    extract->add_option("--input", opt.input, "JSONL {id, text}")->required();
    extract->add_option("--output", opt.output, "JSONL results")->required();
    extract->add_option("--mode", opt.mode, "full | stage1 | verify-external");
    extract->add_option("--predictions", opt.predictions, "external predictions for verify-external");

    auto* evaluate = app.add_subcommand("evaluate", "score predictions or a live run");
    evaluate->add_option("--input", opt.input, "labeled dataset (default: datasets.eval, then datasets.train)");
    evaluate->add_option("--predictions", opt.predictions, "JSONL {id, techniques}; omit for a live run");
    evaluate->add_option("--mode", opt.mode, "full | stage1 (live runs)");
    evaluate->add_flag("--parent-resolution,!--no-parent-resolution", opt.parent_resolution,
                       "map sub-techniques to parents before scoring");
    evaluate->add_flag("--feedback", opt.feedback, "record outcomes into memory statistics");
    evaluate->add_option("--report-dir", opt.report_dir, "where reports go (default: beside the memory file)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*catalog_check) return cmd_catalog_check(opt, out, err);
        if (*init) return cmd_memory_init(opt, out, err);
        if (*update) return cmd_memory_update(opt, out, err);
        if (*forget) return cmd_memory_forget(opt, out, err);
        if (*inspect) return cmd_memory_inspect(opt, out, err);
        if (*extract) return cmd_extract(opt, out, err);
        if (*evaluate) return cmd_evaluate(opt, out, err);
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const LockError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const VersionMismatchError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitPartial;
    }
    return kExitConfig;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv;
    argv.push_back("ttpx");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace ttpx::cli
