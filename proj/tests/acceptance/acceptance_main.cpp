// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit on any failure.
// AC9 needs a live endpoint and runs only when TTPX_LIVE_CONFIG points at a config file.

#include "test_support.hpp"

#include "ttpx/cli/app.hpp"
#include "ttpx/dataset.hpp"
#include "ttpx/evaluation.hpp"
#include "ttpx/io.hpp"
#include "ttpx/lifecycle.hpp"
#include "ttpx/llm/embedder.hpp"
#include "ttpx/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>

using namespace ttpx;
using ttpx_test::tid;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Pinned tolerances.
constexpr double kAc1MaxSeconds = 10.0;
constexpr double kAc2F1Expected = 0.667;
constexpr double kAc2F1Tolerance = 0.001;
constexpr double kAc9AccSlack = 0.05;

struct Check {
    bool ok = true;
    std::string detail;
    void fail(const std::string& why) {
        if (ok) detail = why;
        ok = false;
    }
    void expect(bool cond, const std::string& why) {
        if (!cond) fail(why);
    }
};

struct CliRun {
    int code;
    std::string out, err;
};

CliRun cli(const fs::path& config, std::vector<std::string> args) {
    args.insert(args.begin(), {"--config", config.string()});
    std::ostringstream out, err;
    int code = cli::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path write_config(const fs::path& dir, const std::string& script, int workers) {
    json cfg{{"catalog", {{"path", ttpx_test::data_path("catalog.json").string()}, {"format", "simplified-json"}}},
             {"memory", "memory.jsonl"},
             {"datasets", {{"train", ttpx_test::data_path("dataset.jsonl").string()}}},
             {"chat", {{"provider", "mock"}, {"script", ttpx_test::data_path(script).string()}}},
             {"embedding", {{"provider", "hashing"}, {"dim", 256}}},
             {"workers", workers}};
    auto path = dir / "config.json";
    io::write_file_atomic(path, cfg.dump(2));
    return path;
}

// --- AC1 ------------------------------------------------------------------

Check ac1() {
    Check c;
    ttpx_test::TempDir dir;
    auto cfg = write_config(dir.path(), "mock_echo.json", 4);
    auto t0 = std::chrono::steady_clock::now();
    auto init = cli(cfg, {"memory", "init"});
    c.expect(init.code == 0, "memory init exit " + std::to_string(init.code) + ": " + init.err);
    auto ex = cli(cfg, {"extract", "--input", ttpx_test::data_path("dataset.jsonl").string(), "--output",
                        (dir / "extract.jsonl").string()});
    c.expect(ex.code == 0, "extract exit " + std::to_string(ex.code) + ": " + ex.err);
    auto ev = cli(cfg, {"evaluate"});
    c.expect(ev.code == 0, "evaluate exit " + std::to_string(ev.code) + ": " + ev.err);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!c.ok) return c;

    auto report = json::parse(io::read_file(dir / "evaluation-report.json"));
    for (const char* k : {"accuracy", "precision", "recall", "f1"})
        c.expect(report[k].get<double>() == 1.0, std::string(k) + " = " + report[k].dump());
    c.expect(report["per_sample"].size() == 20, "expected 20 samples");
    // extract output must agree with the gold labels too
    auto gold = load_dataset(ttpx_test::data_path("dataset.jsonl"));
    std::istringstream lines(io::read_file(dir / "extract.jsonl"));
    std::string line;
    std::size_t i = 0;
    while (std::getline(lines, line)) {
        auto j = json::parse(line);
        std::set<std::string> got = j["techniques"].get<std::set<std::string>>();
        std::set<std::string> want;
        for (const auto& l : gold[i].labels) want.insert(l.str());
        c.expect(got == want, "extract line " + std::to_string(i + 1) + " differs from gold");
        ++i;
    }
    c.expect(i == 20, "extract wrote " + std::to_string(i) + " lines");
    c.expect(secs < kAc1MaxSeconds, "runtime " + std::to_string(secs) + " s");
    if (c.ok) c.detail = "acc=prec=rec=f1=1.0 over 20 sentences in " + std::to_string(secs) + " s";
    return c;
}

// --- AC2 ------------------------------------------------------------------

Check ac2() {
    Check c;
    const char* pool[] = {"T1001", "T1003", "T1003.001", "T1008", "T1071", "T1071.004", "T1132", "T1486", "T1566",
                          "T1059"};
    std::mt19937_64 rng(2024);
    auto rand_set = [&] {
        std::set<TechniqueId> s;
        std::size_t n = rng() % 6;  // 0..5
        while (s.size() < n) s.insert(tid(pool[rng() % std::size(pool)]));
        return s;
    };
    std::vector<EvalSample> samples;
    Predictions preds;
    std::vector<double> op, orc, of, oa;
    for (int t = 0; t < 1000; ++t) {
        auto gold = rand_set();
        auto pred = rand_set();
        std::string id = "p" + std::to_string(t);
        // brute force over strings
        std::size_t tp = 0;
        for (const auto& a : pred)
            for (const auto& b : gold) tp += a.str() == b.str();
        double p, r, f;
        if (pred.empty() && gold.empty()) {
            p = r = f = 1.0;
        } else {
            p = pred.empty() ? 0.0 : double(tp) / double(pred.size());
            r = gold.empty() ? 0.0 : double(tp) / double(gold.size());
            f = (pred.size() + gold.size()) ? 2.0 * double(tp) / double(pred.size() + gold.size()) : 0.0;
        }
        double a = tp > 0 ? 1.0 : 0.0;

        auto single = score({{id, pred}}, {{id, "t", gold}}, false);
        if (single.precision != p || single.recall != r || single.f1 != f || single.accuracy != a) {
            c.fail("trial " + std::to_string(t) + " mismatch");
            break;
        }
        samples.push_back({id, "t", gold});
        preds[id] = pred;
        op.push_back(p);
        orc.push_back(r);
        of.push_back(f);
        oa.push_back(a);
    }
    if (c.ok) {
        auto mean = [](std::vector<double> v) {
            std::sort(v.begin(), v.end());
            double s = 0;
            for (double x : v) s += x;
            return s / double(v.size());
        };
        auto all = score(preds, samples, false);
        c.expect(all.precision == mean(op) && all.recall == mean(orc) && all.f1 == mean(of) &&
                     all.accuracy == mean(oa),
                 "aggregate over 1000 samples differs from oracle");
    }
    auto hand = score({{"h", {tid("T1132")}}}, {{"h", "t", {tid("T1132"), tid("T1071")}}}, false);
    c.expect(hand.precision == 1.0 && hand.recall == 0.5 && std::abs(hand.f1 - kAc2F1Expected) <= kAc2F1Tolerance,
             "hand case gave " + std::to_string(hand.precision) + "/" + std::to_string(hand.recall) + "/" +
                 std::to_string(hand.f1));
    if (c.ok) c.detail = "1000 trials exact; {T1132} vs {T1132,T1071} -> (1.0, 0.5, " + std::to_string(hand.f1) + ")";
    return c;
}

// --- AC3 ------------------------------------------------------------------

Check ac3() {
    Check c;
    std::vector<EvalSample> s{{"x", "t", {tid("T1003")}}};
    Predictions p{{"x", {tid("T1003.001")}}};
    auto on = score(p, s, true);
    auto off = score(p, s, false);
    c.expect(on.f1 == 1.0, "resolution on f1 " + std::to_string(on.f1));
    c.expect(off.f1 == 0.0, "resolution off f1 " + std::to_string(off.f1));
    if (c.ok) c.detail = "on 1.0, off 0.0";
    return c;
}

// --- AC4 ------------------------------------------------------------------

Check ac4() {
    Check c;
    const char* pool[] = {"T1001", "T1003", "T1003.001", "T1003.002", "T1008", "T1071", "T1071.001",
                          "T1071.004", "T1132", "T1132.001", "T1486", "T1566"};
    std::mt19937_64 rng(4);
    std::size_t queries = 0;
    for (int store_no = 0; store_no < 200 && c.ok; ++store_no) {
        const std::size_t dim = (store_no % 3 == 0) ? 16 : 32;
        // Dyadic vectors give exact scores and frequent ties; every fourth store uses
        // gaussian vectors instead.
        const bool gaussian = store_no % 4 == 3;
        auto vec = [&] { return gaussian ? ttpx_test::gaussian_unit(rng, dim) : ttpx_test::dyadic_unit(rng, dim); };
        MemoryStore store({"acceptance", dim}, logical_clock());
        const std::size_t n = 1 + rng() % 100;
        for (std::size_t i = 0; i < n; ++i) {
            MemoryEntry e;
            e.id = store.next_id();
            e.skr.state = "state " + e.id;
            std::size_t na = 1 + rng() % 3;
            for (std::size_t j = 0; j < na; ++j) {
                auto t = tid(pool[rng() % std::size(pool)]);
                if (e.skr.actions.emplace(t, "action " + t.str() + " " + e.id).second) e.action_embeddings.emplace(t, vec());
            }
            e.state_embedding = vec();
            e.provenance.push_back(ttpx_test::source_ref("s" + e.id, "text", {e.skr.actions.begin()->first}));
            store.insert(std::move(e));
        }
        std::vector<MemoryEntry> entries;
        for (const auto& e : store.entries()) entries.push_back(*e);

        for (int q = 0; q < 5; ++q) {
            auto query = vec();
            std::size_t k = 1 + rng() % 10;
            std::vector<std::string> got;
            for (const auto& h : store.retrieve_by_state(query, k)) got.push_back(h.entry->id);
            if (got != ttpx_test::oracle_state_ids(entries, query, k)) {
                c.fail("state retrieval differs in store " + std::to_string(store_no));
                break;
            }
            std::set<TechniqueId> focus;
            for (std::size_t f = 0, nf = 1 + rng() % 3; f < nf; ++f) focus.insert(tid(pool[rng() % std::size(pool)]));
            auto r = store.retrieve_by_action(query, focus, k);
            std::vector<ttpx_test::OracleActionHit> hits;
            for (const auto& h : r.hits) hits.push_back({h.entry->id, h.technique.str()});
            auto want = ttpx_test::oracle_action_hits(entries, query, focus, k);
            if (hits != want || r.no_coverage != want.empty()) {
                c.fail("action retrieval differs in store " + std::to_string(store_no));
                break;
            }
            queries += 2;
        }
    }
    if (c.ok) c.detail = "200 stores, " + std::to_string(queries) + " queries identical to exhaustive scan";
    return c;
}

// --- AC5 ------------------------------------------------------------------

struct Snapshot {
    std::string state;
    std::map<TechniqueId, std::string> actions;
    Embedding state_embedding;
    std::map<TechniqueId, Embedding> action_embeddings;
};

std::map<std::string, Snapshot> snapshot(const MemoryStore& s) {
    std::map<std::string, Snapshot> out;
    for (const auto& e : s.entries())
        out[e->id] = {e->skr.state, e->skr.actions, e->state_embedding, e->action_embeddings};
    return out;
}

Check ac5() {
    Check c;
    // (a) append-only over random update sequences
    auto base = load_dataset(ttpx_test::data_path("dataset.jsonl"));
    const char* extra[] = {"T1090", "T1105", "T1041", "T1573", "T1027", "T1082", "T1083"};
    const char* tails[] = {"again", "later that week", "through a relay", "on a second host", "using a new build"};
    std::mt19937_64 rng(5);
    std::size_t optimized = 0, created = 0, updates = 0;
    for (int run = 0; run < 5 && c.ok; ++run) {
        std::vector<LabeledSentence> fixtures = base;
        std::vector<std::vector<LabeledSentence>> batches;
        for (int b = 0; b < 4; ++b) {
            std::vector<LabeledSentence> batch;
            for (int k = 0; k < 5; ++k) {
                const auto& src = base[rng() % base.size()];
                LabeledSentence s;
                s.id = "u" + std::to_string(run) + "_" + std::to_string(b) + "_" + std::to_string(k);
                if (rng() % 4 == 0) {
                    s.text = "Unrelated observation number " + s.id + " about " + tails[rng() % std::size(tails)];
                    s.labels = {tid(extra[rng() % std::size(extra)])};
                } else {
                    s.text = src.text + " " + tails[rng() % std::size(tails)];
                    s.labels = src.labels;
                    s.labels.insert(tid(extra[rng() % std::size(extra)]));
                }
                fixtures.push_back(s);
                batch.push_back(s);
            }
            batches.push_back(batch);
        }
        auto rig = ttpx_test::make_rig(llm::MockChatBackend::echo_oracle(fixtures));
        llm::HashingEmbedder emb(256);
        LifecycleConfig cfg;
        cfg.merge_threshold = 0.8;
        KnowledgeLifecycle lc(*rig.gateway, emb, ttpx_test::fixture_catalog(), cfg);
        MemoryStore store(emb.fingerprint(), logical_clock());
        lc.initialize_memory(base, store);
        for (const auto& batch : batches) {
            auto before = snapshot(store);
            auto report = lc.update_memory(store, batch);
            ++updates;
            for (const auto& o : report.outcomes) {
                optimized += o.path == SentenceOutcome::Path::Optimized;
                created += o.path == SentenceOutcome::Path::Created;
            }
            auto after = snapshot(store);
            for (const auto& [id, snap] : before) {
                auto it = after.find(id);
                if (it == after.end()) {
                    c.fail("entry " + id + " disappeared during update");
                    break;
                }
                const auto& now = it->second;
                bool same = now.state == snap.state && now.state_embedding == snap.state_embedding;
                for (const auto& [t, text] : snap.actions) {
                    auto a = now.actions.find(t);
                    same = same && a != now.actions.end() && a->second == text &&
                           now.action_embeddings.at(t) == snap.action_embeddings.at(t);
                }
                if (!same) {
                    c.fail("entry " + id + " changed pre-existing text");
                    break;
                }
            }
            if (!c.ok) break;
        }
    }
    c.expect(optimized > 0 && created > 0, "update sequences did not exercise both paths");

    // (b) forgetting fixture
    {
        std::mt19937_64 r2(55);
        MemoryStore store({"acceptance", 16}, logical_clock());
        std::vector<std::string> ids;
        for (int i = 0; i < 3; ++i) {
            MemoryEntry e;
            e.id = store.next_id();
            e.skr.state = "state " + std::to_string(i);
            e.skr.actions.emplace(tid("T1132"), "action " + std::to_string(i));
            e.state_embedding = ttpx_test::dyadic_unit(r2, 16);
            e.action_embeddings.emplace(tid("T1132"), ttpx_test::dyadic_unit(r2, 16));
            e.provenance.push_back(ttpx_test::source_ref("s", "text", {tid("T1132")}));
            ids.push_back(store.insert(std::move(e)));
        }
        const std::pair<int, int> stats[] = {{10, 0}, {2, 0}, {10, 9}};
        for (int i = 0; i < 3; ++i)
            for (int u = 0; u < stats[i].first; ++u) store.record_outcome({ids[i]}, u < stats[i].second);
        LifecycleConfig cfg;
        cfg.min_uses = 5;
        cfg.utility_threshold = 0.3;
        auto report = run_forgetting(store, cfg);
        c.expect(report.pruned.size() == 1 && report.pruned[0].id == ids[0] && store.size() == 2,
                 "forgetting did not prune exactly the (10,0) entry");
    }

    // (c) byte-identical round trip of a lifecycle-built memory file
    {
        ttpx_test::TempDir dir;
        auto rig = ttpx_test::make_rig(llm::MockChatBackend::echo_oracle(base));
        llm::HashingEmbedder emb(256);
        KnowledgeLifecycle lc(*rig.gateway, emb, ttpx_test::fixture_catalog(), {});
        MemoryStore store(emb.fingerprint(), logical_clock());
        lc.initialize_memory(base, store);
        store.record_outcome({store.entries().front()->id}, true);
        store.persist(dir / "a.jsonl");
        MemoryStore::load(dir / "a.jsonl").persist(dir / "b.jsonl");
        c.expect(io::read_file(dir / "a.jsonl") == io::read_file(dir / "b.jsonl"), "round trip changed bytes");
    }
    if (c.ok)
        c.detail = "(a) " + std::to_string(updates) + " update batches, " + std::to_string(optimized) + " optimized, " +
                   std::to_string(created) + " created, no pre-existing text changed; (b) pruned only (10,0); " +
                   "(c) round trip byte-identical";
    return c;
}

// --- AC6 ------------------------------------------------------------------

// Answers with one fixed response per subject, for every prompt kind and every attempt.
class AdversarialBackend final : public llm::ChatBackend {
public:
    explicit AdversarialBackend(std::map<std::string, std::string> responses) : responses_(std::move(responses)) {}
    std::string send(const llm::ChatRequest& request) override {
        auto it = responses_.find(request.subject);
        if (it == responses_.end()) throw llm::TransportError("no scripted response", false);
        return it->second;
    }
    std::string name() const override { return "adversarial"; }

private:
    std::map<std::string, std::string> responses_;
};

struct Adversarial {
    std::string text;
    bool malformed;
};

Adversarial adversarial_response(std::mt19937_64& rng) {
    auto random_id = [&]() -> std::string {
        char buf[24];
        switch (rng() % 6) {
        case 0: return "T1132";
        case 1: return "T1071";
        case 2: std::snprintf(buf, sizeof buf, "T%04u", unsigned(rng() % 10000)); return buf;
        case 3: std::snprintf(buf, sizeof buf, "T%04u.%03u", unsigned(rng() % 10000), unsigned(rng() % 1000)); return buf;
        case 4: return "t1003.001";
        default: {
            const char* junk[] = {"T12", "1132", "TA0001", "T1132.1", "", "T1071 ", "S0154"};
            return junk[rng() % std::size(junk)];
        }
        }
    };
    auto id_array = [&] {
        json a = json::array();
        for (std::size_t i = 0, n = rng() % 6; i < n; ++i) a.push_back(random_id());
        return a;
    };
    switch (rng() % 10) {
    case 0: return {"I think the answer is " + random_id() + " and maybe " + random_id() + ".", true};
    case 1: return {"{\"techniques\": [\"" + random_id() + "\", ", true};
    case 2: return {json{{"answer", id_array()}}.dump(), true};
    case 3: return {json{{"techniques", random_id()}}.dump(), true};
    case 4: return {R"({"techniques": [1132, null]})", true};
    case 5: return {"", true};
    case 6: return {"```json\n" + json{{"techniques", id_array()}, {"rationale", "fenced"}}.dump() + "\n```", false};
    case 7: return {"Sure! " + json{{"techniques", id_array()}}.dump() + " Hope that helps.", false};
    case 8: return {json{{"techniques", json::array()}, {"rationale", "none apply"}}.dump(), false};
    default: return {json{{"techniques", id_array()}, {"rationale", "r"}}.dump(), false};
    }
}

Check ac6() {
    Check c;
    llm::HashingEmbedder emb(256);
    auto base = load_dataset(ttpx_test::data_path("dataset.jsonl"));
    MemoryStore store(emb.fingerprint(), logical_clock());
    {
        auto rig = ttpx_test::make_rig(llm::MockChatBackend::echo_oracle(base));
        KnowledgeLifecycle lc(*rig.gateway, emb, ttpx_test::fixture_catalog(), {});
        lc.initialize_memory(base, store);
    }

    std::mt19937_64 rng(6);
    std::map<std::string, std::string> responses;
    std::vector<std::pair<std::string, Adversarial>> trials;
    for (int t = 0; t < 500; ++t) {
        auto resp = adversarial_response(rng);
        std::string text = base[rng() % base.size()].text + " (trial " + std::to_string(t) + ")";
        responses[text] = resp.text;
        trials.push_back({text, resp});
    }
    auto backend = std::make_shared<AdversarialBackend>(responses);
    llm::ChatParams params;
    params.model_name = "adversarial";
    llm::GatewayOptions opts;
    opts.backoff_base = std::chrono::milliseconds(0);
    llm::LlmGateway gateway(backend, params, opts);
    ExtractionPipeline pipeline(store, gateway, emb, &ttpx_test::fixture_catalog(), {});
    const auto checksum = store.checksum();

    std::size_t ok = 0, typed = 0;
    for (const auto& [text, resp] : trials) {
        for (int mode = 0; mode < 2 && c.ok; ++mode) {
            try {
                auto cls = mode == 0 ? pipeline.stage1_classify(text) : pipeline.extract(text);
                ++ok;
                if (resp.malformed) {
                    c.fail("malformed response produced a classification: " + resp.text);
                    break;
                }
                for (const auto& id : cls.technique_ids) {
                    if (!cls.candidates_considered.count(id)) c.fail(id.str() + " outside candidate set");
                    // every emitted label must appear in the model output
                    std::string upper = resp.text;
                    for (auto& ch : upper) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
                    if (upper.find(id.str()) == std::string::npos) c.fail(id.str() + " fabricated");
                }
                if (cls.retrieved_entry_ids.empty()) c.fail("empty retrieval trace");
            } catch (const ExtractionError& e) {
                ++typed;
                if (!resp.malformed) c.fail(std::string("well-formed response failed: ") + e.what());
                if (e.trace().empty()) c.fail("failure without retrieval trace");
            } catch (const std::exception& e) {
                c.fail(std::string("untyped failure: ") + e.what());
            }
        }
        if (!c.ok) break;
    }
    c.expect(store.checksum() == checksum, "pipeline modified the store");
    if (c.ok)
        c.detail = "500 responses x 2 modes: " + std::to_string(ok) + " contained classifications, " +
                   std::to_string(typed) + " typed failures";
    return c;
}

// --- AC7 ------------------------------------------------------------------

Check ac7() {
    Check c;
    ttpx_test::TempDir dir;
    auto cfg = write_config(dir.path(), "mock_echo.json", 1);
    auto init = cli(cfg, {"memory", "init"});
    c.expect(init.code == 0, "memory init failed: " + init.err);
    // Inputs: the fixture sentences plus some the oracle cannot answer (per-item failures).
    std::string inputs;
    for (const auto& s : load_dataset(ttpx_test::data_path("dataset.jsonl"))) inputs += to_jsonl_line(s) + "\n";
    for (int i = 0; i < 6; ++i)
        inputs += json{{"id", "x" + std::to_string(i)}, {"text", "unscripted sentence " + std::to_string(i)}}.dump() + "\n";
    io::write_file_atomic(dir / "in.jsonl", inputs);
    std::string outputs[2];
    const char* workers[] = {"1", "8"};
    for (int i = 0; i < 2 && c.ok; ++i) {
        for (const char* mode : {"full", "stage1"}) {
            auto out = dir / ("out_" + std::string(workers[i]) + "_" + mode + ".jsonl");
            auto r = cli(cfg, {"extract", "--workers", workers[i], "--mode", mode, "--input", (dir / "in.jsonl").string(),
                               "--output", out.string()});
            c.expect(r.code == 1, "extract should report the 6 unscripted items (exit 1), got " + std::to_string(r.code));
            outputs[i] += io::read_file(out);
        }
    }
    c.expect(!outputs[0].empty() && outputs[0] == outputs[1], "worker_limit 1 and 8 outputs differ");
    if (c.ok) c.detail = "26 items x 2 modes, identical output files for 1 and 8 workers";
    return c;
}

// --- AC8 ------------------------------------------------------------------

Check ac8() {
    Check c;
    auto inst = parse_skr(ttpx_test::kListingVerbatim);
    c.expect(inst == ttpx_test::listing_instance(), "listing parse differs from expected instance");
    auto text = serialize_skr(inst);
    c.expect(parse_skr(text) == inst, "round trip changed the instance");
    c.expect(text == ttpx_test::kListingCanonical, "serialization differs from the canonical text");
    c.expect(text.find("\"state\": ") != std::string::npos && text.find("\"action\": {") != std::string::npos,
             "state/action keys missing");
    auto j = json::parse(text);
    std::vector<std::string> keys;
    for (const auto& [k, _] : j.items()) keys.push_back(k);
    c.expect(keys == std::vector<std::string>{"action", "state"}, "unexpected top-level keys");
    if (c.ok) c.detail = "listing round-trips; keys \"state\"/\"action\" bit-exact";
    return c;
}

// --- AC9 ------------------------------------------------------------------

std::optional<Check> ac9() {
    const char* path = std::getenv("TTPX_LIVE_CONFIG");
    if (!path || !*path) return std::nullopt;
    Check c;
    fs::path cfg(path);
    auto init = cli(cfg, {"memory", "init", "--fresh"});
    c.expect(init.code == 0, "memory init exit " + std::to_string(init.code));
    ttpx_test::TempDir dir;
    double acc[2] = {0, 0};
    const char* modes[] = {"stage1", "full"};
    for (int i = 0; i < 2 && c.ok; ++i) {
        auto out = dir / modes[i];
        auto r = cli(cfg, {"evaluate", "--mode", modes[i], "--report-dir", out.string()});
        c.expect(r.code == 0 || r.code == 1, std::string("evaluate ") + modes[i] + " exit " + std::to_string(r.code));
        if (!c.ok) break;
        acc[i] = json::parse(io::read_file(out / "evaluation-report.json"))["accuracy"].get<double>();
    }
    c.expect(acc[1] >= acc[0] - kAc9AccSlack,
             "stage2 acc " + std::to_string(acc[1]) + " < stage1 acc " + std::to_string(acc[0]) + " - 0.05");
    if (c.ok) c.detail = "stage1 acc " + std::to_string(acc[0]) + ", stage2 acc " + std::to_string(acc[1]) + " (indicative)";
    return c;
}

} // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Check()> run;
    };
    const Criterion criteria[] = {{"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4},
                                  {"AC5", ac5}, {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}};
    int failures = 0;
    for (const auto& cr : criteria) {
        Check c;
        try {
            c = cr.run();
        } catch (const std::exception& e) {
            c.fail(std::string("exception: ") + e.what());
        }
        std::cout << cr.name << (c.ok ? " PASS " : " FAIL ") << c.detail << std::endl;
        failures += !c.ok;
    }
    try {
        if (auto c = ac9()) {
            std::cout << "AC9" << (c->ok ? " PASS " : " FAIL ") << c->detail << std::endl;
            failures += !c->ok;
        } else {
            std::cout << "AC9 SKIP set TTPX_LIVE_CONFIG to a live-endpoint config to run" << std::endl;
        }
    } catch (const std::exception& e) {
        std::cout << "AC9 FAIL exception: " << e.what() << std::endl;
        ++failures;
    }
    return failures ? 1 : 0;
}
