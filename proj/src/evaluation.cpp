#include "ttpx/evaluation.hpp"

#include "ttpx/io.hpp"

#include <algorithm>
#include <cstdio>

namespace ttpx {

using nlohmann::json;

const char* const kMetricDefinition =
    "example-based set metrics averaged over samples: precision=|P&G|/|P|, recall=|P&G|/|G|, "
    "f1=2|P&G|/(|P|+|G|) (empty vs empty = 1, empty vs non-empty = 0); accuracy = share of samples "
    "with P&G non-empty; micro_* pool counts over all samples";

namespace {

std::set<TechniqueId> resolved(const std::set<TechniqueId>& ids, bool on) {
    if (!on) return ids;
    std::set<TechniqueId> out;
    for (const auto& id : ids) out.insert(resolve_parent(id));
    return out;
}

std::size_t overlap(const std::set<TechniqueId>& a, const std::set<TechniqueId>& b) {
    std::size_t n = 0;
    for (const auto& id : a) n += b.count(id);
    return n;
}

json id_array(const std::set<TechniqueId>& s) {
    json a = json::array();
    for (const auto& id : s) a.push_back(id.str());
    return a;
}

} // namespace

double order_free_mean(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    double sum = 0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

SampleScore score_sample(const std::string& id, const std::set<TechniqueId>& pred, const std::set<TechniqueId>& gold,
                         bool parent_resolution) {
    SampleScore s;
    s.id = id;
    s.pred = resolved(pred, parent_resolution);
    s.gold = resolved(gold, parent_resolution);
    const std::size_t tp = overlap(s.pred, s.gold);
    const double np = static_cast<double>(s.pred.size());
    const double ng = static_cast<double>(s.gold.size());
    if (s.pred.empty() && s.gold.empty()) {
        s.precision = s.recall = s.f1 = 1.0;
    } else {
        s.precision = s.pred.empty() ? 0.0 : static_cast<double>(tp) / np;
        s.recall = s.gold.empty() ? 0.0 : static_cast<double>(tp) / ng;
        s.f1 = 2.0 * static_cast<double>(tp) / (np + ng);
    }
    s.hit = tp > 0;
    return s;
}

EvalReport score(const Predictions& preds, const std::vector<EvalSample>& samples, bool parent_resolution) {
    EvalReport r;
    r.parent_resolution = parent_resolution;
    std::set<std::string> known;
    for (const auto& s : samples) known.insert(s.id);
    for (const auto& [id, _] : preds)
        if (!known.count(id)) throw ValidationError("prediction for unknown sample id '" + id + "'");

    std::vector<double> acc, prec, rec, f1;
    std::size_t tp = 0, npred = 0, ngold = 0;
    for (const auto& sample : samples) {
        auto it = preds.find(sample.id);
        if (it == preds.end()) r.warnings.push_back("no prediction for '" + sample.id + "', scored as empty");
        static const std::set<TechniqueId> none;
        auto s = score_sample(sample.id, it == preds.end() ? none : it->second, sample.labels, parent_resolution);
        acc.push_back(s.hit ? 1.0 : 0.0);
        prec.push_back(s.precision);
        rec.push_back(s.recall);
        f1.push_back(s.f1);
        tp += overlap(s.pred, s.gold);
        npred += s.pred.size();
        ngold += s.gold.size();
        r.per_sample.push_back(std::move(s));
    }
    r.accuracy = order_free_mean(acc);
    r.precision = order_free_mean(prec);
    r.recall = order_free_mean(rec);
    r.f1 = order_free_mean(f1);
    r.micro_precision = npred ? static_cast<double>(tp) / static_cast<double>(npred) : 0.0;
    r.micro_recall = ngold ? static_cast<double>(tp) / static_cast<double>(ngold) : 0.0;
    r.micro_f1 = (npred + ngold) ? 2.0 * static_cast<double>(tp) / static_cast<double>(npred + ngold) : 0.0;
    return r;
}

FeedbackSummary feedback_to_memory(const EvalReport& report,
                                   const std::map<std::string, std::vector<std::string>>& traces, MemoryStore& store) {
    FeedbackSummary out;
    for (const auto& s : report.per_sample) {
        auto it = traces.find(s.id);
        if (it == traces.end() || it->second.empty()) continue;
        std::vector<std::string> ids;
        for (const auto& id : it->second) {
            if (!store.contains(id)) {
                out.warnings.push_back("sample '" + s.id + "': unknown entry " + id + " skipped");
                continue;
            }
            // The same entry credited once per classification.
            if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
        }
        if (ids.empty()) continue;
        store.record_outcome(ids, s.hit);
        ++out.samples;
        out.outcomes_recorded += ids.size();
    }
    return out;
}

json to_json(const EvalReport& r) {
    json per = json::array();
    for (const auto& s : r.per_sample)
        per.push_back({{"id", s.id},
                       {"pred", id_array(s.pred)},
                       {"gold", id_array(s.gold)},
                       {"sample_precision", s.precision},
                       {"sample_recall", s.recall},
                       {"sample_f1", s.f1},
                       {"hit", s.hit}});
    return {{"accuracy", r.accuracy},
            {"precision", r.precision},
            {"recall", r.recall},
            {"f1", r.f1},
            {"micro", {{"precision", r.micro_precision}, {"recall", r.micro_recall}, {"f1", r.micro_f1}}},
            {"parent_resolution", r.parent_resolution},
            {"metric_definition", kMetricDefinition},
            {"samples", r.per_sample.size()},
            {"warnings", r.warnings},
            {"config", r.config},
            {"per_sample", std::move(per)}};
}

std::string format_table(const std::vector<std::pair<std::string, const EvalReport*>>& rows) {
    std::size_t width = 6;
    for (const auto& [name, _] : rows) width = std::max(width, name.size());
    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-*s  %5s  %5s  %5s  %5s\n", static_cast<int>(width), "System", "Acc", "Prec",
                  "Rec", "F1");
    out += buf;
    for (const auto& [name, r] : rows) {
        std::snprintf(buf, sizeof buf, "%-*s  %5.2f  %5.2f  %5.2f  %5.2f\n", static_cast<int>(width), name.c_str(),
                      r->accuracy, r->precision, r->recall, r->f1);
        out += buf;
    }
    return out;
}

Predictions parse_predictions(std::string_view text) {
    Predictions out;
    std::size_t line_no = 0, pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
        }
        if (!obj.is_object() || !obj.contains("id") || !obj.contains("techniques") || !obj["techniques"].is_array())
            throw ParseError("prediction needs \"id\" and a \"techniques\" array", line_no);
        std::string id = obj["id"].is_string() ? obj["id"].get<std::string>() : obj["id"].dump();
        std::set<TechniqueId> ids;
        for (const auto& t : obj["techniques"]) {
            if (!t.is_string()) throw ParseError("technique id is not a string", line_no);
            auto tid = TechniqueId::try_normalize(t.get<std::string>());
            if (!tid) throw ParseError("invalid technique id '" + t.get<std::string>() + "'", line_no);
            ids.insert(*tid);
        }
        if (!out.emplace(id, std::move(ids)).second) throw ParseError("duplicate prediction id '" + id + "'", line_no);
    }
    return out;
}

Predictions load_predictions(const std::filesystem::path& path) { return parse_predictions(io::read_file(path)); }

} // namespace ttpx
