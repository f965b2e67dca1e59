#pragma once

#include "ttpx/dataset.hpp"
#include "ttpx/memory_store.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace ttpx {

using EvalSample = LabeledSentence;
using Predictions = std::map<std::string, std::set<TechniqueId>>;

struct SampleScore {
    std::string id;
    std::set<TechniqueId> pred;  // after parent resolution when enabled
    std::set<TechniqueId> gold;
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    bool hit = false;
};

// Per-sample set metrics:
//   precision = |P∩G|/|P|, recall = |P∩G|/|G|, f1 = 2|P∩G|/(|P|+|G|)
//   with P = G = {} scoring 1 and an empty side against a non-empty one scoring 0;
//   hit = P∩G non-empty.
// Aggregates are means over samples (summed in ascending order so that sample order
// cannot change the result). Micro variants pool the counts and are informational.
struct EvalReport {
    double accuracy = 0;
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    double micro_precision = 0;
    double micro_recall = 0;
    double micro_f1 = 0;
    bool parent_resolution = false;
    std::vector<SampleScore> per_sample;  // in sample order
    std::vector<std::string> warnings;
    nlohmann::json config = nlohmann::json::object();
};

extern const char* const kMetricDefinition;

SampleScore score_sample(const std::string& id, const std::set<TechniqueId>& pred, const std::set<TechniqueId>& gold,
                         bool parent_resolution);

// Missing predictions count as empty sets (with a warning). Throws ValidationError for a
// prediction whose id is not a sample.
EvalReport score(const Predictions& preds, const std::vector<EvalSample>& samples, bool parent_resolution);

// Mean of values, summed in ascending order.
double order_free_mean(std::vector<double> values);

struct FeedbackSummary {
    std::size_t samples = 0;
    std::size_t outcomes_recorded = 0;
    std::vector<std::string> warnings;
};

// record_outcome(trace, hit) for every scored sample with a trace. Unknown entry ids are
// warned about and skipped.
FeedbackSummary feedback_to_memory(const EvalReport& report,
                                   const std::map<std::string, std::vector<std::string>>& traces, MemoryStore& store);

nlohmann::json to_json(const EvalReport& report);

// Fixed-width "System Acc Prec Rec F1" table, two decimals.
std::string format_table(const std::vector<std::pair<std::string, const EvalReport*>>& rows);

// {"id", "techniques": [...]} per line. Throws ParseError with the line number.
Predictions parse_predictions(std::string_view text);
Predictions load_predictions(const std::filesystem::path& path);

} // namespace ttpx
