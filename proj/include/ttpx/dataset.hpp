#pragma once

#include "ttpx/technique_id.hpp"

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace ttpx {

class Catalog;

// One labeled CTI sentence: {"id", "text", "labels": [...]}.
struct LabeledSentence {
    std::string id;
    std::string text;
    std::set<TechniqueId> labels;

    bool operator==(const LabeledSentence&) const = default;
};

struct DatasetOptions {
    // Labels must be non-empty. Off for unlabeled batch inputs.
    bool require_labels = true;
    // With a catalog: strict rejects labels the catalog lacks.
    const Catalog* catalog = nullptr;
    bool strict = false;
};

// Parses line-delimited JSON. Blank lines are skipped. Throws ParseError carrying the
// 1-based line number for malformed lines, empty labels, bad IDs and duplicate ids.
std::vector<LabeledSentence> parse_dataset(std::string_view text, const DatasetOptions& options = {});
std::vector<LabeledSentence> load_dataset(const std::filesystem::path& path, const DatasetOptions& options = {});

std::string to_jsonl_line(const LabeledSentence& sentence);

} // namespace ttpx
