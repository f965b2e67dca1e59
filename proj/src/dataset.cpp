#include "ttpx/dataset.hpp"

#include "ttpx/catalog.hpp"
#include "ttpx/errors.hpp"
#include "ttpx/io.hpp"

#include <nlohmann/json.hpp>

#include <sstream>
#include <unordered_set>

namespace ttpx {

using nlohmann::json;

std::vector<LabeledSentence> parse_dataset(std::string_view text, const DatasetOptions& options) {
    std::vector<LabeledSentence> out;
    std::unordered_set<std::string> ids;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
        }
        if (!obj.is_object()) throw ParseError("record is not an object", line_no);
        LabeledSentence s;
        auto id = obj.find("id");
        if (id == obj.end() || !(id->is_string() || id->is_number_integer()))
            throw ParseError("record lacks a string 'id'", line_no);
        s.id = id->is_string() ? id->get<std::string>() : std::to_string(id->get<long long>());
        if (s.id.empty()) throw ParseError("record has an empty 'id'", line_no);
        auto txt = obj.find("text");
        if (txt == obj.end() || !txt->is_string() || txt->get<std::string>().empty())
            throw ParseError("record lacks a non-empty 'text'", line_no);
        s.text = txt->get<std::string>();
        if (auto labels = obj.find("labels"); labels != obj.end() && !labels->is_null()) {
            if (!labels->is_array()) throw ParseError("'labels' is not an array", line_no);
            for (const auto& l : *labels) {
                if (!l.is_string()) throw ParseError("label is not a string", line_no);
                try {
                    auto label = options.catalog ? validate_id(l.get<std::string>(), *options.catalog, options.strict)
                                                 : TechniqueId::normalize(l.get<std::string>());
                    s.labels.insert(label);
                } catch (const Error& e) {
                    throw ParseError(e.what(), line_no);
                }
            }
        }
        if (options.require_labels && s.labels.empty()) throw ParseError("record has no labels", line_no);
        if (!ids.insert(s.id).second) throw ParseError("duplicate id '" + s.id + "'", line_no);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<LabeledSentence> load_dataset(const std::filesystem::path& path, const DatasetOptions& options) {
    return parse_dataset(io::read_file(path), options);
}

std::string to_jsonl_line(const LabeledSentence& s) {
    nlohmann::ordered_json j;
    j["id"] = s.id;
    j["text"] = s.text;
    j["labels"] = json::array();
    for (const auto& l : s.labels) j["labels"].push_back(l.str());
    return j.dump();
}

} // namespace ttpx
