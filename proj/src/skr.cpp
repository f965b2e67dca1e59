#include "ttpx/skr.hpp"

#include "ttpx/catalog.hpp"
#include "ttpx/errors.hpp"

#include <nlohmann/json.hpp>

#include <set>

namespace ttpx {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::vector<std::string> validate_skr(const SkrInstance& instance, const Catalog* catalog, bool strict) {
    std::vector<std::string> violations;
    if (instance.state.empty()) violations.push_back("state is empty");
    for (const auto& tok : scan_id_tokens(instance.state))
        violations.push_back("technique id " + tok.id.str() + " in state");
    if (instance.actions.empty()) violations.push_back("no actions");

    std::map<std::string, TechniqueId> seen_text;
    for (const auto& [id, text] : instance.actions) {
        if (text.empty()) {
            violations.push_back("empty manifestation for " + id.str());
            continue;
        }
        auto [it, inserted] = seen_text.emplace(text, id);
        if (!inserted)
            violations.push_back("identical manifestation for " + it->second.str() + " and " + id.str());
        if (catalog && strict && !catalog->contains(id))
            violations.push_back("technique " + id.str() + " not in catalog");
    }
    for (const auto& [id, sentences] : instance.examples) {
        if (!instance.actions.count(id)) violations.push_back("examples for " + id.str() + " without an action");
        for (const auto& s : sentences)
            if (s.empty()) violations.push_back("empty example sentence for " + id.str());
    }
    return violations;
}

SkrInstance skr_from_json(const json& obj) {
    if (!obj.is_object()) throw ParseError("SKR must be a JSON object");
    auto state = obj.find("state");
    if (state == obj.end()) throw ParseError("SKR lacks key 'state'");
    if (!state->is_string()) throw ParseError("SKR 'state' is not a string");
    auto action = obj.find("action");
    if (action == obj.end()) throw ParseError("SKR lacks key 'action'");
    if (!action->is_object()) throw ParseError("SKR 'action' is not an object");

    SkrInstance out;
    out.state = state->get<std::string>();
    for (const auto& [key, value] : action->items()) {
        auto id = TechniqueId::try_normalize(key);
        if (!id) throw ValidationError("invalid technique id key '" + key + "' in SKR action");
        if (!value.is_string()) throw ParseError("SKR action for " + key + " is not a string");
        if (!out.actions.emplace(*id, value.get<std::string>()).second)
            throw ValidationError("duplicate action key " + id->str());
    }
    if (auto ex = obj.find("examples"); ex != obj.end() && !ex->is_null()) {
        if (!ex->is_object()) throw ParseError("SKR 'examples' is not an object");
        for (const auto& [key, value] : ex->items()) {
            auto id = TechniqueId::try_normalize(key);
            if (!id) throw ValidationError("invalid technique id key '" + key + "' in SKR examples");
            if (!value.is_array()) throw ParseError("SKR examples for " + key + " is not an array");
            auto& list = out.examples[*id];
            for (const auto& s : value) {
                if (!s.is_string()) throw ParseError("SKR example for " + key + " is not a string");
                list.push_back(s.get<std::string>());
            }
        }
    }
    auto violations = validate_skr(out);
    if (!violations.empty()) {
        std::string msg = "invalid SKR:";
        for (const auto& v : violations) msg += " " + v + ";";
        throw ValidationError(msg);
    }
    return out;
}

SkrInstance parse_skr(std::string_view raw) {
    json obj;
    try {
        obj = json::parse(raw);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed SKR JSON: ") + e.what());
    }
    return skr_from_json(obj);
}

json skr_to_json(const SkrInstance& instance) {
    // nlohmann::json objects are key-sorted; "action" < "examples" < "state" would put state
    // last, so callers needing the canonical key order use serialize_skr.
    json out;
    out["state"] = instance.state;
    json actions = json::object();
    for (const auto& [id, text] : instance.actions) actions[id.str()] = text;
    out["action"] = std::move(actions);
    if (!instance.examples.empty()) {
        json ex = json::object();
        for (const auto& [id, list] : instance.examples) ex[id.str()] = list;
        out["examples"] = std::move(ex);
    }
    return out;
}

std::string serialize_skr(const SkrInstance& instance) {
    ordered_json out;
    out["state"] = instance.state;
    ordered_json actions = ordered_json::object();
    for (const auto& [id, text] : instance.actions) actions[id.str()] = text;
    out["action"] = std::move(actions);
    if (!instance.examples.empty()) {
        ordered_json ex = ordered_json::object();
        for (const auto& [id, list] : instance.examples) ex[id.str()] = list;
        out["examples"] = std::move(ex);
    }
    return out.dump(2);
}

} // namespace ttpx
