#pragma once

#include "ttpx/technique_id.hpp"

#include <nlohmann/json_fwd.hpp>

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace ttpx {

class Catalog;

// Dual-layer situational knowledge unit.
//   state    Layer 1: technique-agnostic description of a behavior class (retrieval key)
//   actions  Layer 2: one discriminative manifestation per technique under that state
//   examples optional illustrative sentences per technique, kept out of the action text
struct SkrInstance {
    std::string state;
    std::map<TechniqueId, std::string> actions;
    std::map<TechniqueId, std::vector<std::string>> examples;

    bool operator==(const SkrInstance&) const = default;
};

// Parses the `{"state": ..., "action": {...}, "examples"?: {...}}` object and enforces
// every instance invariant. Action keys are normalized. Throws ParseError / ValidationError.
SkrInstance parse_skr(std::string_view raw);
SkrInstance skr_from_json(const nlohmann::json& obj);

// Canonical form: keys "state", "action", then "examples" when non-empty; technique keys
// sorted; two-space indentation.
std::string serialize_skr(const SkrInstance& instance);
nlohmann::json skr_to_json(const SkrInstance& instance);

// Returns every violated invariant as a message; empty means valid. With a catalog and
// strict set, action keys must also exist in the catalog.
std::vector<std::string> validate_skr(const SkrInstance& instance, const Catalog* catalog = nullptr,
                                      bool strict = false);

} // namespace ttpx
