#include "ttpx/catalog.hpp"

#include "ttpx/errors.hpp"
#include "ttpx/io.hpp"

#include <nlohmann/json.hpp>

#include <vector>

namespace ttpx {

using nlohmann::json;

namespace {

bool is_attack_source(const std::string& source) {
    return source == "mitre-attack" || source == "mitre-mobile-attack" || source == "mitre-ics-attack";
}

std::string string_field(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return {};
    if (!it->is_string()) throw ParseError(std::string("field '") + key + "' is not a string");
    return it->get<std::string>();
}

bool bool_field(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return false;
    if (!it->is_boolean()) throw ParseError(std::string("field '") + key + "' is not a boolean");
    return it->get<bool>();
}

TechniqueRecord make_record(const TechniqueId& id, std::string name, std::string description, bool deprecated) {
    return TechniqueRecord{id, std::move(name), std::move(description), id.parent(), deprecated};
}

std::map<TechniqueId, TechniqueRecord> parse_simplified(const json& doc) {
    if (!doc.is_array()) throw ParseError("simplified catalog must be a top-level JSON array");
    std::map<TechniqueId, TechniqueRecord> records;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& obj = doc[i];
        if (!obj.is_object()) throw ParseError("catalog entry " + std::to_string(i) + " is not an object");
        for (const char* key : {"id", "name", "description"})
            if (!obj.contains(key))
                throw ParseError("catalog entry " + std::to_string(i) + " lacks required key '" + key + "'");
        auto id = TechniqueId::parse(string_field(obj, "id"));
        auto rec = make_record(id, string_field(obj, "name"), string_field(obj, "description"),
                               bool_field(obj, "deprecated"));
        if (!records.emplace(id, std::move(rec)).second)
            throw ParseError("duplicate technique id " + id.str());
    }
    return records;
}

std::map<TechniqueId, TechniqueRecord> parse_stix(const json& doc, std::string& version) {
    if (!doc.is_object() || !doc.contains("objects") || !doc["objects"].is_array())
        throw ParseError("STIX bundle must be an object with an 'objects' array");
    std::map<TechniqueId, TechniqueRecord> records;
    std::vector<std::string> conflicting;
    for (const auto& obj : doc["objects"]) {
        if (!obj.is_object()) continue;
        const auto type = string_field(obj, "type");
        if (type == "x-mitre-collection" && version.empty()) {
            version = string_field(obj, "x_mitre_version");
            continue;
        }
        if (type != "attack-pattern") continue;
        auto refs = obj.find("external_references");
        if (refs == obj.end() || !refs->is_array()) continue;
        std::string external_id;
        for (const auto& ref : *refs) {
            if (ref.is_object() && is_attack_source(string_field(ref, "source_name"))) {
                external_id = string_field(ref, "external_id");
                break;
            }
        }
        if (external_id.empty()) continue;
        auto id = TechniqueId::parse(external_id);
        bool deprecated = bool_field(obj, "x_mitre_deprecated") || bool_field(obj, "revoked");
        auto rec = make_record(id, string_field(obj, "name"), string_field(obj, "description"), deprecated);
        auto [it, inserted] = records.emplace(id, rec);
        if (inserted) continue;
        // Revoked objects may share an ID with their active replacement; keep the active one.
        if (it->second.deprecated && !deprecated) {
            it->second = std::move(rec);
        } else if (!it->second.deprecated && !deprecated) {
            conflicting.push_back(id.str());
        }
    }
    if (!conflicting.empty())
        throw IntegrityError("STIX bundle has several active attack-patterns per id", conflicting);
    return records;
}

} // namespace

CatalogFormat parse_catalog_format(std::string_view name) {
    if (name == "stix-bundle" || name == "stix") return CatalogFormat::StixBundle;
    if (name == "simplified-json" || name == "simplified") return CatalogFormat::SimplifiedJson;
    throw ConfigError("unknown catalog format '" + std::string(name) + "'");
}

std::string_view to_string(CatalogFormat format) {
    return format == CatalogFormat::StixBundle ? "stix-bundle" : "simplified-json";
}

Catalog::Catalog(std::map<TechniqueId, TechniqueRecord> records, std::string version)
    : records_(std::move(records)), version_(std::move(version)) {
    std::vector<std::string> orphans;
    for (const auto& [id, rec] : records_) {
        if (rec.id != id) throw ValidationError("record keyed " + id.str() + " carries id " + rec.id.str());
        if (rec.parent != id.parent())
            throw ValidationError("record " + id.str() + " has inconsistent parent linkage");
        if (!rec.deprecated && rec.description.empty())
            throw ValidationError("active technique " + id.str() + " has an empty description");
        if (rec.parent && !records_.count(*rec.parent)) orphans.push_back(id.str());
    }
    if (!orphans.empty()) {
        std::string msg = "sub-techniques without a parent in the catalog:";
        for (const auto& o : orphans) msg += " " + o;
        throw IntegrityError(msg, orphans);
    }
}

const TechniqueRecord* Catalog::find(const TechniqueId& id) const {
    auto it = records_.find(id);
    return it == records_.end() ? nullptr : &it->second;
}

std::string Catalog::name_of(const TechniqueId& id) const {
    const auto* rec = find(id);
    return rec ? rec->name : std::string{};
}

Catalog parse_catalog(std::string_view text, CatalogFormat format, std::string version_label) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed catalog JSON: ") + e.what());
    }
    std::string detected;
    std::map<TechniqueId, TechniqueRecord> records;
    try {
        records = format == CatalogFormat::StixBundle ? parse_stix(doc, detected) : parse_simplified(doc);
    } catch (const GrammarError& e) {
        throw ParseError(std::string("catalog: ") + e.what());
    }
    if (version_label.empty()) version_label = detected.empty() ? "unspecified" : detected;
    return Catalog(std::move(records), std::move(version_label));
}

Catalog load_catalog(const std::filesystem::path& source, CatalogFormat format, std::string version_label) {
    return parse_catalog(io::read_file(source), format, std::move(version_label));
}

TechniqueId validate_id(std::string_view raw, const Catalog& catalog, bool strict) {
    auto id = TechniqueId::normalize(raw);
    if (strict && !catalog.contains(id)) throw UnknownIdError(id.str());
    return id;
}

} // namespace ttpx
