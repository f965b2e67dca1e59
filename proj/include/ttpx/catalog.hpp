#pragma once

#include "ttpx/technique_id.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace ttpx {

struct TechniqueRecord {
    TechniqueId id;
    std::string name;
    std::string description;
    std::optional<TechniqueId> parent;
    bool deprecated = false;

    bool operator==(const TechniqueRecord&) const = default;
};

enum class CatalogFormat { StixBundle, SimplifiedJson };

CatalogFormat parse_catalog_format(std::string_view name);
std::string_view to_string(CatalogFormat format);

// Immutable after construction; safe for concurrent readers.
class Catalog {
public:
    Catalog() = default;
    // Validates all record and cross-record invariants. Throws IntegrityError / ValidationError.
    Catalog(std::map<TechniqueId, TechniqueRecord> records, std::string version);

    const TechniqueRecord* find(const TechniqueId& id) const;
    bool contains(const TechniqueId& id) const { return records_.count(id) != 0; }
    const std::map<TechniqueId, TechniqueRecord>& records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    const std::string& version() const noexcept { return version_; }
    // Name for display, or an empty string when unknown.
    std::string name_of(const TechniqueId& id) const;

    bool operator==(const Catalog&) const = default;

private:
    std::map<TechniqueId, TechniqueRecord> records_;
    std::string version_;
};

// Loads either the official STIX 2.1 bundle or the simplified `[{id,name,description}]`
// array. `version_label` overrides the release label (STIX bundles otherwise use the
// x-mitre-collection version when present).
Catalog load_catalog(const std::filesystem::path& source, CatalogFormat format,
                     std::string version_label = {});
Catalog parse_catalog(std::string_view text, CatalogFormat format, std::string version_label = {});

// Trim + uppercase + grammar check; strict additionally requires catalog membership.
TechniqueId validate_id(std::string_view raw, const Catalog& catalog, bool strict);

} // namespace ttpx
