#pragma once

#include <compare>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace ttpx {

// ATT&CK technique identifier: `T` + 4 digits, optionally `.` + 3 digits.
// Instances always hold a grammatically valid, canonical (uppercase) value.
class TechniqueId {
public:
    // Exact grammar check, no normalization. Throws GrammarError.
    static TechniqueId parse(std::string_view raw);
    // Trims ASCII whitespace and uppercases before parsing. Throws GrammarError.
    static TechniqueId normalize(std::string_view raw);
    static std::optional<TechniqueId> try_normalize(std::string_view raw) noexcept;
    static bool is_valid(std::string_view raw) noexcept;

    const std::string& str() const noexcept { return value_; }
    bool is_subtechnique() const noexcept { return value_.size() == 9; }
    // Dot-stripped prefix for sub-techniques, the ID itself otherwise.
    TechniqueId parent_or_self() const;
    std::optional<TechniqueId> parent() const;

    auto operator<=>(const TechniqueId&) const = default;
    bool operator==(const TechniqueId&) const = default;

private:
    explicit TechniqueId(std::string value) : value_(std::move(value)) {}
    std::string value_;
};

inline std::ostream& operator<<(std::ostream& os, const TechniqueId& id) { return os << id.str(); }

// Sub-technique -> parent; identity on parents. Idempotent.
inline TechniqueId resolve_parent(const TechniqueId& id) { return id.parent_or_self(); }

// Technique-ID-shaped token inside free text (case-insensitive, word-bounded).
struct IdToken {
    std::size_t offset;
    std::size_t length;
    TechniqueId id;  // normalized
};
std::vector<IdToken> scan_id_tokens(std::string_view text);

// True when a and b are equal or one is the parent of the other.
bool parent_child_related(const TechniqueId& a, const TechniqueId& b) noexcept;

} // namespace ttpx

template <>
struct std::hash<ttpx::TechniqueId> {
    std::size_t operator()(const ttpx::TechniqueId& id) const noexcept {
        return std::hash<std::string>{}(id.str());
    }
};
