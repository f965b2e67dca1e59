#include "ttpx/technique_id.hpp"

#include "ttpx/errors.hpp"

#include <algorithm>
#include <cctype>

namespace ttpx {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool matches_grammar(std::string_view s) {
    if (s.size() != 5 && s.size() != 9) return false;
    if (s[0] != 'T') return false;
    for (std::size_t i = 1; i < 5; ++i)
        if (!is_digit(s[i])) return false;
    if (s.size() == 9) {
        if (s[5] != '.') return false;
        for (std::size_t i = 6; i < 9; ++i)
            if (!is_digit(s[i])) return false;
    }
    return true;
}

std::string_view trim(std::string_view s) {
    auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
    while (!s.empty() && ws(s.front())) s.remove_prefix(1);
    while (!s.empty() && ws(s.back())) s.remove_suffix(1);
    return s;
}

} // namespace

TechniqueId TechniqueId::parse(std::string_view raw) {
    if (!matches_grammar(raw)) throw GrammarError(std::string(raw));
    return TechniqueId(std::string(raw));
}

TechniqueId TechniqueId::normalize(std::string_view raw) {
    std::string s(trim(raw));
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (!matches_grammar(s)) throw GrammarError(std::string(raw));
    return TechniqueId(std::move(s));
}

std::optional<TechniqueId> TechniqueId::try_normalize(std::string_view raw) noexcept {
    try {
        return normalize(raw);
    } catch (...) {
        return std::nullopt;
    }
}

bool TechniqueId::is_valid(std::string_view raw) noexcept { return matches_grammar(raw); }

TechniqueId TechniqueId::parent_or_self() const {
    if (!is_subtechnique()) return *this;
    return TechniqueId(value_.substr(0, 5));
}

std::optional<TechniqueId> TechniqueId::parent() const {
    if (!is_subtechnique()) return std::nullopt;
    return parent_or_self();
}

bool parent_child_related(const TechniqueId& a, const TechniqueId& b) noexcept {
    if (a == b) return true;
    if (a.is_subtechnique() && !b.is_subtechnique()) return a.str().compare(0, 5, b.str()) == 0;
    if (b.is_subtechnique() && !a.is_subtechnique()) return b.str().compare(0, 5, a.str()) == 0;
    return false;
}

std::vector<IdToken> scan_id_tokens(std::string_view text) {
    std::vector<IdToken> out;
    auto word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
    for (std::size_t i = 0; i + 5 <= text.size(); ++i) {
        if (text[i] != 'T' && text[i] != 't') continue;
        if (i > 0 && word(text[i - 1])) continue;
        std::size_t j = i + 1;
        while (j < text.size() && j < i + 5 && is_digit(text[j])) ++j;
        if (j != i + 5) continue;
        std::size_t end = j;
        if (j + 4 <= text.size() && text[j] == '.' && is_digit(text[j + 1]) && is_digit(text[j + 2]) &&
            is_digit(text[j + 3]))
            end = j + 4;
        if (end < text.size() && word(text[end])) continue;
        out.push_back({i, end - i, TechniqueId::normalize(text.substr(i, end - i))});
        i = end - 1;
    }
    return out;
}

} // namespace ttpx
