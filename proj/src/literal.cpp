#include "normcheck/literal.hpp"

namespace normcheck {

namespace {
bool is_atom_start(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
}
bool is_atom_char(char c) { return is_atom_start(c) || (c >= '0' && c <= '9'); }
}  // namespace

bool is_valid_atom(std::string_view s) {
    if (s.empty() || !is_atom_start(s[0])) return false;
    for (char c : s.substr(1))
        if (!is_atom_char(c)) return false;
    return true;
}

Literal parse_literal(std::string_view s) {
    bool positive = true;
    if (!s.empty() && s[0] == '~') {
        positive = false;
        s.remove_prefix(1);
    }
    if (!is_valid_atom(s))
        throw std::invalid_argument("malformed literal: '" + std::string(s) + "'");
    return Literal{std::string(s), positive};
}

LiteralSet apply_update(const LiteralSet& state, const LiteralSet& incoming) {
    LiteralSet out = state;
    for (const auto& l : incoming) out.erase(l.complement());
    for (const auto& l : incoming) out.insert(l);
    return out;
}

}  // namespace normcheck
