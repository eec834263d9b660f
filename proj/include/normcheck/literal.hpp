#pragma once

#include <compare>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

namespace normcheck {

// A propositional literal: an atom with a polarity. Negative literals are
// written with a leading '~' in every textual surface (annotations, rule
// files, reports).
struct Literal {
    std::string atom;
    bool positive = true;

    auto operator<=>(const Literal&) const = default;

    Literal complement() const { return Literal{atom, !positive}; }

    std::string str() const { return positive ? atom : "~" + atom; }
};

using LiteralSet = std::set<Literal>;

// [A-Za-z_][A-Za-z0-9_]*
bool is_valid_atom(std::string_view s);

// Parses "atom" / "~atom"; throws std::invalid_argument on malformed input.
Literal parse_literal(std::string_view s);

inline bool contains(const LiteralSet& set, const Literal& l) {
    return set.count(l) > 0;
}

// A set is consistent iff it holds no {l, ~l} pair.
inline bool is_consistent(const LiteralSet& set) {
    for (const auto& l : set) {
        if (l.positive && set.count(l.complement())) return false;
    }
    return true;
}

// state' = (state minus complements of incoming) ∪ incoming.
LiteralSet apply_update(const LiteralSet& state, const LiteralSet& incoming);

}  // namespace normcheck
