#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "normcheck/literal.hpp"

namespace normcheck {

// ── Rule language AST ───────────────────────────────────────────────────────

// P is a permission; everything else is an obligation flavour. Achievement
// obligations carry two independent flags: preemptive (may be satisfied
// before entering force) and perdurant (stays in force after a violation).
enum class Modality {
    P,       // permission
    OPU,     // punctual obligation
    OM,      // maintenance obligation
    OAPP,    // achievement, preemptive, perdurant
    OAPNP,   // achievement, preemptive, non-perdurant
    OANPP,   // achievement, non-preemptive, perdurant
    OANPNP,  // achievement, non-preemptive, non-perdurant
};

const char* modality_name(Modality m);
std::optional<Modality> modality_from_name(std::string_view s);

inline bool is_permission(Modality m) { return m == Modality::P; }
inline bool is_achievement(Modality m) {
    return m == Modality::OAPP || m == Modality::OAPNP || m == Modality::OANPP ||
           m == Modality::OANPNP;
}
inline bool is_preemptive(Modality m) {
    return m == Modality::OAPP || m == Modality::OAPNP;
}
inline bool is_perdurant(Modality m) {
    return m == Modality::OAPP || m == Modality::OANPP;
}

struct DeonticLiteral {
    Modality modality;
    Literal content;

    auto operator<=>(const DeonticLiteral&) const = default;
    std::string str() const;
};

// O1 c1 (x) O2 c2 (x) ... — link i+1 compensates a violation of link i.
// Only the first link may be a permission, and a permission head has no tail
// (nothing can trigger it).
struct ReparationChain {
    std::vector<DeonticLiteral> links;

    auto operator<=>(const ReparationChain&) const = default;
    std::string str() const;
};

struct BodyItem {
    // Plain literal or deontic literal; chains never appear in bodies.
    std::variant<Literal, DeonticLiteral> item;

    auto operator<=>(const BodyItem&) const = default;
    bool is_deontic() const { return std::holds_alternative<DeonticLiteral>(item); }
    std::string str() const;
};

struct DefinitionalHead {
    Literal literal;
    auto operator<=>(const DefinitionalHead&) const = default;
};
struct DeonticHead {
    ReparationChain chain;
    auto operator<=>(const DeonticHead&) const = default;
};

struct Rule {
    std::string id;
    std::vector<BodyItem> body;  // ordered, duplicate-free
    std::variant<DefinitionalHead, DeonticHead> head;
    LiteralSet terminates;  // contents whose in-force obligations this rule ends

    auto operator<=>(const Rule&) const = default;
    bool is_definitional() const { return std::holds_alternative<DefinitionalHead>(head); }
    const DefinitionalHead* definitional() const { return std::get_if<DefinitionalHead>(&head); }
    const DeonticHead* deontic() const { return std::get_if<DeonticHead>(&head); }
};

struct RuleSet {
    std::vector<Rule> rules;                                    // unique ids, file order
    std::vector<std::pair<std::string, std::string>> superiority;  // (winner, loser), sorted unique

    auto operator<=>(const RuleSet&) const = default;
    const Rule* find_rule(std::string_view id) const;
    bool is_superior(const std::string& winner, const std::string& loser) const;
};

// True iff the two rules' heads can collide: complementary definitional
// heads, complementary obligation contents (first chain links), or an
// obligation against a permission of the complement. Permissions never
// conflict with permissions.
bool rules_conflict(const Rule& a, const Rule& b);

// ── Parsing ─────────────────────────────────────────────────────────────────

// Any rejected input carries a 1-based position.
struct ParseError : std::runtime_error {
    ParseError(std::string msg, std::size_t line, std::size_t column)
        : std::runtime_error(msg + " (line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ")"),
          message(std::move(msg)),
          line(line),
          column(column) {}

    std::string message;
    std::size_t line;
    std::size_t column;
};

// Line-oriented grammar, '#' comments:
//   rule := ID ':' body? '=>' head terminates?
//   body := atomOrDeontic (',' atomOrDeontic)*
//   head := literal | chain
//   chain := deontic ('(x)' deontic)*
//   deontic := '[' MOD ']' literal
//   terminates := 'terminates' '{' literal (',' literal)* '}'
//   sup := ID '>' ID
// [F]p is accepted as sugar for [OM]~p. 'terminates' is reserved.
RuleSet parse_rules(std::string_view text);

// Canonical rendering; parse_rules(serialize_rules(rs)) == rs structurally.
std::string serialize_rules(const RuleSet& rs);

// ── Stats (distinct vs total occurrences, per modality) ────────────────────

struct OccurrenceCount {
    std::size_t distinct = 0;
    std::size_t total = 0;
    auto operator<=>(const OccurrenceCount&) const = default;
};

struct RuleSetStats {
    std::size_t rule_count = 0;
    std::size_t definitional_rules = 0;
    std::size_t deontic_rules = 0;
    std::size_t superiority_count = 0;
    std::size_t atom_count = 0;  // distinct atoms anywhere in the ruleset
    std::map<Modality, OccurrenceCount> head_occurrences;   // per chain-link modality
    std::map<Modality, std::size_t> body_occurrences;       // deontic body literals
    OccurrenceCount compensations;  // chain links at position >= 2

    std::size_t head_total() const;
};

RuleSetStats ruleset_stats(const RuleSet& rs);

std::string stats_to_text(const RuleSetStats& s);
std::string stats_to_json(const RuleSetStats& s);

}  // namespace normcheck
