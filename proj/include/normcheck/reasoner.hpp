#pragma once

#include <set>
#include <vector>

#include "normcheck/fcl.hpp"
#include "normcheck/literal.hpp"
#include "normcheck/state.hpp"

namespace normcheck {

using DeonticLiteralSet = std::set<DeonticLiteral>;

// One reparation chain in force, attributed to the rule that derived it.
// Two rules deriving the same content give two distinct entries.
struct InForceChain {
    std::string rule_id;
    ReparationChain chain;

    auto operator<=>(const InForceChain&) const = default;
};

struct ConclusionSet {
    LiteralSet facts;                   // input state ∪ surviving definitional heads
    std::vector<InForceChain> deontic;  // surviving obligation chains, sorted by rule id
    DeonticLiteralSet permissions;      // surviving permission heads
    std::set<std::string> fired_rules;  // every surviving rule (definitional included)

    bool has_chain_of(const std::string& rule_id) const;
};

// Defeasible consequences of one state under the ruleset.
//
// Semantics: the least 3-valued fixpoint of
//   lit(q)    = true if q ∈ state, false if ~q ∈ state,
//               else OR over definitional rules for q of surv(r)
//   deon(d)   = true if d ∈ ambient, else OR over rules whose head chain
//               starts with d (or permission head d) of surv(r)
//   app(r)    = AND over body items of lit/deon
//   surv(r)   = app(r) AND, for every conflicting rule s,
//               (r declared superior to s) OR NOT app(s)
// Conflicts follow rules_conflict(). A pair with no superiority in either
// direction suppresses both sides; superiority suppresses the loser only.
// Ambient deontic literals are context: they satisfy bodies but neither
// attack nor can be attacked.
ConclusionSet conclusions(const RuleSet& rs, const LiteralSet& state,
                          const DeonticLiteralSet& ambient = {});

// Position-indexed in-force chains over a whole state sequence (1-based;
// out-of-range positions are empty). `ambient` may supply per-position
// carried obligations; absent entries default to none.
struct ForceMap {
    std::vector<std::vector<InForceChain>> by_position;  // index 0 = position 1

    const std::vector<InForceChain>& at(std::size_t position) const;
};

ForceMap force(const RuleSet& rs, const StateSequence& seq,
               const std::vector<DeonticLiteralSet>& ambient = {});

}  // namespace normcheck
