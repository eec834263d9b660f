#pragma once

#include <optional>

#include "normcheck/lifecycle.hpp"
#include "normcheck/reasoner.hpp"

namespace normcheck::testing {

// ── Reasoner oracle ─────────────────────────────────────────────────────────
//
// Enumerates every three-valued survival assignment over the rules, keeps
// the fixpoints of the defeasible-conclusion equations, and returns the
// information-least one. Exponential (3^rules): only for small rulesets.

struct OracleConclusions {
    LiteralSet facts;
    std::vector<InForceChain> deontic;
    DeonticLiteralSet permissions;
    std::set<std::string> fired_rules;
};

// nullopt when no unique least fixpoint exists (which would itself be a bug:
// the equations are monotone).
std::optional<OracleConclusions> oracle_conclusions(const RuleSet& rs, const LiteralSet& state,
                                                    const DeonticLiteralSet& ambient = {});

bool conclusions_agree(const OracleConclusions& oracle, const ConclusionSet& engine);

// ── Per-trace obligation oracle ─────────────────────────────────────────────
//
// Independent re-implementation of the obligation lifecycle over one trace:
// prescription episodes with interval records, violation predicates
// evaluated as formulas over the state sequence, compensation resolved by
// the recursive amendment definition. Shares only conclusions() with the
// engine under test.

struct OracleVerdict {
    bool strong = true;
    bool weak = true;
};

OracleVerdict oracle_trace_verdict(const RuleSet& rs, const ResolvedTrace& trace,
                                   const LifecycleConfig& cfg);

struct OracleProcessVerdicts {
    bool fully_strong = true;
    bool fully_weak = true;
    bool partially_strong = false;
    bool partially_weak = false;
    std::size_t traces = 0;
};

// Token-game enumeration + per-trace oracle, aggregated over the 2x2 matrix.
OracleProcessVerdicts oracle_process_verdicts(const ProcessGraph& g, const RuleSet& rs,
                                              const LifecycleConfig& cfg);

}  // namespace normcheck::testing
