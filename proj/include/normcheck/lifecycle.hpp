#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "normcheck/process_model.hpp"
#include "normcheck/reasoner.hpp"

namespace normcheck {

// ACTIVE -> {FULFILLED, VIOLATED, TERMINATED}; VIOLATED -> COMPENSATED.
// FULFILLED, COMPENSATED, TERMINATED are terminal. A perdurant instance can
// accumulate violation positions while still ACTIVE (a violation does not
// take it out of force), so an instance can end FULFILLED with recorded
// violations.
enum class ObligationStatus { Active, Fulfilled, Violated, Compensated, Terminated };

const char* obligation_status_name(ObligationStatus s);

struct ObligationInstance {
    Literal content;
    Modality modality;
    std::string source_rule;
    ReparationChain chain;
    std::size_t chain_index = 1;  // 1-based position in chain
    std::size_t start = 0;        // position the instance entered force
    std::optional<std::size_t> end;
    ObligationStatus status = ObligationStatus::Active;
    std::set<std::size_t> violation_positions;
    std::optional<std::size_t> successor;  // spawned compensation, index into instance list
    bool observation_stopped = false;      // breached maintenance: stop recording later gaps

    bool violated() const { return !violation_positions.empty(); }
    std::size_t first_violation() const { return *violation_positions.begin(); }
    DeonticLiteral deontic_literal() const { return DeonticLiteral{modality, content}; }
};

struct LifecycleConfig {
    unsigned loop_bound = 2;
    bool strict_compensation = false;  // disable Comp recursion: a compensated
                                       // compensation does not amend its target
    enum class ForceMode { Persist, Reapply };
    ForceMode force_mode = ForceMode::Persist;
    std::uint64_t trace_cap = kDefaultTraceCap;
};

struct TraceResult {
    Trace trace;
    std::vector<ObligationInstance> instances;  // creation order
    bool strongly_compliant = true;
    bool weakly_compliant = true;
};

// ── Incremental interface ───────────────────────────────────────────────────

enum class EventKind { Entered, Fulfilled, Violated, CompensationActivated, Terminated };

const char* event_kind_name(EventKind k);

struct Event {
    std::size_t position;
    EventKind kind;
    std::size_t instance;  // index into StepCarry::instances
};

// Fold accumulator for position-by-position evaluation. `ever_seen` backs
// preemptive lookback (membership in any state processed so far);
// `fired_prev` backs prescription-episode boundary detection.
struct StepCarry {
    std::vector<ObligationInstance> instances;
    LiteralSet ever_seen;
    std::set<std::string> fired_prev;
};

DeonticLiteralSet ambient_of(const std::vector<ObligationInstance>& instances);

// One position's transition: enter chains, check fulfilment/violation per
// obligation type, apply terminations. `in_force` must be the conclusions of
// `state` under ambient_of(carry.instances).
std::vector<Event> step(StepCarry& carry, const RuleSet& rs, const ConclusionSet& in_force,
                        const LiteralSet& state, std::size_t k, const LifecycleConfig& cfg);

// Per-instance amendment flags (Comp resolution): amended[i] is true iff the
// instance's violation is made good by its compensation chain — the
// successor took no violation, or (unless strict) was itself compensated.
std::vector<bool> amended_flags(const std::vector<ObligationInstance>& instances, bool strict);

// End-of-trace closure: close remaining ACTIVE instances (cascading
// compensations included), resolve COMPENSATED statuses, compute verdicts.
TraceResult finalize(std::vector<ObligationInstance> instances, const ResolvedTrace& trace,
                     const StateSequence& states, const LiteralSet& ever_seen,
                     const LifecycleConfig& cfg);

// ── Whole-trace evaluation ──────────────────────────────────────────────────

TraceResult evaluate_resolved(const RuleSet& rs, const ResolvedTrace& trace,
                              const LifecycleConfig& cfg);

TraceResult evaluate_trace(const RuleSet& rs, const ProcessGraph& g, const Trace& t,
                           const LifecycleConfig& cfg);

// step()-fold over the trace plus finalize; equals evaluate_resolved.
TraceResult fold_evaluate(const RuleSet& rs, const ResolvedTrace& trace,
                          const LifecycleConfig& cfg);

bool results_equal(const TraceResult& a, const TraceResult& b);

}  // namespace normcheck
