#include <algorithm>
#include <cassert>

#include "normcheck/lifecycle.hpp"

namespace normcheck {

const char* obligation_status_name(ObligationStatus s) {
    switch (s) {
        case ObligationStatus::Active: return "ACTIVE";
        case ObligationStatus::Fulfilled: return "FULFILLED";
        case ObligationStatus::Violated: return "VIOLATED";
        case ObligationStatus::Compensated: return "COMPENSATED";
        case ObligationStatus::Terminated: return "TERMINATED";
    }
    return "?";
}

const char* event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::Entered: return "entered";
        case EventKind::Fulfilled: return "fulfilled";
        case EventKind::Violated: return "violated";
        case EventKind::CompensationActivated: return "compensation-activated";
        case EventKind::Terminated: return "terminated";
    }
    return "?";
}

DeonticLiteralSet ambient_of(const std::vector<ObligationInstance>& instances) {
    DeonticLiteralSet out;
    for (const auto& inst : instances)
        if (inst.status == ObligationStatus::Active) out.insert(inst.deontic_literal());
    return out;
}

namespace {

ObligationInstance make_instance(const std::string& rule_id, const ReparationChain& chain,
                                 std::size_t chain_index, std::size_t start) {
    const DeonticLiteral& link = chain.links[chain_index - 1];
    ObligationInstance inst;
    inst.content = link.content;
    inst.modality = link.modality;
    inst.source_rule = rule_id;
    inst.chain = chain;
    inst.chain_index = chain_index;
    inst.start = start;
    return inst;
}

// Records a violation; on the first violation of the instance, activates the
// next chain link (if any) at the violation position. Returns the spawned
// instance's index.
std::optional<std::size_t> record_violation(std::vector<ObligationInstance>& instances,
                                            std::size_t idx, std::size_t pos) {
    ObligationInstance& inst = instances[idx];
    const bool first = inst.violation_positions.empty();
    inst.violation_positions.insert(pos);
    if (!first || inst.chain_index >= inst.chain.links.size()) return std::nullopt;
    instances.push_back(
        make_instance(inst.source_rule, inst.chain, inst.chain_index + 1, pos));
    instances[idx].successor = instances.size() - 1;
    return instances.size() - 1;
}

LiteralSet termination_targets(const RuleSet& rs, const ConclusionSet& concl) {
    LiteralSet out;
    for (const std::string& id : concl.fired_rules) {
        const Rule* rule = rs.find_rule(id);
        if (rule) out.insert(rule->terminates.begin(), rule->terminates.end());
    }
    return out;
}

bool achievement_hit(const ObligationInstance& inst, const LiteralSet& state,
                     const LiteralSet& ever_seen) {
    return is_preemptive(inst.modality) ? ever_seen.count(inst.content) > 0
                                        : state.count(inst.content) > 0;
}

}  // namespace

// ── step(): the per-position transition, incremental form ───────────────────

std::vector<Event> step(StepCarry& carry, const RuleSet& rs, const ConclusionSet& in_force,
                        const LiteralSet& state, std::size_t k, const LifecycleConfig& cfg) {
    std::vector<Event> events;
    auto& instances = carry.instances;
    carry.ever_seen.insert(state.begin(), state.end());

    // Reapply mode: a rule-derived obligation leaves force once its rule no
    // longer fires. Interval closed at k-1; compensations enter at k.
    if (cfg.force_mode == LifecycleConfig::ForceMode::Reapply && k > 1) {
        std::set<std::string> fired_now;
        for (const auto& c : in_force.deontic) fired_now.insert(c.rule_id);
        const std::size_t count = instances.size();
        for (std::size_t i = 0; i < count; ++i) {
            ObligationInstance& inst = instances[i];
            if (inst.status != ObligationStatus::Active || inst.chain_index != 1) continue;
            if (fired_now.count(inst.source_rule)) continue;
            if (inst.modality == Modality::OM) {
                inst.status = ObligationStatus::Fulfilled;
                inst.end = k - 1;
                events.push_back(Event{k - 1, EventKind::Fulfilled, i});
            } else {
                inst.status = ObligationStatus::Violated;
                inst.end = k - 1;
                auto spawned = record_violation(instances, i, k - 1);
                events.push_back(Event{k - 1, EventKind::Violated, i});
                if (spawned) {
                    instances[*spawned].start = k;  // actionable from the detection position
                    events.push_back(Event{k, EventKind::CompensationActivated, *spawned});
                }
            }
        }
    }

    // New prescription episodes: the rule fires now, did not fire at k-1, and
    // no live instance of the same rule occupies the key.
    for (const auto& c : in_force.deontic) {
        if (carry.fired_prev.count(c.rule_id)) continue;
        bool occupied = false;
        for (const auto& inst : instances)
            if (inst.status == ObligationStatus::Active && inst.chain_index == 1 &&
                inst.source_rule == c.rule_id) {
                occupied = true;
                break;
            }
        if (occupied) continue;
        instances.push_back(make_instance(c.rule_id, c.chain, 1, k));
        events.push_back(Event{k, EventKind::Entered, instances.size() - 1});
    }

    // Per-type checks. Index loop on purpose: compensations spawned here are
    // appended and get their own check at this same position.
    for (std::size_t i = 0; i < instances.size(); ++i) {
        ObligationInstance& inst = instances[i];
        if (inst.status == ObligationStatus::Violated && inst.modality == Modality::OM &&
            !inst.observation_stopped) {
            // Breached maintenance stays under observation; later gaps are
            // recorded but do not re-trigger the chain.
            if (!state.count(inst.content)) inst.violation_positions.insert(k);
            continue;
        }
        if (inst.status != ObligationStatus::Active) continue;
        switch (inst.modality) {
            case Modality::P: break;
            case Modality::OPU:
                inst.end = k;
                if (state.count(inst.content)) {
                    inst.status = ObligationStatus::Fulfilled;
                    events.push_back(Event{k, EventKind::Fulfilled, i});
                } else {
                    inst.status = ObligationStatus::Violated;
                    auto spawned = record_violation(instances, i, k);
                    events.push_back(Event{k, EventKind::Violated, i});
                    if (spawned)
                        events.push_back(Event{k, EventKind::CompensationActivated, *spawned});
                }
                break;
            case Modality::OM:
                if (!state.count(inst.content)) {
                    inst.status = ObligationStatus::Violated;
                    inst.end = k;
                    auto spawned = record_violation(instances, i, k);
                    events.push_back(Event{k, EventKind::Violated, i});
                    if (spawned)
                        events.push_back(Event{k, EventKind::CompensationActivated, *spawned});
                }
                break;
            default:  // achievement flavours
                if (achievement_hit(inst, state, carry.ever_seen)) {
                    inst.status = ObligationStatus::Fulfilled;
                    inst.end = k;
                    events.push_back(Event{k, EventKind::Fulfilled, i});
                }
                break;
        }
    }

    // Terminations, after the position's checks. A terminates clause is a
    // removal for non-perdurant instances and a deadline for perdurant ones.
    const LiteralSet targets = termination_targets(rs, in_force);
    std::vector<std::size_t> pending;
    const std::size_t count = instances.size();
    for (std::size_t i = 0; i < count; ++i) {
        ObligationInstance& inst = instances[i];
        if (!targets.count(inst.content)) continue;
        if (inst.status == ObligationStatus::Violated && inst.modality == Modality::OM)
            inst.observation_stopped = true;
        if (inst.status != ObligationStatus::Active) continue;
        if (is_perdurant(inst.modality)) {
            auto spawned = record_violation(instances, i, k);
            events.push_back(Event{k, EventKind::Violated, i});
            if (spawned) {
                events.push_back(Event{k, EventKind::CompensationActivated, *spawned});
                pending.push_back(*spawned);
            }
        } else {
            inst.status = ObligationStatus::Terminated;
            inst.end = k;
            events.push_back(Event{k, EventKind::Terminated, i});
        }
    }
    // Compensations spawned by deadlines still get this position's check.
    while (!pending.empty()) {
        std::size_t i = pending.back();
        pending.pop_back();
        ObligationInstance& inst = instances[i];
        switch (inst.modality) {
            case Modality::P: break;
            case Modality::OPU:
                inst.end = k;
                if (state.count(inst.content)) {
                    inst.status = ObligationStatus::Fulfilled;
                    events.push_back(Event{k, EventKind::Fulfilled, i});
                } else {
                    inst.status = ObligationStatus::Violated;
                    auto spawned = record_violation(instances, i, k);
                    events.push_back(Event{k, EventKind::Violated, i});
                    if (spawned) {
                        events.push_back(Event{k, EventKind::CompensationActivated, *spawned});
                        pending.push_back(*spawned);
                    }
                }
                break;
            case Modality::OM:
                if (!state.count(inst.content)) {
                    inst.status = ObligationStatus::Violated;
                    inst.end = k;
                    auto spawned = record_violation(instances, i, k);
                    events.push_back(Event{k, EventKind::Violated, i});
                    if (spawned) {
                        events.push_back(Event{k, EventKind::CompensationActivated, *spawned});
                        pending.push_back(*spawned);
                    }
                }
                break;
            default:
                if (achievement_hit(inst, state, carry.ever_seen)) {
                    inst.status = ObligationStatus::Fulfilled;
                    inst.end = k;
                    events.push_back(Event{k, EventKind::Fulfilled, i});
                }
                break;
        }
    }

    carry.fired_prev.clear();
    for (const auto& c : in_force.deontic) carry.fired_prev.insert(c.rule_id);
    return events;
}

// ── End-of-trace closure ────────────────────────────────────────────────────

namespace {

// Closes one ACTIVE instance at trace end; compensations spawned here enter
// at the last position and cascade recursively (depth bounded by the chain).
void close_at_end(std::vector<ObligationInstance>& instances, std::size_t idx,
                  std::size_t len, const LiteralSet& last_state,
                  const LiteralSet& ever_seen);

void check_spawned_at_end(std::vector<ObligationInstance>& instances, std::size_t idx,
                          std::size_t len, const LiteralSet& last_state,
                          const LiteralSet& ever_seen) {
    ObligationInstance& inst = instances[idx];
    bool hit = false;
    switch (inst.modality) {
        case Modality::P: return;
        case Modality::OPU:
        case Modality::OM: hit = last_state.count(inst.content) > 0; break;
        default: hit = achievement_hit(inst, last_state, ever_seen); break;
    }
    if (hit) {
        inst.status = ObligationStatus::Fulfilled;
        inst.end = len;
        return;
    }
    inst.status = ObligationStatus::Violated;
    inst.end = len;
    auto spawned = record_violation(instances, idx, len);
    if (spawned) check_spawned_at_end(instances, *spawned, len, last_state, ever_seen);
}

void close_at_end(std::vector<ObligationInstance>& instances, std::size_t idx,
                  std::size_t len, const LiteralSet& last_state,
                  const LiteralSet& ever_seen) {
    ObligationInstance& inst = instances[idx];
    assert(inst.status == ObligationStatus::Active);
    assert(inst.modality != Modality::OPU);  // punctual resolves at its position
    if (inst.modality == Modality::OM) {
        // Survived its whole in-force interval without a gap.
        inst.status = ObligationStatus::Fulfilled;
        inst.end = len;
        return;
    }
    // Unfulfilled achievement: the interval closes with the trace. Perdurant
    // instances that already took a deadline violation just close VIOLATED;
    // otherwise the violation is raised here.
    if (inst.violated()) {
        inst.status = ObligationStatus::Violated;
        inst.end = len;
        return;
    }
    inst.status = ObligationStatus::Violated;
    inst.end = len;
    auto spawned = record_violation(instances, idx, len);
    if (spawned) check_spawned_at_end(instances, *spawned, len, last_state, ever_seen);
}

}  // namespace

std::vector<bool> amended_flags(const std::vector<ObligationInstance>& instances,
                                bool strict) {
    // Back to front: successors always have larger indexes.
    std::vector<bool> amended(instances.size(), false);
    for (std::size_t i = instances.size(); i-- > 0;) {
        const ObligationInstance& inst = instances[i];
        if (!inst.violated() || !inst.successor) continue;
        const ObligationInstance& succ = instances[*inst.successor];
        amended[i] = !succ.violated() || (!strict && amended[*inst.successor]);
    }
    return amended;
}

TraceResult finalize(std::vector<ObligationInstance> instances, const ResolvedTrace& trace,
                     const StateSequence& states, const LiteralSet& ever_seen,
                     const LifecycleConfig& cfg) {
    const std::size_t len = trace.size();
    const LiteralSet& last_state = states.at(len);
    const std::size_t carried = instances.size();
    for (std::size_t i = 0; i < carried; ++i)
        if (instances[i].status == ObligationStatus::Active)
            close_at_end(instances, i, len, last_state, ever_seen);

    const std::vector<bool> amended = amended_flags(instances, cfg.strict_compensation);
    for (std::size_t i = 0; i < instances.size(); ++i)
        if (instances[i].status == ObligationStatus::Violated && amended[i])
            instances[i].status = ObligationStatus::Compensated;

    TraceResult result;
    for (const auto& step : trace) result.trace.steps.push_back(step.task_id);
    result.strongly_compliant = true;
    result.weakly_compliant = true;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        const ObligationInstance& inst = instances[i];
        if (!inst.violated()) continue;
        result.strongly_compliant = false;
        if (!amended[i]) result.weakly_compliant = false;
    }
    result.instances = std::move(instances);
    return result;
}

// ── Whole-trace evaluation (direct form) ────────────────────────────────────
//
// Deliberately not implemented as a step() fold: the two formulations are
// checked against each other (and an independent oracle) by the test suite.

namespace {

struct DirectEvaluator {
    const RuleSet& rs;
    const LifecycleConfig& cfg;
    const StateSequence& states;
    std::vector<ObligationInstance> instances;
    LiteralSet ever_seen;
    std::set<std::string> fired_prev;

    // `pending` collects spawned compensations when the caller's loop will
    // not reach them on its own (termination drain); null during the main
    // index loop, which visits appended instances itself.
    void check_active(std::size_t i, std::size_t k, const LiteralSet& state,
                      std::vector<std::size_t>* pending) {
        ObligationInstance& inst = instances[i];
        const bool present = state.count(inst.content) > 0;
        if (inst.modality == Modality::OPU) {
            inst.end = k;
            inst.status = present ? ObligationStatus::Fulfilled : ObligationStatus::Violated;
            if (!present) {
                auto s = record_violation(instances, i, k);
                if (s && pending) pending->push_back(*s);
            }
        } else if (inst.modality == Modality::OM) {
            if (!present) {
                inst.status = ObligationStatus::Violated;
                inst.end = k;
                auto s = record_violation(instances, i, k);
                if (s && pending) pending->push_back(*s);
            }
        } else if (achievement_hit(inst, state, ever_seen)) {
            inst.status = ObligationStatus::Fulfilled;
            inst.end = k;
        }
    }

    void run_position(std::size_t k) {
        const LiteralSet& state = states.at(k);
        ever_seen.insert(state.begin(), state.end());
        const ConclusionSet concl = conclusions(rs, state, ambient_of(instances));

        if (cfg.force_mode == LifecycleConfig::ForceMode::Reapply && k > 1)
            withdraw_stale(concl, k);

        for (const auto& chain : concl.deontic) {
            if (fired_prev.count(chain.rule_id) || key_occupied(chain.rule_id)) continue;
            instances.push_back(make_instance(chain.rule_id, chain.chain, 1, k));
        }

        for (std::size_t i = 0; i < instances.size(); ++i) {
            ObligationInstance& inst = instances[i];
            if (inst.status == ObligationStatus::Violated &&
                inst.modality == Modality::OM && !inst.observation_stopped) {
                if (!state.count(inst.content)) inst.violation_positions.insert(k);
                continue;
            }
            if (inst.status == ObligationStatus::Active)
                check_active(i, k, state, nullptr);
        }
        std::vector<std::size_t> spawned_here;

        const LiteralSet targets = termination_targets(rs, concl);
        const std::size_t count = instances.size();
        for (std::size_t i = 0; i < count; ++i) {
            ObligationInstance& inst = instances[i];
            if (!targets.count(inst.content)) continue;
            if (inst.status == ObligationStatus::Violated && inst.modality == Modality::OM)
                inst.observation_stopped = true;
            if (inst.status != ObligationStatus::Active) continue;
            if (is_perdurant(inst.modality)) {
                if (auto s = record_violation(instances, i, k)) spawned_here.push_back(*s);
            } else {
                inst.status = ObligationStatus::Terminated;
                inst.end = k;
            }
        }
        while (!spawned_here.empty()) {
            std::size_t i = spawned_here.back();
            spawned_here.pop_back();
            if (instances[i].status == ObligationStatus::Active)
                check_active(i, k, state, &spawned_here);
        }

        fired_prev.clear();
        for (const auto& chain : concl.deontic) fired_prev.insert(chain.rule_id);
    }

    bool key_occupied(const std::string& rule_id) const {
        for (const auto& inst : instances)
            if (inst.status == ObligationStatus::Active && inst.chain_index == 1 &&
                inst.source_rule == rule_id)
                return true;
        return false;
    }

    void withdraw_stale(const ConclusionSet& concl, std::size_t k) {
        std::set<std::string> fired_now;
        for (const auto& chain : concl.deontic) fired_now.insert(chain.rule_id);
        const std::size_t count = instances.size();
        for (std::size_t i = 0; i < count; ++i) {
            ObligationInstance& inst = instances[i];
            if (inst.status != ObligationStatus::Active || inst.chain_index != 1) continue;
            if (fired_now.count(inst.source_rule)) continue;
            if (inst.modality == Modality::OM) {
                inst.status = ObligationStatus::Fulfilled;
                inst.end = k - 1;
            } else {
                inst.status = ObligationStatus::Violated;
                inst.end = k - 1;
                if (auto s = record_violation(instances, i, k - 1))
                    instances[*s].start = k;
            }
        }
    }
};

}  // namespace

TraceResult evaluate_resolved(const RuleSet& rs, const ResolvedTrace& trace,
                              const LifecycleConfig& cfg) {
    StateSequence states = cumulate(trace);
    DirectEvaluator ev{rs, cfg, states, {}, {}, {}};
    for (std::size_t k = 1; k <= trace.size(); ++k) ev.run_position(k);
    return finalize(std::move(ev.instances), trace, states, ev.ever_seen, cfg);
}

TraceResult evaluate_trace(const RuleSet& rs, const ProcessGraph& g, const Trace& t,
                           const LifecycleConfig& cfg) {
    return evaluate_resolved(rs, resolve_trace(t, g), cfg);
}

TraceResult fold_evaluate(const RuleSet& rs, const ResolvedTrace& trace,
                          const LifecycleConfig& cfg) {
    StateSequence states = cumulate(trace);
    StepCarry carry;
    for (std::size_t k = 1; k <= trace.size(); ++k) {
        const LiteralSet& state = states.at(k);
        const ConclusionSet concl = conclusions(rs, state, ambient_of(carry.instances));
        step(carry, rs, concl, state, k, cfg);
    }
    return finalize(std::move(carry.instances), trace, states, carry.ever_seen, cfg);
}

bool results_equal(const TraceResult& a, const TraceResult& b) {
    if (a.trace != b.trace || a.strongly_compliant != b.strongly_compliant ||
        a.weakly_compliant != b.weakly_compliant ||
        a.instances.size() != b.instances.size())
        return false;
    for (std::size_t i = 0; i < a.instances.size(); ++i) {
        const auto& x = a.instances[i];
        const auto& y = b.instances[i];
        if (x.content != y.content || x.modality != y.modality ||
            x.source_rule != y.source_rule || x.chain != y.chain ||
            x.chain_index != y.chain_index || x.start != y.start || x.end != y.end ||
            x.status != y.status || x.violation_positions != y.violation_positions ||
            x.successor != y.successor)
            return false;
    }
    return true;
}

}  // namespace normcheck
