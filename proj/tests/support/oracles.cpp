#include <algorithm>
#include <functional>
#include <map>

#include "support/oracles.hpp"
#include "support/generators.hpp"

namespace normcheck::testing {

namespace {

// Three-valued truth written out longhand, independent of the engine.
enum Tv : int { kFalse = 0, kTrue = 1, kUnknown = 2 };

Tv tv_not(Tv v) { return v == kUnknown ? kUnknown : (v == kTrue ? kFalse : kTrue); }

struct EquationSystem {
    const RuleSet& rs;
    const LiteralSet& state;
    const DeonticLiteralSet& ambient;
    std::vector<std::vector<std::size_t>> conflicts;

    explicit EquationSystem(const RuleSet& rs_, const LiteralSet& state_,
                            const DeonticLiteralSet& ambient_)
        : rs(rs_), state(state_), ambient(ambient_), conflicts(rs.rules.size()) {
        for (std::size_t i = 0; i < rs.rules.size(); ++i)
            for (std::size_t j = 0; j < rs.rules.size(); ++j)
                if (i != j && conflicting(rs.rules[i], rs.rules[j])) conflicts[i].push_back(j);
    }

    // Re-derived, not shared with the library: complementary definitional
    // heads, complementary obligation contents, obligation vs permission of
    // the complement.
    static bool conflicting(const Rule& a, const Rule& b) {
        const auto* da = std::get_if<DefinitionalHead>(&a.head);
        const auto* db = std::get_if<DefinitionalHead>(&b.head);
        if (da && db) return da->literal.atom == db->literal.atom &&
                             da->literal.positive != db->literal.positive;
        if (da || db) return false;
        const DeonticLiteral& la = std::get<DeonticHead>(a.head).chain.links.front();
        const DeonticLiteral& lb = std::get<DeonticHead>(b.head).chain.links.front();
        if (la.content.atom != lb.content.atom ||
            la.content.positive == lb.content.positive)
            return false;
        return !(la.modality == Modality::P && lb.modality == Modality::P);
    }

    Tv literal_value(const Literal& q, const std::vector<Tv>& surv) const {
        if (state.count(q)) return kTrue;
        if (state.count(q.complement())) return kFalse;
        Tv acc = kFalse;
        for (std::size_t r = 0; r < rs.rules.size(); ++r) {
            const auto* def = std::get_if<DefinitionalHead>(&rs.rules[r].head);
            if (!def || !(def->literal == q)) continue;
            if (surv[r] == kTrue) return kTrue;
            if (surv[r] == kUnknown) acc = kUnknown;
        }
        return acc;
    }

    Tv deontic_value(const DeonticLiteral& d, const std::vector<Tv>& surv) const {
        if (ambient.count(d)) return kTrue;
        Tv acc = kFalse;
        for (std::size_t r = 0; r < rs.rules.size(); ++r) {
            const auto* head = std::get_if<DeonticHead>(&rs.rules[r].head);
            if (!head || !(head->chain.links.front() == d)) continue;
            if (surv[r] == kTrue) return kTrue;
            if (surv[r] == kUnknown) acc = kUnknown;
        }
        return acc;
    }

    Tv applicability(std::size_t r, const std::vector<Tv>& surv) const {
        Tv acc = kTrue;
        for (const BodyItem& item : rs.rules[r].body) {
            Tv v;
            if (const auto* dl = std::get_if<DeonticLiteral>(&item.item))
                v = deontic_value(*dl, surv);
            else
                v = literal_value(std::get<Literal>(item.item), surv);
            if (v == kFalse) return kFalse;
            if (v == kUnknown) acc = kUnknown;
        }
        return acc;
    }

    std::vector<Tv> apply_once(const std::vector<Tv>& surv) const {
        std::vector<Tv> app(rs.rules.size());
        for (std::size_t r = 0; r < rs.rules.size(); ++r) app[r] = applicability(r, surv);
        std::vector<Tv> out(rs.rules.size());
        for (std::size_t r = 0; r < rs.rules.size(); ++r) {
            if (const auto* def = std::get_if<DefinitionalHead>(&rs.rules[r].head)) {
                if (state.count(def->literal.complement())) {
                    out[r] = kFalse;
                    continue;
                }
            }
            Tv acc = app[r];
            for (std::size_t s : conflicts[r]) {
                if (acc == kFalse) break;
                if (rs.is_superior(rs.rules[r].id, rs.rules[s].id)) continue;
                const Tv blocked = tv_not(app[s]);
                if (blocked == kFalse) acc = kFalse;
                else if (blocked == kUnknown && acc == kTrue) acc = kUnknown;
            }
            out[r] = acc;
        }
        return out;
    }
};

bool leq_info(const std::vector<Tv>& a, const std::vector<Tv>& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != kUnknown && a[i] != b[i]) return false;
    return true;
}

}  // namespace

std::optional<OracleConclusions> oracle_conclusions(const RuleSet& rs, const LiteralSet& state,
                                                    const DeonticLiteralSet& ambient) {
    const std::size_t n = rs.rules.size();
    EquationSystem eq(rs, state, ambient);

    std::vector<std::vector<Tv>> fixpoints;
    std::vector<Tv> assignment(n, kFalse);
    const std::size_t total = [&] {
        std::size_t t = 1;
        for (std::size_t i = 0; i < n; ++i) t *= 3;
        return t;
    }();
    for (std::size_t code = 0; code < total; ++code) {
        std::size_t rest = code;
        for (std::size_t i = 0; i < n; ++i) {
            assignment[i] = static_cast<Tv>(rest % 3);
            rest /= 3;
        }
        if (eq.apply_once(assignment) == assignment) fixpoints.push_back(assignment);
    }
    std::optional<std::vector<Tv>> least;
    for (const auto& fp : fixpoints) {
        bool below_all = true;
        for (const auto& other : fixpoints) below_all = below_all && leq_info(fp, other);
        if (below_all) {
            if (least) return std::nullopt;  // not unique: monotonicity bug
            least = fp;
        }
    }
    if (!least) return std::nullopt;

    OracleConclusions out;
    out.facts = state;
    for (std::size_t r = 0; r < n; ++r) {
        if ((*least)[r] != kTrue) continue;
        const Rule& rule = rs.rules[r];
        out.fired_rules.insert(rule.id);
        if (const auto* def = std::get_if<DefinitionalHead>(&rule.head)) {
            out.facts.insert(def->literal);
        } else {
            const ReparationChain& chain = std::get<DeonticHead>(rule.head).chain;
            if (chain.links.front().modality == Modality::P)
                out.permissions.insert(chain.links.front());
            else
                out.deontic.push_back(InForceChain{rule.id, chain});
        }
    }
    std::sort(out.deontic.begin(), out.deontic.end(),
              [](const InForceChain& a, const InForceChain& b) { return a.rule_id < b.rule_id; });
    return out;
}

bool conclusions_agree(const OracleConclusions& oracle, const ConclusionSet& engine) {
    return oracle.facts == engine.facts && oracle.deontic == engine.deontic &&
           oracle.permissions == engine.permissions &&
           oracle.fired_rules == engine.fired_rules;
}

// ── Per-trace oracle ────────────────────────────────────────────────────────

namespace {

// An episode is one prescription interval of a chain link. Outcomes are
// recorded as raw facts (violation positions, fulfilment, benign removal)
// and interpreted afterwards.
struct Episode {
    std::string rule;
    ReparationChain chain;
    std::size_t link = 1;          // 1-based
    std::size_t entered = 0;       // position it entered force
    std::optional<std::size_t> closed;  // position it left force
    bool fulfilled = false;
    bool removed = false;  // benign termination
    std::vector<std::size_t> violations;
    std::optional<std::size_t> next;  // spawned compensation episode

    const DeonticLiteral& dl() const { return chain.links[link - 1]; }
    bool live() const { return !closed.has_value(); }
};

struct TraceOracle {
    const RuleSet& rs;
    const LifecycleConfig& cfg;
    std::vector<LiteralSet> states;  // 1-based via states[k-1]
    LiteralSet seen;
    std::vector<Episode> eps;
    std::set<std::string> fired_prev;

    const LiteralSet& state_of(std::size_t k) const {
        static const LiteralSet empty;
        return (k >= 1 && k <= states.size()) ? states[k - 1] : empty;
    }

    bool content_hit(const Episode& e, std::size_t k) const {
        const Literal& c = e.dl().content;
        if (is_preemptive(e.dl().modality)) return seen.count(c) > 0;
        return state_of(k).count(c) > 0;
    }

    std::size_t spawn(std::size_t parent, std::size_t pos) {
        Episode comp;
        comp.rule = eps[parent].rule;
        comp.chain = eps[parent].chain;
        comp.link = eps[parent].link + 1;
        comp.entered = pos;
        eps.push_back(std::move(comp));
        eps[parent].next = eps.size() - 1;
        return eps.size() - 1;
    }

    // First violation spawns the next link when one exists; returns the
    // fresh child's index.
    std::optional<std::size_t> violate(std::size_t i, std::size_t pos,
                                       std::vector<std::size_t>* fresh) {
        const bool first = eps[i].violations.empty();
        eps[i].violations.push_back(pos);
        if (first && eps[i].link < eps[i].chain.links.size()) {
            const std::size_t child = spawn(i, pos);
            if (fresh) fresh->push_back(child);
            return child;
        }
        return std::nullopt;
    }

    void check(std::size_t i, std::size_t k, std::vector<std::size_t>* fresh) {
        Episode& e = eps[i];
        switch (e.dl().modality) {
            case Modality::P: return;
            case Modality::OPU:
                e.closed = k;
                if (state_of(k).count(e.dl().content)) e.fulfilled = true;
                else violate(i, k, fresh);
                return;
            case Modality::OM:
                if (!state_of(k).count(e.dl().content)) {
                    e.closed = k;
                    violate(i, k, fresh);
                }
                return;
            default:
                if (content_hit(e, k)) {
                    eps[i].fulfilled = true;
                    eps[i].closed = k;
                }
                return;
        }
    }

    void run(const ResolvedTrace& trace) {
        const std::size_t len = trace.size();
        for (std::size_t k = 1; k <= len; ++k) {
            const LiteralSet& state = state_of(k);
            seen.insert(state.begin(), state.end());

            DeonticLiteralSet ambient;
            for (const Episode& e : eps)
                if (e.entered < k && e.live()) ambient.insert(e.dl());
            const ConclusionSet concl = conclusions(rs, state, ambient);

            if (cfg.force_mode == LifecycleConfig::ForceMode::Reapply && k > 1) {
                std::set<std::string> fired_now;
                for (const auto& c : concl.deontic) fired_now.insert(c.rule_id);
                const std::size_t count = eps.size();
                for (std::size_t i = 0; i < count; ++i) {
                    Episode& e = eps[i];
                    if (!e.live() || e.link != 1 || fired_now.count(e.rule)) continue;
                    e.closed = k - 1;
                    if (e.dl().modality == Modality::OM) {
                        e.fulfilled = true;
                    } else {
                        if (auto child = violate(i, k - 1, nullptr))
                            eps[*child].entered = k;
                    }
                }
            }

            for (const auto& c : concl.deontic) {
                if (fired_prev.count(c.rule_id)) continue;
                bool occupied = false;
                for (const Episode& e : eps)
                    occupied = occupied || (e.live() && e.link == 1 && e.rule == c.rule_id);
                if (occupied) continue;
                Episode e;
                e.rule = c.rule_id;
                e.chain = c.chain;
                e.link = 1;
                e.entered = k;
                eps.push_back(std::move(e));
            }

            for (std::size_t i = 0; i < eps.size(); ++i)
                if (eps[i].live()) check(i, k, nullptr);

            LiteralSet targets;
            for (const std::string& id : concl.fired_rules)
                if (const Rule* rule = rs.find_rule(id))
                    targets.insert(rule->terminates.begin(), rule->terminates.end());
            std::vector<std::size_t> fresh;
            const std::size_t count = eps.size();
            for (std::size_t i = 0; i < count; ++i) {
                Episode& e = eps[i];
                if (!e.live() || !targets.count(e.dl().content)) continue;
                if (is_perdurant(e.dl().modality)) {
                    violate(i, k, &fresh);  // deadline; stays in force
                } else {
                    e.closed = k;
                    e.removed = true;
                }
            }
            while (!fresh.empty()) {
                const std::size_t i = fresh.back();
                fresh.pop_back();
                if (eps[i].live()) check(i, k, &fresh);
            }

            fired_prev.clear();
            for (const auto& c : concl.deontic) fired_prev.insert(c.rule_id);
        }

        // Close what is still in force at trace end.
        std::vector<std::size_t> fresh;
        const std::size_t count = eps.size();
        for (std::size_t i = 0; i < count; ++i) {
            Episode& e = eps[i];
            if (!e.live()) continue;
            e.closed = len;
            if (e.dl().modality == Modality::OM) {
                e.fulfilled = true;
            } else if (e.violations.empty()) {
                violate(i, len, &fresh);
            }
        }
        while (!fresh.empty()) {
            const std::size_t i = fresh.back();
            fresh.pop_back();
            Episode& e = eps[i];
            if (!e.live()) continue;
            if (e.dl().modality == Modality::OM || e.dl().modality == Modality::OPU) {
                e.closed = len;
                if (state_of(len).count(e.dl().content)) e.fulfilled = true;
                else violate(i, len, &fresh);
            } else {
                e.closed = len;
                if (content_hit(e, len)) e.fulfilled = true;
                else violate(i, len, &fresh);
            }
        }
    }

    OracleVerdict verdict() const {
        // amended(e): successor exists and took no violation, or (unless
        // strict) the successor's own violation was amended.
        std::vector<int> amended(eps.size(), -1);
        std::function<bool(std::size_t)> is_amended = [&](std::size_t i) -> bool {
            if (amended[i] != -1) return amended[i] == 1;
            bool value = false;
            if (!eps[i].violations.empty() && eps[i].next) {
                const std::size_t s = *eps[i].next;
                value = eps[s].violations.empty() ||
                        (!cfg.strict_compensation && is_amended(s));
            }
            amended[i] = value ? 1 : 0;
            return value;
        };
        OracleVerdict v;
        for (std::size_t i = 0; i < eps.size(); ++i) {
            if (eps[i].violations.empty()) continue;
            v.strong = false;
            if (!is_amended(i)) v.weak = false;
        }
        return v;
    }
};

}  // namespace

OracleVerdict oracle_trace_verdict(const RuleSet& rs, const ResolvedTrace& trace,
                                   const LifecycleConfig& cfg) {
    TraceOracle oracle{rs, cfg, {}, {}, {}, {}};
    LiteralSet cur;
    for (const auto& step : trace) {
        for (const auto& l : step.annotations) cur.erase(l.complement());
        for (const auto& l : step.annotations) cur.insert(l);
        oracle.states.push_back(cur);
    }
    oracle.run(trace);
    return oracle.verdict();
}

OracleProcessVerdicts oracle_process_verdicts(const ProcessGraph& g, const RuleSet& rs,
                                              const LifecycleConfig& cfg) {
    OracleProcessVerdicts out;
    for (const auto& steps : token_game_traces(g, cfg.loop_bound)) {
        ResolvedTrace trace;
        for (const auto& id : steps) {
            const Node* node = g.find(id);
            trace.push_back(ResolvedStep{id, node->annotations});
        }
        const OracleVerdict v = oracle_trace_verdict(rs, trace, cfg);
        out.fully_strong = out.fully_strong && v.strong;
        out.fully_weak = out.fully_weak && v.weak;
        out.partially_strong = out.partially_strong || v.strong;
        out.partially_weak = out.partially_weak || v.weak;
        ++out.traces;
    }
    return out;
}

}  // namespace normcheck::testing
