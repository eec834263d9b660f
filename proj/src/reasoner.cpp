#include <algorithm>
#include <cassert>
#include <map>
#include <stdexcept>

#include "normcheck/reasoner.hpp"

namespace normcheck {

namespace {

// Kleene three-valued logic; Unknown is the information bottom.
enum class Tri : unsigned char { False, True, Unknown };

Tri tri_not(Tri t) {
    switch (t) {
        case Tri::True: return Tri::False;
        case Tri::False: return Tri::True;
        default: return Tri::Unknown;
    }
}

class Engine {
public:
    Engine(const RuleSet& rs, const LiteralSet& state, const DeonticLiteralSet& ambient)
        : rs_(rs), state_(state), ambient_(ambient) {
        const std::size_t n = rs.rules.size();
        surv_.assign(n, Tri::Unknown);
        for (std::size_t i = 0; i < n; ++i) {
            const Rule& r = rs.rules[i];
            if (const auto* def = r.definitional()) {
                def_by_head_[def->literal].push_back(i);
            } else {
                deontic_by_first_[r.deontic()->chain.links.front()].push_back(i);
            }
            for (std::size_t j = 0; j < i; ++j) {
                if (rules_conflict(r, rs.rules[j])) {
                    conflicts_[i].push_back(j);
                    conflicts_[j].push_back(i);
                }
            }
        }
    }

    // Iterates the sweep operator from the all-Unknown assignment. Labels
    // only move Unknown -> True/False, so every sweep that changes anything
    // decides at least one rule and the loop runs at most |rules| productive
    // sweeps before the stability check.
    void run() {
        std::size_t iterations = 0;
        while (true) {
            std::vector<Tri> app(rs_.rules.size());
            for (std::size_t i = 0; i < rs_.rules.size(); ++i) app[i] = applicability(i);
            std::vector<Tri> next(rs_.rules.size());
            for (std::size_t i = 0; i < rs_.rules.size(); ++i) next[i] = survival(i, app);
            lit_memo_.clear();
            deon_memo_.clear();
            if (next == surv_) break;
            surv_ = std::move(next);
            ++iterations;
            assert(iterations <= rs_.rules.size());
            if (iterations > rs_.rules.size())
                throw std::logic_error("reasoner fixpoint exceeded its iteration bound");
        }
    }

    ConclusionSet result() const {
        ConclusionSet out;
        out.facts = state_;
        for (std::size_t i = 0; i < rs_.rules.size(); ++i) {
            if (surv_[i] != Tri::True) continue;
            const Rule& r = rs_.rules[i];
            out.fired_rules.insert(r.id);
            if (const auto* def = r.definitional()) {
                out.facts.insert(def->literal);
            } else {
                const ReparationChain& chain = r.deontic()->chain;
                if (is_permission(chain.links.front().modality))
                    out.permissions.insert(chain.links.front());
                else
                    out.deontic.push_back(InForceChain{r.id, chain});
            }
        }
        std::sort(out.deontic.begin(), out.deontic.end(),
                  [](const InForceChain& a, const InForceChain& b) {
                      return a.rule_id < b.rule_id;
                  });
        assert(is_consistent(out.facts));
        return out;
    }

private:
    Tri lit_value(const Literal& q) {
        if (state_.count(q)) return Tri::True;
        if (state_.count(q.complement())) return Tri::False;
        if (auto it = lit_memo_.find(q); it != lit_memo_.end()) return it->second;
        Tri v = Tri::False;
        if (auto it = def_by_head_.find(q); it != def_by_head_.end()) {
            for (std::size_t r : it->second) {
                if (surv_[r] == Tri::True) {
                    v = Tri::True;
                    break;
                }
                if (surv_[r] == Tri::Unknown) v = Tri::Unknown;
            }
        }
        lit_memo_[q] = v;
        return v;
    }

    Tri deon_value(const DeonticLiteral& d) {
        if (ambient_.count(d)) return Tri::True;
        if (auto it = deon_memo_.find(d); it != deon_memo_.end()) return it->second;
        Tri v = Tri::False;
        if (auto it = deontic_by_first_.find(d); it != deontic_by_first_.end()) {
            for (std::size_t r : it->second) {
                if (surv_[r] == Tri::True) {
                    v = Tri::True;
                    break;
                }
                if (surv_[r] == Tri::Unknown) v = Tri::Unknown;
            }
        }
        deon_memo_[d] = v;
        return v;
    }

    Tri applicability(std::size_t idx) {
        Tri acc = Tri::True;
        for (const BodyItem& item : rs_.rules[idx].body) {
            Tri v = item.is_deontic() ? deon_value(std::get<DeonticLiteral>(item.item))
                                      : lit_value(std::get<Literal>(item.item));
            if (v == Tri::False) return Tri::False;
            if (v == Tri::Unknown) acc = Tri::Unknown;
        }
        return acc;
    }

    Tri survival(std::size_t idx, const std::vector<Tri>& app) const {
        const Rule& r = rs_.rules[idx];
        // The input state is indisputable: no definitional rule may override it.
        if (const auto* def = r.definitional())
            if (state_.count(def->literal.complement())) return Tri::False;
        Tri acc = app[idx];
        if (acc == Tri::False) return Tri::False;
        auto it = conflicts_.find(idx);
        if (it != conflicts_.end()) {
            for (std::size_t s : it->second) {
                if (rs_.is_superior(r.id, rs_.rules[s].id)) continue;  // r beats s regardless
                Tri blocked = tri_not(app[s]);
                if (blocked == Tri::False) return Tri::False;
                if (blocked == Tri::Unknown) acc = Tri::Unknown;
            }
        }
        return acc;
    }

    const RuleSet& rs_;
    const LiteralSet& state_;
    const DeonticLiteralSet& ambient_;
    std::map<Literal, std::vector<std::size_t>> def_by_head_;
    std::map<DeonticLiteral, std::vector<std::size_t>> deontic_by_first_;
    std::map<std::size_t, std::vector<std::size_t>> conflicts_;
    std::vector<Tri> surv_;
    std::map<Literal, Tri> lit_memo_;
    std::map<DeonticLiteral, Tri> deon_memo_;
};

}  // namespace

bool ConclusionSet::has_chain_of(const std::string& rule_id) const {
    return std::any_of(deontic.begin(), deontic.end(),
                       [&](const InForceChain& c) { return c.rule_id == rule_id; });
}

ConclusionSet conclusions(const RuleSet& rs, const LiteralSet& state,
                          const DeonticLiteralSet& ambient) {
    if (!is_consistent(state))
        throw std::invalid_argument("conclusions: input state is inconsistent");
    Engine engine(rs, state, ambient);
    engine.run();
    return engine.result();
}

const std::vector<InForceChain>& ForceMap::at(std::size_t position) const {
    static const std::vector<InForceChain> empty;
    if (position == 0 || position > by_position.size()) return empty;
    return by_position[position - 1];
}

ForceMap force(const RuleSet& rs, const StateSequence& seq,
               const std::vector<DeonticLiteralSet>& ambient) {
    ForceMap map;
    map.by_position.reserve(seq.size());
    static const DeonticLiteralSet no_ambient;
    for (std::size_t k = 1; k <= seq.size(); ++k) {
        const DeonticLiteralSet& amb = (k - 1 < ambient.size()) ? ambient[k - 1] : no_ambient;
        map.by_position.push_back(conclusions(rs, seq.at(k), amb).deontic);
    }
    return map;
}

}  // namespace normcheck
