#pragma once

#include <cstddef>
#include <vector>

#include "normcheck/literal.hpp"

namespace normcheck {

// Per-position environment states of a trace, 1-based. states()[k-1] is the
// state after executing the k-th task; position 0 (and anything out of
// range) reads as the empty set so interval predicates can look at n-1/m+1
// without special cases.
class StateSequence {
public:
    StateSequence() = default;
    explicit StateSequence(std::vector<LiteralSet> states) : states_(std::move(states)) {}

    std::size_t size() const { return states_.size(); }
    const std::vector<LiteralSet>& states() const { return states_; }

    // Empty set for n == 0 or n > size().
    const LiteralSet& at(std::size_t n) const;

    void push(LiteralSet s) { states_.push_back(std::move(s)); }

private:
    std::vector<LiteralSet> states_;
};

const LiteralSet& state_at(const StateSequence& seq, std::size_t n);

// A trace with task ids resolved to their annotation sets. Built from a
// model trace (resolve_trace) or directly from an event log.
struct ResolvedStep {
    std::string task_id;
    LiteralSet annotations;

    auto operator<=>(const ResolvedStep&) const = default;
};
using ResolvedTrace = std::vector<ResolvedStep>;

// Fold of the update semantics: state[k] = apply_update(state[k-1],
// annotations(task_k)), starting from the empty state.
StateSequence cumulate(const ResolvedTrace& trace);

}  // namespace normcheck
