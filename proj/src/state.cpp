#include "normcheck/state.hpp"

namespace normcheck {

const LiteralSet& StateSequence::at(std::size_t n) const {
    static const LiteralSet empty;
    if (n == 0 || n > states_.size()) return empty;
    return states_[n - 1];
}

const LiteralSet& state_at(const StateSequence& seq, std::size_t n) { return seq.at(n); }

StateSequence cumulate(const ResolvedTrace& trace) {
    StateSequence seq;
    LiteralSet current;
    for (const auto& step : trace) {
        current = apply_update(current, step.annotations);
        seq.push(current);
    }
    return seq;
}

}  // namespace normcheck
