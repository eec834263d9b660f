#pragma once

#include <cstdint>
#include <string>

#include "normcheck/fcl.hpp"
#include "normcheck/process_model.hpp"

namespace normcheck {

struct BenchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Model shape targets. shortest/longest count tasks on the shortest and the
// longest loop-free start-to-end path. xor_decisions counts non-loop XOR
// splits; the loop-exit splits of `loops` structured loops are additional.
struct BenchShape {
    unsigned tasks = 41;
    unsigned xor_decisions = 12;
    unsigned ternary = 1;  // how many of the decisions have three branches
    unsigned loops = 2;
    unsigned shortest = 6;
    unsigned longest = 22;
    std::uint64_t seed = 1;
};

struct BenchRuleShape {
    unsigned rules = 176;
    unsigned propositions = 223;  // distinct atoms across the ruleset
    unsigned superiority = 7;
    unsigned definitional = 33;
    std::uint64_t seed = 1;
};

// Deterministic given the shape (the seed only drives annotations). Throws
// BenchError when the targets cannot be met.
ProcessGraph generate_model(const BenchShape& shape);

// Deterministic given shape + model; body and annotation atoms are shared
// with the model so rules actually fire along its traces.
RuleSet generate_rules(const BenchRuleShape& shape, ProcessGraph& model);

// Measured properties of a generated model, for reporting and asserting the
// shape targets.
struct ModelProfile {
    unsigned tasks = 0;
    unsigned xor_decisions = 0;  // non-loop xor splits
    unsigned ternary = 0;
    unsigned loops = 0;
    unsigned shortest = 0;  // tasks on shortest path, loop-free
    unsigned longest = 0;   // tasks on longest loop-free path
};

ModelProfile profile_model(const ProcessGraph& g);

}  // namespace normcheck
