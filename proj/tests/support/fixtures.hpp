#pragma once

#include <string>
#include <vector>

#include "normcheck/lifecycle.hpp"

namespace normcheck::testing {

// Hand-derived obligation-lifecycle scenarios. Each expectation was worked
// out on paper by applying the per-type fulfilment/violation semantics to
// the trace's state sequence. Groups: punctual, achievement, maintenance,
// compensation, compensability, compensated, perdurant.
struct ExpectedInstance {
    std::string rule;
    std::size_t chain_index;
    ObligationStatus status;
    std::vector<std::size_t> violations;
};

struct LifecycleFixture {
    std::string name;
    std::string group;
    std::string rules;
    // (task id, comma-separated annotation literals) — a linear trace
    std::vector<std::pair<std::string, std::string>> tasks;
    std::vector<ExpectedInstance> expect;
    bool strongly_compliant;
    bool weakly_compliant;
    bool strict_compensation = false;
};

const std::vector<LifecycleFixture>& definition_fixtures();

ResolvedTrace fixture_trace(const LifecycleFixture& fixture);

struct FixtureOutcome {
    std::string name;
    std::string group;
    bool pass;
    std::string detail;  // empty when pass
};

FixtureOutcome run_fixture(const LifecycleFixture& fixture);

}  // namespace normcheck::testing
