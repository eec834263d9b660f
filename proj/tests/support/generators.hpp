#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "normcheck/fcl.hpp"
#include "normcheck/process_model.hpp"

namespace normcheck::testing {

// Deterministic across platforms (std distributions are not).
struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed ^ 0xD1B54A32D192ED03ull) {}
    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }
    bool chance(unsigned percent) { return below(100) < percent; }
};

struct ModelGenOptions {
    unsigned max_tasks = 8;
    unsigned max_xor = 3;
    unsigned max_and = 1;
    unsigned max_loops = 1;
    std::vector<std::string> atoms = {"a", "b", "c", "d", "e", "f"};
    bool annotate = true;
};

// Random block-structured model. Branches are never empty and every loop
// body starts with a task, so the library's trace count is exact (no
// duplicate traces across derivations).
ProcessGraph random_model(Rng& rng, const ModelGenOptions& opts = {});

struct RuleGenOptions {
    unsigned max_rules = 10;
    unsigned max_chain_links = 2;
    std::vector<std::string> atoms = {"a", "b", "c", "d", "e", "f"};
    bool allow_deontic_bodies = true;
    bool allow_terminates = true;
    unsigned max_superiority = 2;
};

RuleSet random_ruleset(Rng& rng, const RuleGenOptions& opts = {});

// Brute-force token-game simulation of the control flow; the independent
// route for trace enumeration. Back-edges may be taken at most loop_bound
// times each.
std::set<std::vector<std::string>> token_game_traces(const ProcessGraph& g,
                                                     unsigned loop_bound);

}  // namespace normcheck::testing
