#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "normcheck/lifecycle.hpp"

namespace normcheck {

struct Diagnosis {
    Trace trace;
    std::size_t position = 0;  // earliest failure position of the instance
    std::string task;          // task id at that position
    std::string rule;
    Literal obligation;        // obligation content
    std::string kind;          // punctual-violation | achievement-violation |
                               // maintenance-violation | perdurant-violation |
                               // uncompensated
};

struct TraceDigest {
    Trace trace;
    bool strongly_compliant = true;
    bool weakly_compliant = true;
    std::size_t instances = 0;
    std::size_t violations = 0;
};

// The 2x2 verdict matrix: {every trace, some trace} x {strong, weak}.
struct ComplianceReport {
    std::string model;
    std::string ruleset;
    std::size_t trace_count = 0;
    std::vector<TraceDigest> digests;
    bool fully_strong = true;
    bool fully_weak = true;
    bool partially_strong = true;
    bool partially_weak = true;
    std::vector<Diagnosis> diagnoses;
};

struct CheckConfig {
    LifecycleConfig lifecycle;
    unsigned jobs = 1;
    std::string ruleset_name;
};

// Evaluates every trace of the model. Throws TraceOverflowError (via
// enumerate_traces) and ModelError on an invalid graph. Deterministic,
// independent of cfg.jobs.
ComplianceReport check_process(const ProcessGraph& g, const RuleSet& rs,
                               const CheckConfig& cfg);

// Diagnoses for a single evaluated trace (used by check_process and replay).
std::vector<Diagnosis> diagnose(const TraceResult& result, const LifecycleConfig& cfg);

// Event log: one event per line, `event_id ; lit1, lit2, ...`, '#' comments.
// Rejections carry line/column.
ResolvedTrace parse_log(std::string_view text);

// Each event is treated as a task of an induced linear trace and evaluated
// with the same engine as in-model traces.
TraceResult replay_log(const ResolvedTrace& events, const RuleSet& rs,
                       const LifecycleConfig& cfg);

std::string report_to_json(const ComplianceReport& report);
std::string report_to_text(const ComplianceReport& report);
std::string trace_result_to_json(const TraceResult& result, const LifecycleConfig& cfg);
std::string trace_result_to_text(const TraceResult& result, const LifecycleConfig& cfg);

}  // namespace normcheck
