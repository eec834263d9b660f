#include <algorithm>
#include <atomic>
#include <sstream>
#include <thread>

#include "normcheck/compliance.hpp"

#include "json.hpp"

namespace normcheck {

namespace {

const char* violation_kind(Modality m) {
    switch (m) {
        case Modality::OPU: return "punctual-violation";
        case Modality::OM: return "maintenance-violation";
        default: return is_perdurant(m) ? "perdurant-violation" : "achievement-violation";
    }
}

}  // namespace

std::vector<Diagnosis> diagnose(const TraceResult& result, const LifecycleConfig& cfg) {
    std::vector<Diagnosis> out;
    const std::vector<bool> amended = amended_flags(result.instances, cfg.strict_compensation);
    for (std::size_t i = 0; i < result.instances.size(); ++i) {
        const ObligationInstance& inst = result.instances[i];
        if (!inst.violated()) continue;
        Diagnosis d;
        d.trace = result.trace;
        d.position = inst.first_violation();
        d.task = (d.position >= 1 && d.position <= result.trace.steps.size())
                     ? result.trace.steps[d.position - 1]
                     : "";
        d.rule = inst.source_rule;
        d.obligation = inst.content;
        d.kind = violation_kind(inst.modality);
        out.push_back(d);
        if (!amended[i]) {
            d.kind = "uncompensated";
            out.push_back(d);
        }
    }
    return out;
}

ComplianceReport check_process(const ProcessGraph& g, const RuleSet& rs,
                               const CheckConfig& cfg) {
    const std::vector<Trace> traces =
        enumerate_traces(g, cfg.lifecycle.loop_bound, cfg.lifecycle.trace_cap);

    std::vector<TraceResult> results(traces.size());
    const unsigned jobs = std::max(1u, cfg.jobs);
    if (jobs == 1 || traces.size() <= 1) {
        for (std::size_t i = 0; i < traces.size(); ++i)
            results[i] = evaluate_trace(rs, g, traces[i], cfg.lifecycle);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= traces.size()) break;
                results[i] = evaluate_trace(rs, g, traces[i], cfg.lifecycle);
            }
        };
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < std::min<std::size_t>(jobs, traces.size()); ++t)
            pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    ComplianceReport report;
    report.model = g.name;
    report.ruleset = cfg.ruleset_name;
    report.trace_count = traces.size();
    report.fully_strong = report.fully_weak = true;
    report.partially_strong = report.partially_weak = false;
    for (const TraceResult& result : results) {
        TraceDigest digest;
        digest.trace = result.trace;
        digest.strongly_compliant = result.strongly_compliant;
        digest.weakly_compliant = result.weakly_compliant;
        digest.instances = result.instances.size();
        for (const auto& inst : result.instances)
            if (inst.violated()) ++digest.violations;
        report.digests.push_back(std::move(digest));

        report.fully_strong = report.fully_strong && result.strongly_compliant;
        report.fully_weak = report.fully_weak && result.weakly_compliant;
        report.partially_strong = report.partially_strong || result.strongly_compliant;
        report.partially_weak = report.partially_weak || result.weakly_compliant;

        std::vector<Diagnosis> ds = diagnose(result, cfg.lifecycle);
        report.diagnoses.insert(report.diagnoses.end(), ds.begin(), ds.end());
    }
    std::sort(report.diagnoses.begin(), report.diagnoses.end(),
              [](const Diagnosis& a, const Diagnosis& b) {
                  return std::tie(a.trace, a.position, a.rule, a.obligation, a.kind) <
                         std::tie(b.trace, b.position, b.rule, b.obligation, b.kind);
              });
    return report;
}

ResolvedTrace parse_log(std::string_view text) {
    ResolvedTrace out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        ++line_no;
        pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;

        if (auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);

        auto trim = [](std::string_view s) {
            while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
                s.remove_prefix(1);
            while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
                s.remove_suffix(1);
            return s;
        };
        std::string_view rest = trim(line);
        if (rest.empty()) continue;

        ResolvedStep step;
        const std::size_t semi = rest.find(';');
        std::string_view id = trim(rest.substr(0, semi));
        if (!is_valid_atom(id))
            throw ParseError("malformed event id '" + std::string(id) + "'", line_no, 1);
        step.task_id = std::string(id);
        if (semi != std::string_view::npos) {
            std::string_view anns = rest.substr(semi + 1);
            std::size_t cursor = 0;
            while (cursor <= anns.size()) {
                std::size_t comma = anns.find(',', cursor);
                std::string_view item = trim(
                    anns.substr(cursor, comma == std::string_view::npos ? std::string_view::npos
                                                                        : comma - cursor));
                if (!item.empty()) {
                    try {
                        step.annotations.insert(parse_literal(item));
                    } catch (const std::invalid_argument& e) {
                        throw ParseError(e.what(), line_no, semi + 2 + cursor);
                    }
                } else if (comma != std::string_view::npos) {
                    throw ParseError("empty annotation", line_no, semi + 2 + cursor);
                }
                if (comma == std::string_view::npos) break;
                cursor = comma + 1;
            }
        }
        if (!is_consistent(step.annotations))
            throw ParseError("inconsistent annotations for event '" + step.task_id + "'",
                             line_no, 1);
        out.push_back(std::move(step));
    }
    return out;
}

TraceResult replay_log(const ResolvedTrace& events, const RuleSet& rs,
                       const LifecycleConfig& cfg) {
    return evaluate_resolved(rs, events, cfg);
}

namespace {

nlohmann::json diagnosis_json(const Diagnosis& d) {
    nlohmann::json j;
    j["trace"] = d.trace.steps;
    j["position"] = d.position;
    j["task"] = d.task;
    j["rule"] = d.rule;
    j["obligation"] = d.obligation.str();
    j["kind"] = d.kind;
    return j;
}

}  // namespace

std::string report_to_json(const ComplianceReport& report) {
    nlohmann::json j;
    j["model"] = report.model;
    j["ruleset"] = report.ruleset;
    j["traces"] = report.trace_count;
    j["verdicts"] = {{"fully_strong", report.fully_strong},
                     {"fully_weak", report.fully_weak},
                     {"partially_strong", report.partially_strong},
                     {"partially_weak", report.partially_weak}};
    nlohmann::json ds = nlohmann::json::array();
    for (const Diagnosis& d : report.diagnoses) ds.push_back(diagnosis_json(d));
    j["diagnoses"] = std::move(ds);
    return j.dump(2) + "\n";
}

std::string report_to_text(const ComplianceReport& report) {
    std::ostringstream out;
    out << "model:    " << report.model << "\n";
    out << "ruleset:  " << report.ruleset << "\n";
    out << "traces:   " << report.trace_count << "\n";
    out << "verdicts: fully_strong=" << (report.fully_strong ? "yes" : "no")
        << " fully_weak=" << (report.fully_weak ? "yes" : "no")
        << " partially_strong=" << (report.partially_strong ? "yes" : "no")
        << " partially_weak=" << (report.partially_weak ? "yes" : "no") << "\n";
    for (const TraceDigest& d : report.digests) {
        out << "  trace " << d.trace.str() << ": "
            << (d.strongly_compliant ? "strong" : (d.weakly_compliant ? "weak" : "non-compliant"))
            << " (" << d.instances << " obligations, " << d.violations << " violated)\n";
    }
    if (!report.diagnoses.empty()) {
        out << "diagnoses:\n";
        for (const Diagnosis& d : report.diagnoses)
            out << "  [" << d.kind << "] trace " << d.trace.str() << " position " << d.position
                << " (task " << d.task << "): rule " << d.rule << ", obligation "
                << d.obligation.str() << "\n";
    }
    return out.str();
}

std::string trace_result_to_json(const TraceResult& result, const LifecycleConfig& cfg) {
    nlohmann::json j;
    j["trace"] = result.trace.steps;
    j["strongly_compliant"] = result.strongly_compliant;
    j["weakly_compliant"] = result.weakly_compliant;
    nlohmann::json insts = nlohmann::json::array();
    for (const auto& inst : result.instances) {
        nlohmann::json ji;
        ji["obligation"] = inst.deontic_literal().str();
        ji["rule"] = inst.source_rule;
        ji["chain_index"] = inst.chain_index;
        ji["start"] = inst.start;
        if (inst.end) ji["end"] = *inst.end;
        ji["status"] = obligation_status_name(inst.status);
        ji["violations"] = inst.violation_positions;
        insts.push_back(std::move(ji));
    }
    j["obligations"] = std::move(insts);
    nlohmann::json ds = nlohmann::json::array();
    for (const Diagnosis& d : diagnose(result, cfg)) ds.push_back(diagnosis_json(d));
    j["diagnoses"] = std::move(ds);
    return j.dump(2) + "\n";
}

std::string trace_result_to_text(const TraceResult& result, const LifecycleConfig& cfg) {
    std::ostringstream out;
    out << "trace: " << result.trace.str() << "\n";
    out << "verdict: "
        << (result.strongly_compliant ? "strongly compliant"
                                      : (result.weakly_compliant ? "weakly compliant"
                                                                 : "non-compliant"))
        << "\n";
    for (const auto& inst : result.instances) {
        out << "  " << inst.deontic_literal().str() << " (rule " << inst.source_rule;
        if (inst.chain_index > 1) out << ", chain link " << inst.chain_index;
        out << ") [" << inst.start << ", " << (inst.end ? std::to_string(*inst.end) : "-")
            << "]: " << obligation_status_name(inst.status);
        if (inst.violated()) {
            out << " (violated at";
            for (std::size_t p : inst.violation_positions) out << ' ' << p;
            out << ')';
        }
        out << "\n";
    }
    for (const Diagnosis& d : diagnose(result, cfg))
        out << "  [" << d.kind << "] position " << d.position << " (task " << d.task
            << "): rule " << d.rule << ", obligation " << d.obligation.str() << "\n";
    return out.str();
}

}  // namespace normcheck
