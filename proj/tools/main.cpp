#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "normcheck/bench.hpp"
#include "normcheck/compliance.hpp"
#include "normcheck/fcl.hpp"
#include "normcheck/lifecycle.hpp"
#include "normcheck/process_model.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNonCompliant = 1;
constexpr int kExitError = 2;
constexpr int kExitOverflow = 3;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

std::string file_stem(const std::string& path) {
    const std::size_t slash = path.find_last_of("/\\");
    std::string name = (slash == std::string::npos) ? path : path.substr(slash + 1);
    const std::size_t dot = name.find_last_of('.');
    return (dot == std::string::npos) ? name : name.substr(0, dot);
}

struct CommonOptions {
    unsigned loop_bound = 2;
    bool strict_compensation = false;
    std::uint64_t trace_cap = normcheck::kDefaultTraceCap;
    std::string format = "text";
    unsigned jobs = 1;
};

normcheck::LifecycleConfig lifecycle_config(const CommonOptions& opts) {
    normcheck::LifecycleConfig cfg;
    cfg.loop_bound = opts.loop_bound;
    cfg.strict_compensation = opts.strict_compensation;
    cfg.trace_cap = opts.trace_cap;
    return cfg;
}

int cmd_validate(const std::string& model_path) {
    normcheck::ProcessGraph g =
        normcheck::parse_model_lenient(read_file(model_path));
    normcheck::ValidationReport report = normcheck::validate_graph(g);
    if (report.ok()) {
        std::cout << "ok: " << g.nodes.size() << " nodes, " << g.edges.size() << " edges\n";
        return kExitOk;
    }
    for (const auto& v : report.violations)
        std::cout << "[" << v.code << "] " << v.locus << ": " << v.message << "\n";
    return kExitError;
}

int cmd_traces(const std::string& model_path, const CommonOptions& opts) {
    normcheck::ProcessGraph g = normcheck::parse_model(read_file(model_path));
    for (const auto& trace :
         normcheck::enumerate_traces(g, opts.loop_bound, opts.trace_cap))
        std::cout << trace.str() << "\n";
    return kExitOk;
}

int cmd_check(const std::string& model_path, const std::string& rules_path,
              const CommonOptions& opts, const std::string& accept,
              const std::string& report_path) {
    normcheck::ProcessGraph g = normcheck::parse_model(read_file(model_path));
    normcheck::RuleSet rs = normcheck::parse_rules(read_file(rules_path));
    normcheck::CheckConfig cfg;
    cfg.lifecycle = lifecycle_config(opts);
    cfg.jobs = opts.jobs;
    cfg.ruleset_name = file_stem(rules_path);
    normcheck::ComplianceReport report = normcheck::check_process(g, rs, cfg);

    const std::string rendered = opts.format == "json" ? normcheck::report_to_json(report)
                                                       : normcheck::report_to_text(report);
    if (!report_path.empty()) {
        write_file(report_path, rendered);
        std::cout << (report.fully_strong
                          ? "fully strongly compliant"
                          : (report.fully_weak ? "fully weakly compliant" : "non-compliant"))
                  << "; report written to " << report_path << "\n";
    } else {
        std::cout << rendered;
    }
    const bool pass = (accept == "weak") ? report.fully_weak : report.fully_strong;
    return pass ? kExitOk : kExitNonCompliant;
}

int cmd_stats(const std::string& rules_path, const CommonOptions& opts) {
    normcheck::RuleSet rs = normcheck::parse_rules(read_file(rules_path));
    normcheck::RuleSetStats stats = normcheck::ruleset_stats(rs);
    std::cout << (opts.format == "json" ? normcheck::stats_to_json(stats) + "\n"
                                        : normcheck::stats_to_text(stats));
    return kExitOk;
}

int cmd_replay(const std::string& log_path, const std::string& rules_path,
               const CommonOptions& opts) {
    normcheck::RuleSet rs = normcheck::parse_rules(read_file(rules_path));
    normcheck::ResolvedTrace events = normcheck::parse_log(read_file(log_path));
    normcheck::LifecycleConfig cfg = lifecycle_config(opts);
    normcheck::TraceResult result = normcheck::replay_log(events, rs, cfg);
    std::cout << (opts.format == "json" ? normcheck::trace_result_to_json(result, cfg)
                                        : normcheck::trace_result_to_text(result, cfg));
    return kExitOk;
}

struct BenchOptions {
    normcheck::BenchShape shape;
    normcheck::BenchRuleShape rules;
    std::string out_model = "bench_model.json";
    std::string out_rules = "bench_rules.fcl";
};

int cmd_bench(const BenchOptions& opts, const CommonOptions& common) {
    normcheck::ProcessGraph model = normcheck::generate_model(opts.shape);
    normcheck::RuleSet rules = normcheck::generate_rules(opts.rules, model);
    write_file(opts.out_model, normcheck::serialize_model(model));
    write_file(opts.out_rules, normcheck::serialize_rules(rules));

    const normcheck::ModelProfile profile = normcheck::profile_model(model);
    std::cout << "model:   " << opts.out_model << " (" << profile.tasks << " tasks, "
              << profile.xor_decisions << " decisions (" << profile.ternary << " ternary), "
              << profile.loops << " loops, shortest path " << profile.shortest
              << ", longest loop-free path " << profile.longest << ")\n";
    const normcheck::RuleSetStats stats = normcheck::ruleset_stats(rules);
    std::cout << "rules:   " << opts.out_rules << " (" << stats.rule_count << " rules, "
              << stats.atom_count << " propositions, " << stats.superiority_count
              << " superiority pairs)\n";

    normcheck::CheckConfig cfg;
    cfg.lifecycle = lifecycle_config(common);
    cfg.jobs = common.jobs;
    cfg.ruleset_name = file_stem(opts.out_rules);
    const auto t0 = std::chrono::steady_clock::now();
    normcheck::ComplianceReport report = normcheck::check_process(model, rules, cfg);
    const auto t1 = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    std::cout << "traces:  " << report.trace_count << "\n";
    std::cout << "check:   " << ms << " ms (loop_bound " << common.loop_bound << ", jobs "
              << common.jobs << ")\n";
    std::cout << "verdict: fully_strong=" << (report.fully_strong ? "yes" : "no")
              << " fully_weak=" << (report.fully_weak ? "yes" : "no")
              << " partially_strong=" << (report.partially_strong ? "yes" : "no")
              << " partially_weak=" << (report.partially_weak ? "yes" : "no") << "\n";
    return kExitOk;
}

void add_common(CLI::App* cmd, CommonOptions& opts, bool with_jobs = false) {
    cmd->add_option("--loop-bound", opts.loop_bound, "maximum extra traversals per loop");
    cmd->add_option("--trace-cap", opts.trace_cap, "abort above this many traces");
    cmd->add_flag("--strict-compensation", opts.strict_compensation,
                  "a compensated compensation does not amend its target");
    cmd->add_option("--format", opts.format, "output format")
        ->check(CLI::IsMember({"text", "json"}));
    if (with_jobs) cmd->add_option("--jobs", opts.jobs, "parallel trace evaluations");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"compliance checking of annotated process models against FCL-style rules"};
    app.require_subcommand(1);

    std::function<int()> action;

    std::string model_path, rules_path, log_path, report_path;
    std::string accept = "strong";
    CommonOptions common;

    auto* validate = app.add_subcommand("validate", "check model structural invariants");
    validate->add_option("model", model_path, "model JSON file")->required();
    validate->callback([&] { action = [&] { return cmd_validate(model_path); }; });

    auto* traces = app.add_subcommand("traces", "enumerate execution traces");
    traces->add_option("model", model_path, "model JSON file")->required();
    add_common(traces, common);
    traces->callback([&] { action = [&] { return cmd_traces(model_path, common); }; });

    auto* check = app.add_subcommand("check", "check a model against a ruleset");
    check->add_option("model", model_path, "model JSON file")->required();
    check->add_option("rules", rules_path, "rule file")->required();
    check->add_option("--accept", accept, "compliance gate for exit code 0")
        ->check(CLI::IsMember({"strong", "weak"}));
    check->add_option("--report", report_path, "write the report to a file");
    add_common(check, common, /*with_jobs=*/true);
    check->callback([&] {
        action = [&] { return cmd_check(model_path, rules_path, common, accept, report_path); };
    });

    auto* stats = app.add_subcommand("stats", "ruleset summary (per-modality counts)");
    stats->add_option("rules", rules_path, "rule file")->required();
    add_common(stats, common);
    stats->callback([&] { action = [&] { return cmd_stats(rules_path, common); }; });

    auto* replay = app.add_subcommand("replay", "replay an event log against a ruleset");
    replay->add_option("log", log_path, "event log file")->required();
    replay->add_option("rules", rules_path, "rule file")->required();
    add_common(replay, common);
    replay->callback(
        [&] { action = [&] { return cmd_replay(log_path, rules_path, common); }; });

    BenchOptions bench_opts;
    auto* bench = app.add_subcommand("bench", "generate a synthetic model+ruleset and time a check");
    auto* opt_tasks = bench->add_option("--tasks", bench_opts.shape.tasks, "task count");
    auto* opt_xor = bench->add_option("--xor", bench_opts.shape.xor_decisions,
                                      "non-loop XOR decisions");
    auto* opt_ternary =
        bench->add_option("--ternary", bench_opts.shape.ternary, "ternary decisions");
    auto* opt_loops = bench->add_option("--loops", bench_opts.shape.loops, "structured loops");
    auto* opt_shortest =
        bench->add_option("--shortest", bench_opts.shape.shortest, "tasks on shortest path");
    auto* opt_longest = bench->add_option("--longest", bench_opts.shape.longest,
                                          "tasks on longest loop-free path");
    bench->add_option("--seed", bench_opts.shape.seed, "generator seed");
    bench->add_option("--rules", bench_opts.rules.rules, "rule count");
    bench->add_option("--props", bench_opts.rules.propositions, "distinct propositions");
    bench->add_option("--sup", bench_opts.rules.superiority, "superiority pairs");
    bench->add_option("--defs", bench_opts.rules.definitional, "definitional rules");
    bench->add_option("--out-model", bench_opts.out_model, "model output path");
    bench->add_option("--out-rules", bench_opts.out_rules, "rules output path");
    add_common(bench, common, /*with_jobs=*/true);
    bench->callback([&] {
        action = [&, opt_tasks, opt_xor, opt_ternary, opt_loops, opt_shortest, opt_longest] {
            // `--tasks N` alone means a plain chain of N tasks.
            if (opt_tasks->count() > 0 && opt_xor->count() == 0 && opt_ternary->count() == 0 &&
                opt_loops->count() == 0 && opt_shortest->count() == 0 &&
                opt_longest->count() == 0) {
                bench_opts.shape.xor_decisions = 0;
                bench_opts.shape.ternary = 0;
                bench_opts.shape.loops = 0;
                bench_opts.shape.shortest = bench_opts.shape.tasks;
                bench_opts.shape.longest = bench_opts.shape.tasks;
            }
            bench_opts.rules.seed = bench_opts.shape.seed;
            return cmd_bench(bench_opts, common);
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitError;
    }

    try {
        return action();
    } catch (const normcheck::TraceOverflowError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitOverflow;
    } catch (const normcheck::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    } catch (const normcheck::ModelError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
}
