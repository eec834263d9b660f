#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "normcheck/fcl.hpp"  // ParseError
#include "normcheck/literal.hpp"
#include "normcheck/state.hpp"

namespace normcheck {

enum class NodeKind { Task, AndSplit, AndJoin, XorSplit, XorJoin, Start, End };

const char* node_kind_name(NodeKind k);

struct Node {
    std::string id;
    NodeKind kind;
    std::string name;        // display name, tasks only
    LiteralSet annotations;  // consistent; tasks only

    bool is_task() const { return kind == NodeKind::Task; }
    bool is_split() const { return kind == NodeKind::AndSplit || kind == NodeKind::XorSplit; }
    bool is_join() const { return kind == NodeKind::AndJoin || kind == NodeKind::XorJoin; }
};

// Annotated control-flow graph. Nodes and edges keep file order; the
// adjacency indexes are derived and rebuilt by build_indexes().
struct ProcessGraph {
    std::string name;
    std::vector<Node> nodes;
    std::vector<std::pair<std::string, std::string>> edges;

    std::map<std::string, std::size_t> index;      // id -> nodes position
    std::vector<std::vector<std::size_t>> succ;
    std::vector<std::vector<std::size_t>> pred;

    void build_indexes();  // throws ModelError on duplicate ids / dangling edges
    const Node* find(const std::string& id) const;
};

struct Trace {
    std::vector<std::string> steps;  // task ids, 1-indexed positions

    auto operator<=>(const Trace&) const = default;
    std::string str() const;  // comma-joined
};

struct Violation {
    std::string code;   // "semantic" | "start-end" | "degree" | "reachability"
                        // | "block-structure" | "loop-structure" | "no-tasks"
    std::string locus;  // node id, "edges[i]", "nodes[i]", ...
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    std::string str() const;
};

// Structured rejection: semantic or structural model defects. Every entry
// names its locus.
struct ModelError : std::runtime_error {
    explicit ModelError(ValidationReport report);
    ValidationReport report;
};

// JSON model format:
//   {"name": "...",
//    "nodes": [{"id": "...", "type": "task|and_split|and_join|xor_split|
//               xor_join|start|end", "name"?: "...", "annotations"?: ["p","~q"]}],
//    "edges": [{"from": "...", "to": "..."}]}
// Throws ParseError (position-annotated) on malformed text, ModelError on
// semantic defects or structural invariant violations.
ProcessGraph parse_model(std::string_view text);

// Parse without enforcing the structural invariants (still rejects syntax
// and semantic defects). validate_graph on the result gives the report.
ProcessGraph parse_model_lenient(std::string_view text);

std::string serialize_model(const ProcessGraph& g);

// Empty report iff the graph satisfies every structural invariant:
// exactly one start (in-degree 0) / end (out-degree 0), degree constraints
// per node kind, every node on a start→end path, matched and properly
// nested split/join pairs, loops shaped as an XOR-join header with a
// direct back-edge from its XOR-split exit, and at least one task.
ValidationReport validate_graph(const ProcessGraph& g);

struct TraceOverflowError : std::runtime_error {
    TraceOverflowError(std::uint64_t estimate, std::uint64_t cap);
    std::uint64_t estimate;  // saturating
    std::uint64_t cap;
};

inline constexpr std::uint64_t kDefaultTraceCap = 1'000'000;

// Number of realizable traces (saturating); loop_bound caps how many times
// each back-edge is taken beyond the mandatory first pass of the body.
std::uint64_t count_traces(const ProcessGraph& g, unsigned loop_bound);

// All realizable task sequences, deduplicated, in lexicographic order of
// their task-id sequences. Requires validate_graph(g).ok(). Throws
// TraceOverflowError when the count estimate exceeds `cap`.
std::vector<Trace> enumerate_traces(const ProcessGraph& g, unsigned loop_bound,
                                    std::uint64_t cap = kDefaultTraceCap);

// Resolve trace steps against the graph's tasks; throws ModelError on an
// unresolvable or non-task id.
ResolvedTrace resolve_trace(const Trace& t, const ProcessGraph& g);

StateSequence cumulate(const Trace& t, const ProcessGraph& g);

}  // namespace normcheck
