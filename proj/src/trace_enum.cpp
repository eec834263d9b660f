#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>

#include "normcheck/process_model.hpp"

namespace normcheck {

namespace {

// ── Saturating counting ─────────────────────────────────────────────────────

constexpr std::uint64_t kSat = UINT64_MAX;

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
    return (a > kSat - b) ? kSat : a + b;
}

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
    if (a == 0 || b == 0) return 0;
    unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
    return p > kSat ? kSat : static_cast<std::uint64_t>(p);
}

std::uint64_t sat_binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 acc = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        acc = acc * (n - k + i) / i;
        if (acc > kSat) return kSat;
    }
    return static_cast<std::uint64_t>(acc);
}

// Trace counts grouped by trace length; lengths are needed because the
// number of AND interleavings depends on branch lengths.
using LengthDist = std::map<std::size_t, std::uint64_t>;

LengthDist convolve(const LengthDist& a, const LengthDist& b) {
    LengthDist out;
    for (const auto& [la, ca] : a)
        for (const auto& [lb, cb] : b) {
            auto& slot = out[la + lb];
            slot = sat_add(slot, sat_mul(ca, cb));
        }
    return out;
}

LengthDist shuffle_counts(const LengthDist& a, const LengthDist& b) {
    LengthDist out;
    for (const auto& [la, ca] : a)
        for (const auto& [lb, cb] : b) {
            auto& slot = out[la + lb];
            slot = sat_add(slot, sat_mul(sat_mul(ca, cb), sat_binomial(la + lb, la)));
        }
    return out;
}

// ── Block tree ──────────────────────────────────────────────────────────────

struct Block {
    enum class Kind { TaskRef, Sequence, Xor, And, Loop };
    Kind kind;
    std::size_t task = 0;         // TaskRef
    std::vector<Block> children;  // Sequence items, Xor/And branches, Loop body items
};

struct StructureError {
    Violation violation;
};

class GraphAnalyzer {
public:
    explicit GraphAnalyzer(const ProcessGraph& g) : g_(g) {}

    ValidationReport analyze() {
        if (!basic_checks()) return report_;
        if (!loop_checks()) return report_;
        try {
            root_ = Block{Block::Kind::Sequence};
            root_->children = parse_from_start();
        } catch (const StructureError& e) {
            report_.violations.push_back(e.violation);
            root_.reset();
        }
        return report_;
    }

    const std::optional<Block>& root() const { return root_; }

private:
    void add(std::string code, std::string locus, std::string message) {
        report_.violations.push_back(
            Violation{std::move(code), std::move(locus), std::move(message)});
    }

    [[noreturn]] void fail(std::string code, std::string locus, std::string message) const {
        throw StructureError{
            Violation{std::move(code), std::move(locus), std::move(message)}};
    }

    bool basic_checks() {
        const std::size_t n = g_.nodes.size();
        std::vector<std::size_t> starts, ends;
        bool any_task = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (g_.nodes[i].kind == NodeKind::Start) starts.push_back(i);
            if (g_.nodes[i].kind == NodeKind::End) ends.push_back(i);
            if (g_.nodes[i].is_task()) any_task = true;
        }
        if (starts.size() != 1)
            add("start-end", "$", "model must have exactly one start node");
        if (ends.size() != 1) add("start-end", "$", "model must have exactly one end node");
        if (!any_task) add("no-tasks", "$", "model has no tasks");
        if (!report_.ok()) return false;
        start_ = starts[0];
        end_ = ends[0];

        for (std::size_t i = 0; i < n; ++i) {
            if (i != start_ && g_.pred[i].empty())
                add("start-end", g_.nodes[i].id, "node has no incoming edge but is not start");
            if (i != end_ && g_.succ[i].empty())
                add("start-end", g_.nodes[i].id, "node has no outgoing edge but is not end");
        }

        // Reachability in both directions.
        auto reach = [&](std::size_t from, const std::vector<std::vector<std::size_t>>& adj) {
            std::vector<bool> seen(n, false);
            std::vector<std::size_t> stack{from};
            seen[from] = true;
            while (!stack.empty()) {
                std::size_t cur = stack.back();
                stack.pop_back();
                for (std::size_t next : adj[cur])
                    if (!seen[next]) {
                        seen[next] = true;
                        stack.push_back(next);
                    }
            }
            return seen;
        };
        auto fwd = reach(start_, g_.succ);
        auto bwd = reach(end_, g_.pred);
        for (std::size_t i = 0; i < n; ++i)
            if (!fwd[i] || !bwd[i])
                add("reachability", g_.nodes[i].id, "node is not on any start-to-end path");
        return report_.ok();
    }

    // Detects back-edges (edge u→v where v dominates u), validates the loop
    // shape, and checks the remaining graph is acyclic. Fills the DAG
    // adjacency used by the block parser.
    bool loop_checks() {
        const std::size_t n = g_.nodes.size();
        std::vector<std::vector<bool>> dom(n, std::vector<bool>(n, true));
        dom[start_].assign(n, false);
        dom[start_][start_] = true;
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t v = 0; v < n; ++v) {
                if (v == start_) continue;
                std::vector<bool> meet(n, true);
                for (std::size_t p : g_.pred[v])
                    for (std::size_t i = 0; i < n; ++i) meet[i] = meet[i] && dom[p][i];
                meet[v] = true;
                if (meet != dom[v]) {
                    dom[v] = std::move(meet);
                    changed = true;
                }
            }
        }

        std::set<std::pair<std::size_t, std::size_t>> back;
        for (std::size_t u = 0; u < n; ++u)
            for (std::size_t v : g_.succ[u])
                if (dom[u][v]) back.insert({u, v});

        for (const auto& [u, v] : back) {
            const Node& exit = g_.nodes[u];
            const Node& header = g_.nodes[v];
            const std::string locus = exit.id + "->" + header.id;
            if (exit.kind != NodeKind::XorSplit || header.kind != NodeKind::XorJoin) {
                add("loop-structure", locus,
                    "back-edge must run from an xor_split to an xor_join");
                continue;
            }
            if (g_.succ[u].size() != 2)
                add("loop-structure", exit.id,
                    "loop exit split must have exactly one forward and one back edge");
            if (g_.pred[v].size() != 2)
                add("loop-structure", header.id,
                    "loop header join must have exactly one entry and one back edge");
            if (exit_of_header_.count(v) || header_of_exit_.count(u))
                add("loop-structure", locus, "node participates in two loops");
            exit_of_header_[v] = u;
            header_of_exit_[u] = v;
        }
        if (!report_.ok()) return false;

        dag_succ_.assign(n, {});
        dag_pred_.assign(n, {});
        for (std::size_t u = 0; u < n; ++u)
            for (std::size_t v : g_.succ[u]) {
                if (back.count({u, v})) continue;
                dag_succ_[u].push_back(v);
                dag_pred_[v].push_back(u);
            }

        // Kahn's algorithm: anything cyclic beyond the recognized back-edges
        // is not block-structured.
        std::vector<std::size_t> indeg(n);
        std::vector<std::size_t> queue;
        for (std::size_t i = 0; i < n; ++i) {
            indeg[i] = dag_pred_[i].size();
            if (indeg[i] == 0) queue.push_back(i);
        }
        std::size_t emitted = 0;
        while (!queue.empty()) {
            std::size_t cur = queue.back();
            queue.pop_back();
            ++emitted;
            for (std::size_t next : dag_succ_[cur])
                if (--indeg[next] == 0) queue.push_back(next);
        }
        if (emitted != n) {
            add("loop-structure", "$", "graph has a cycle not shaped as a structured loop");
            return false;
        }

        if (!degree_checks()) return false;
        return true;
    }

    bool degree_checks() {
        for (std::size_t i = 0; i < g_.nodes.size(); ++i) {
            const Node& node = g_.nodes[i];
            const std::size_t in = g_.pred[i].size(), out = g_.succ[i].size();
            auto want = [&](bool cond, const std::string& msg) {
                if (!cond) add("degree", node.id, msg);
            };
            switch (node.kind) {
                case NodeKind::Start: want(out == 1, "start must have exactly one outgoing edge"); break;
                case NodeKind::End: want(in == 1, "end must have exactly one incoming edge"); break;
                case NodeKind::Task:
                    want(in == 1 && out == 1, "task must have exactly one incoming and one outgoing edge");
                    break;
                case NodeKind::AndSplit:
                    want(in == 1, "split must have exactly one incoming edge");
                    want(out >= 2, "split must have at least two outgoing edges");
                    break;
                case NodeKind::XorSplit:
                    want(in == 1, "split must have exactly one incoming edge");
                    want(out >= 2, "split must have at least two outgoing edges");
                    break;
                case NodeKind::AndJoin:
                    want(out == 1, "join must have exactly one outgoing edge");
                    want(in >= 2, "join must have at least two incoming edges");
                    break;
                case NodeKind::XorJoin:
                    want(out == 1, "join must have exactly one outgoing edge");
                    want(in >= 2, "join must have at least two incoming edges");
                    break;
            }
        }
        return report_.ok();
    }

    struct SeqResult {
        std::vector<Block> blocks;
        std::optional<std::size_t> stop;  // join / loop-exit split reached, if any
        bool at_end = false;
    };

    std::vector<Block> parse_from_start() {
        visited_.assign(g_.nodes.size(), false);
        visited_[start_] = true;
        SeqResult top = parse_seq(dag_succ_[start_][0]);
        if (!top.at_end) {
            const std::string id = top.stop ? g_.nodes[*top.stop].id : "?";
            fail("block-structure", id, "join has no matching split");
        }
        for (std::size_t i = 0; i < g_.nodes.size(); ++i)
            if (!visited_[i])
                fail("block-structure", g_.nodes[i].id, "node is not part of any block");
        return std::move(top.blocks);
    }

    SeqResult parse_seq(std::size_t cur) {
        SeqResult result;
        while (true) {
            const Node& node = g_.nodes[cur];
            switch (node.kind) {
                case NodeKind::Start:
                    fail("block-structure", node.id, "start node inside a block");
                case NodeKind::End:
                    visited_[cur] = true;
                    result.at_end = true;
                    return result;
                case NodeKind::Task: {
                    mark(cur);
                    Block b{Block::Kind::TaskRef};
                    b.task = cur;
                    result.blocks.push_back(std::move(b));
                    cur = dag_succ_[cur][0];
                    break;
                }
                case NodeKind::XorJoin: {
                    auto loop = exit_of_header_.find(cur);
                    if (loop == exit_of_header_.end()) {
                        result.stop = cur;
                        return result;
                    }
                    mark(cur);
                    cur = parse_loop(cur, loop->second, result.blocks);
                    break;
                }
                case NodeKind::AndJoin:
                    result.stop = cur;
                    return result;
                case NodeKind::AndSplit:
                case NodeKind::XorSplit: {
                    if (header_of_exit_.count(cur)) {
                        // Loop exit: only the loop that owns it may consume it.
                        result.stop = cur;
                        return result;
                    }
                    mark(cur);
                    cur = parse_split(cur, result.blocks);
                    break;
                }
            }
        }
    }

    // Returns the node to continue from after the loop's exit split.
    std::size_t parse_loop(std::size_t header, std::size_t exit, std::vector<Block>& out) {
        SeqResult body = parse_seq(dag_succ_[header][0]);
        if (body.at_end || !body.stop || *body.stop != exit)
            fail("loop-structure", g_.nodes[header].id,
                 "loop body does not converge on the loop's exit split");
        if (body.blocks.empty())
            fail("loop-structure", g_.nodes[header].id, "loop body is empty");
        mark(exit);
        Block loop{Block::Kind::Loop};
        loop.children = std::move(body.blocks);
        out.push_back(std::move(loop));
        return dag_succ_[exit][0];
    }

    // Returns the node to continue from after the matching join.
    std::size_t parse_split(std::size_t split, std::vector<Block>& out) {
        const bool is_and = g_.nodes[split].kind == NodeKind::AndSplit;
        const NodeKind want_join = is_and ? NodeKind::AndJoin : NodeKind::XorJoin;
        Block block{is_and ? Block::Kind::And : Block::Kind::Xor};
        std::optional<std::size_t> join;
        for (std::size_t branch_entry : dag_succ_[split]) {
            SeqResult branch = parse_seq(branch_entry);
            if (branch.at_end || !branch.stop)
                fail("block-structure", g_.nodes[split].id,
                     "branch of split escapes to the end of the process");
            if (join && *branch.stop != *join)
                fail("block-structure", g_.nodes[split].id,
                     "branches of split converge on different joins");
            join = *branch.stop;
            Block seq{Block::Kind::Sequence};
            seq.children = std::move(branch.blocks);
            block.children.push_back(std::move(seq));
        }
        if (g_.nodes[*join].kind != want_join)
            fail("block-structure", g_.nodes[split].id,
                 std::string("split is closed by a ") + node_kind_name(g_.nodes[*join].kind));
        if (dag_pred_[*join].size() != block.children.size())
            fail("block-structure", g_.nodes[*join].id,
                 "join receives edges from outside its split's branches");
        mark(*join);
        out.push_back(std::move(block));
        return dag_succ_[*join][0];
    }

    void mark(std::size_t idx) {
        if (visited_[idx])
            fail("block-structure", g_.nodes[idx].id, "node is shared between blocks");
        visited_[idx] = true;
    }

    const ProcessGraph& g_;
    ValidationReport report_;
    std::optional<Block> root_;
    std::size_t start_ = 0, end_ = 0;
    std::map<std::size_t, std::size_t> exit_of_header_;  // header join -> exit split
    std::map<std::size_t, std::size_t> header_of_exit_;
    std::vector<std::vector<std::size_t>> dag_succ_, dag_pred_;
    std::vector<bool> visited_;
};

// ── Enumeration over the block tree ─────────────────────────────────────────

using TaskSeq = std::vector<std::size_t>;
using TraceSet = std::set<TaskSeq>;

TraceSet enum_sequence(const std::vector<Block>& blocks, unsigned loop_bound);

void merge_interleavings(const TaskSeq& a, std::size_t ia, const TaskSeq& b, std::size_t ib,
                         TaskSeq& prefix, TraceSet& out) {
    if (ia == a.size() && ib == b.size()) {
        out.insert(prefix);
        return;
    }
    if (ia < a.size()) {
        prefix.push_back(a[ia]);
        merge_interleavings(a, ia + 1, b, ib, prefix, out);
        prefix.pop_back();
    }
    if (ib < b.size()) {
        prefix.push_back(b[ib]);
        merge_interleavings(a, ia, b, ib + 1, prefix, out);
        prefix.pop_back();
    }
}

TraceSet shuffle(const TraceSet& a, const TraceSet& b) {
    TraceSet out;
    TaskSeq prefix;
    for (const auto& ta : a)
        for (const auto& tb : b) merge_interleavings(ta, 0, tb, 0, prefix, out);
    return out;
}

TraceSet concat(const TraceSet& a, const TraceSet& b) {
    TraceSet out;
    for (const auto& ta : a)
        for (const auto& tb : b) {
            TaskSeq joined = ta;
            joined.insert(joined.end(), tb.begin(), tb.end());
            out.insert(std::move(joined));
        }
    return out;
}

TraceSet enum_block(const Block& block, unsigned loop_bound) {
    switch (block.kind) {
        case Block::Kind::TaskRef: return TraceSet{TaskSeq{block.task}};
        case Block::Kind::Sequence: return enum_sequence(block.children, loop_bound);
        case Block::Kind::Xor: {
            TraceSet out;
            for (const Block& child : block.children) {
                TraceSet branch = enum_block(child, loop_bound);
                out.insert(branch.begin(), branch.end());
            }
            return out;
        }
        case Block::Kind::And: {
            TraceSet out{TaskSeq{}};
            for (const Block& child : block.children)
                out = shuffle(out, enum_block(child, loop_bound));
            return out;
        }
        case Block::Kind::Loop: {
            TraceSet body = enum_sequence(block.children, loop_bound);
            TraceSet out = body;
            TraceSet acc = body;
            for (unsigned pass = 0; pass < loop_bound; ++pass) {
                acc = concat(acc, body);
                out.insert(acc.begin(), acc.end());
            }
            return out;
        }
    }
    return {};
}

TraceSet enum_sequence(const std::vector<Block>& blocks, unsigned loop_bound) {
    TraceSet out{TaskSeq{}};
    for (const Block& block : blocks) out = concat(out, enum_block(block, loop_bound));
    return out;
}

LengthDist count_sequence(const std::vector<Block>& blocks, unsigned loop_bound);

LengthDist count_block(const Block& block, unsigned loop_bound) {
    switch (block.kind) {
        case Block::Kind::TaskRef: return LengthDist{{1, 1}};
        case Block::Kind::Sequence: return count_sequence(block.children, loop_bound);
        case Block::Kind::Xor: {
            LengthDist out;
            for (const Block& child : block.children)
                for (const auto& [len, c] : count_block(child, loop_bound)) {
                    auto& slot = out[len];
                    slot = sat_add(slot, c);
                }
            return out;
        }
        case Block::Kind::And: {
            LengthDist out{{0, 1}};
            for (const Block& child : block.children)
                out = shuffle_counts(out, count_block(child, loop_bound));
            return out;
        }
        case Block::Kind::Loop: {
            LengthDist body = count_sequence(block.children, loop_bound);
            LengthDist out = body;
            LengthDist acc = body;
            for (unsigned pass = 0; pass < loop_bound; ++pass) {
                acc = convolve(acc, body);
                for (const auto& [len, c] : acc) {
                    auto& slot = out[len];
                    slot = sat_add(slot, c);
                }
            }
            return out;
        }
    }
    return {};
}

LengthDist count_sequence(const std::vector<Block>& blocks, unsigned loop_bound) {
    LengthDist out{{0, 1}};
    for (const Block& block : blocks) out = convolve(out, count_block(block, loop_bound));
    return out;
}

Block analyzed_root(const ProcessGraph& g) {
    GraphAnalyzer analyzer(g);
    ValidationReport report = analyzer.analyze();
    if (!report.ok()) throw ModelError(std::move(report));
    return *analyzer.root();
}

}  // namespace

ValidationReport validate_graph(const ProcessGraph& g) {
    GraphAnalyzer analyzer(g);
    return analyzer.analyze();
}

std::uint64_t count_traces(const ProcessGraph& g, unsigned loop_bound) {
    Block root = analyzed_root(g);
    std::uint64_t total = 0;
    for (const auto& [len, c] : count_sequence(root.children, loop_bound))
        total = sat_add(total, c);
    return total;
}

std::vector<Trace> enumerate_traces(const ProcessGraph& g, unsigned loop_bound,
                                    std::uint64_t cap) {
    Block root = analyzed_root(g);
    std::uint64_t total = 0;
    for (const auto& [len, c] : count_sequence(root.children, loop_bound))
        total = sat_add(total, c);
    if (total > cap) throw TraceOverflowError(total, cap);

    TraceSet sequences = enum_sequence(root.children, loop_bound);
    std::vector<Trace> out;
    out.reserve(sequences.size());
    for (const TaskSeq& seq : sequences) {
        Trace t;
        t.steps.reserve(seq.size());
        for (std::size_t idx : seq) t.steps.push_back(g.nodes[idx].id);
        out.push_back(std::move(t));
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace normcheck
