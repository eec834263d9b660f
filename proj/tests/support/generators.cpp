#include <functional>
#include <map>

#include "support/generators.hpp"

namespace normcheck::testing {

namespace {

// ── Random block plans ──────────────────────────────────────────────────────

struct Plan {
    enum class Kind { Task, Seq, Xor, And, Loop } kind;
    std::vector<Plan> children;
};

struct PlanBudget {
    unsigned tasks_left;
    unsigned xor_left;
    unsigned and_left;
    unsigned loops_left;
};

Plan gen_seq(Rng& rng, PlanBudget& budget, bool force_leading_task, unsigned depth);

Plan gen_element(Rng& rng, PlanBudget& budget, unsigned depth) {
    const bool can_xor = budget.xor_left > 0 && budget.tasks_left >= 2 && depth < 4;
    const bool can_and = budget.and_left > 0 && budget.tasks_left >= 2 && depth < 4;
    const bool can_loop = budget.loops_left > 0 && budget.tasks_left >= 1 && depth < 4;
    const std::uint64_t roll = rng.below(100);
    if (can_xor && roll < 25) {
        --budget.xor_left;
        Plan p{Plan::Kind::Xor, {}};
        const unsigned branches = 2 + (rng.chance(25) ? 1 : 0);
        for (unsigned i = 0; i < branches && budget.tasks_left > 0; ++i)
            p.children.push_back(gen_seq(rng, budget, /*force_leading_task=*/true, depth + 1));
        if (p.children.size() < 2) {  // not enough budget: degrade to a task
            Plan t{Plan::Kind::Task, {}};
            return p.children.empty() ? t : std::move(p.children[0]);
        }
        return p;
    }
    if (can_and && roll < 40) {
        --budget.and_left;
        Plan p{Plan::Kind::And, {}};
        for (unsigned i = 0; i < 2 && budget.tasks_left > 0; ++i)
            p.children.push_back(gen_seq(rng, budget, true, depth + 1));
        if (p.children.size() < 2) {
            Plan t{Plan::Kind::Task, {}};
            return p.children.empty() ? t : std::move(p.children[0]);
        }
        return p;
    }
    if (can_loop && roll < 50) {
        --budget.loops_left;
        Plan p{Plan::Kind::Loop, {}};
        p.children.push_back(gen_seq(rng, budget, true, depth + 1));
        return p;
    }
    if (budget.tasks_left > 0) {
        --budget.tasks_left;
        return Plan{Plan::Kind::Task, {}};
    }
    return Plan{Plan::Kind::Seq, {}};
}

Plan gen_seq(Rng& rng, PlanBudget& budget, bool force_leading_task, unsigned depth) {
    Plan seq{Plan::Kind::Seq, {}};
    if (force_leading_task && budget.tasks_left > 0) {
        --budget.tasks_left;
        seq.children.push_back(Plan{Plan::Kind::Task, {}});
    }
    const unsigned extra = 1 + static_cast<unsigned>(rng.below(2));
    for (unsigned i = 0; i < extra && budget.tasks_left > 0; ++i)
        seq.children.push_back(gen_element(rng, budget, depth));
    if (seq.children.empty()) {
        // keep branches nonempty
        seq.children.push_back(Plan{Plan::Kind::Task, {}});
        if (budget.tasks_left > 0) --budget.tasks_left;
    }
    return seq;
}

class Materializer {
public:
    explicit Materializer(ProcessGraph& g) : g_(g) {}

    void run(const Plan& root) {
        add_node("start", NodeKind::Start);
        cur_ = "start";
        emit(root);
        Node end;
        end.id = "end";
        end.kind = NodeKind::End;
        g_.nodes.push_back(end);
        g_.edges.emplace_back(cur_, "end");
    }

private:
    void add_node(const std::string& id, NodeKind kind) {
        Node n;
        n.id = id;
        n.kind = kind;
        g_.nodes.push_back(n);
    }

    void append(const std::string& id, NodeKind kind) {
        add_node(id, kind);
        g_.edges.emplace_back(cur_, id);
        cur_ = id;
    }

    void emit(const Plan& p) {
        switch (p.kind) {
            case Plan::Kind::Task:
                append("T" + std::to_string(++tasks_), NodeKind::Task);
                break;
            case Plan::Kind::Seq:
                for (const Plan& c : p.children) emit(c);
                break;
            case Plan::Kind::Xor:
            case Plan::Kind::And: {
                const bool is_and = p.kind == Plan::Kind::And;
                const std::string split =
                    (is_and ? "AS" : "XS") + std::to_string(++splits_);
                const std::string join = (is_and ? "AJ" : "XJ") + std::to_string(splits_);
                append(split, is_and ? NodeKind::AndSplit : NodeKind::XorSplit);
                std::vector<std::string> ends;
                for (const Plan& c : p.children) {
                    cur_ = split;
                    emit(c);
                    ends.push_back(cur_);
                }
                add_node(join, is_and ? NodeKind::AndJoin : NodeKind::XorJoin);
                for (const auto& e : ends) g_.edges.emplace_back(e, join);
                cur_ = join;
                break;
            }
            case Plan::Kind::Loop: {
                const std::string header = "LH" + std::to_string(++loops_);
                const std::string exit = "LX" + std::to_string(loops_);
                append(header, NodeKind::XorJoin);
                for (const Plan& c : p.children) emit(c);
                append(exit, NodeKind::XorSplit);
                g_.edges.emplace_back(exit, header);
                break;
            }
        }
    }

    ProcessGraph& g_;
    std::string cur_;
    unsigned tasks_ = 0, splits_ = 0, loops_ = 0;
};

}  // namespace

ProcessGraph random_model(Rng& rng, const ModelGenOptions& opts) {
    PlanBudget budget{1 + static_cast<unsigned>(rng.below(opts.max_tasks)),
                      static_cast<unsigned>(rng.below(opts.max_xor + 1)),
                      static_cast<unsigned>(rng.below(opts.max_and + 1)),
                      static_cast<unsigned>(rng.below(opts.max_loops + 1))};
    Plan root = gen_seq(rng, budget, true, 0);
    ProcessGraph g;
    g.name = "random";
    Materializer(g).run(root);
    if (opts.annotate) {
        for (Node& node : g.nodes) {
            if (!node.is_task()) continue;
            const unsigned count = static_cast<unsigned>(rng.below(3));
            std::set<std::string> chosen;
            for (unsigned i = 0; i < count; ++i) {
                const std::string& atom = opts.atoms[rng.below(opts.atoms.size())];
                if (!chosen.insert(atom).second) continue;
                node.annotations.insert(Literal{atom, !rng.chance(25)});
            }
        }
    }
    g.build_indexes();
    return g;
}

RuleSet random_ruleset(Rng& rng, const RuleGenOptions& opts) {
    static const Modality kObligations[] = {Modality::OM,    Modality::OPU,
                                            Modality::OAPNP, Modality::OANPNP,
                                            Modality::OAPP,  Modality::OANPP};
    RuleSet rs;
    const unsigned count = 1 + static_cast<unsigned>(rng.below(opts.max_rules));
    auto atom = [&] { return opts.atoms[rng.below(opts.atoms.size())]; };
    auto literal = [&] { return Literal{atom(), !rng.chance(30)}; };

    for (unsigned i = 0; i < count; ++i) {
        Rule rule;
        rule.id = "r" + std::to_string(i + 1);
        const unsigned body_n = static_cast<unsigned>(rng.below(3));
        for (unsigned b = 0; b < body_n; ++b) {
            BodyItem item;
            if (opts.allow_deontic_bodies && rng.chance(20))
                item.item = DeonticLiteral{rng.chance(40) ? Modality::P
                                                          : kObligations[rng.below(6)],
                                           literal()};
            else
                item.item = literal();
            if (std::find(rule.body.begin(), rule.body.end(), item) == rule.body.end())
                rule.body.push_back(std::move(item));
        }
        if (rng.chance(30)) {
            rule.head = DefinitionalHead{literal()};
        } else {
            ReparationChain chain;
            const bool permission = rng.chance(15);
            const Literal first = literal();
            chain.links.push_back(
                DeonticLiteral{permission ? Modality::P : kObligations[rng.below(6)], first});
            if (!permission && opts.max_chain_links >= 2 && rng.chance(40)) {
                const Literal second = literal();
                if (second != first && second != first.complement())
                    chain.links.push_back(DeonticLiteral{kObligations[rng.below(6)], second});
            }
            rule.head = DeonticHead{std::move(chain)};
        }
        if (opts.allow_terminates && rng.chance(12)) rule.terminates.insert(literal());
        rs.rules.push_back(std::move(rule));
    }

    const unsigned sups = static_cast<unsigned>(rng.below(opts.max_superiority + 1));
    for (unsigned i = 0; i < sups && rs.rules.size() >= 2; ++i) {
        const std::string a = rs.rules[rng.below(rs.rules.size())].id;
        const std::string b = rs.rules[rng.below(rs.rules.size())].id;
        if (a == b) continue;
        rs.superiority.emplace_back(a, b);
    }
    std::sort(rs.superiority.begin(), rs.superiority.end());
    rs.superiority.erase(std::unique(rs.superiority.begin(), rs.superiority.end()),
                         rs.superiority.end());

    // The parser is the authority on ruleset validity (superiority cycles
    // among conflicting rules); fall back to no superiority if it objects.
    try {
        return parse_rules(serialize_rules(rs));
    } catch (const ParseError&) {
        rs.superiority.clear();
        return parse_rules(serialize_rules(rs));
    }
}

std::set<std::vector<std::string>> token_game_traces(const ProcessGraph& g,
                                                     unsigned loop_bound) {
    const std::size_t n_edges = g.edges.size();
    std::vector<std::size_t> edge_from(n_edges), edge_to(n_edges);
    std::vector<std::vector<std::size_t>> out_edges(g.nodes.size()), in_edges(g.nodes.size());
    for (std::size_t e = 0; e < n_edges; ++e) {
        edge_from[e] = g.index.at(g.edges[e].first);
        edge_to[e] = g.index.at(g.edges[e].second);
        out_edges[edge_from[e]].push_back(e);
        in_edges[edge_to[e]].push_back(e);
    }

    // Back-edges: DFS grey-ancestor edges.
    std::set<std::size_t> back;
    std::size_t start = g.nodes.size();
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
        if (g.nodes[i].kind == NodeKind::Start) start = i;
    {
        std::vector<int> color(g.nodes.size(), 0);
        std::function<void(std::size_t)> dfs = [&](std::size_t v) {
            color[v] = 1;
            for (std::size_t e : out_edges[v]) {
                if (color[edge_to[e]] == 1)
                    back.insert(e);
                else if (color[edge_to[e]] == 0)
                    dfs(edge_to[e]);
            }
            color[v] = 2;
        };
        dfs(start);
    }

    std::set<std::vector<std::string>> traces;
    std::vector<unsigned> tokens(n_edges, 0);
    std::map<std::size_t, unsigned> back_uses;
    std::vector<std::string> prefix;

    std::function<void()> explore = [&] {
        bool any_token = false;
        for (unsigned t : tokens) any_token = any_token || t > 0;
        if (!any_token) {
            traces.insert(prefix);
            return;
        }
        for (std::size_t v = 0; v < g.nodes.size(); ++v) {
            const Node& node = g.nodes[v];
            switch (node.kind) {
                case NodeKind::Start: break;
                case NodeKind::End: {
                    for (std::size_t e : in_edges[v]) {
                        if (!tokens[e]) continue;
                        --tokens[e];
                        explore();
                        ++tokens[e];
                    }
                    break;
                }
                case NodeKind::Task: {
                    const std::size_t in = in_edges[v][0], out = out_edges[v][0];
                    if (!tokens[in]) break;
                    --tokens[in];
                    ++tokens[out];
                    prefix.push_back(node.id);
                    explore();
                    prefix.pop_back();
                    --tokens[out];
                    ++tokens[in];
                    break;
                }
                case NodeKind::AndSplit: {
                    const std::size_t in = in_edges[v][0];
                    if (!tokens[in]) break;
                    --tokens[in];
                    for (std::size_t e : out_edges[v]) ++tokens[e];
                    explore();
                    for (std::size_t e : out_edges[v]) --tokens[e];
                    ++tokens[in];
                    break;
                }
                case NodeKind::AndJoin: {
                    bool all = true;
                    for (std::size_t e : in_edges[v]) all = all && tokens[e] > 0;
                    if (!all) break;
                    for (std::size_t e : in_edges[v]) --tokens[e];
                    ++tokens[out_edges[v][0]];
                    explore();
                    --tokens[out_edges[v][0]];
                    for (std::size_t e : in_edges[v]) ++tokens[e];
                    break;
                }
                case NodeKind::XorSplit: {
                    const std::size_t in = in_edges[v][0];
                    if (!tokens[in]) break;
                    for (std::size_t e : out_edges[v]) {
                        if (back.count(e) && back_uses[e] >= loop_bound) continue;
                        --tokens[in];
                        ++tokens[e];
                        if (back.count(e)) ++back_uses[e];
                        explore();
                        if (back.count(e)) --back_uses[e];
                        --tokens[e];
                        ++tokens[in];
                    }
                    break;
                }
                case NodeKind::XorJoin: {
                    for (std::size_t e : in_edges[v]) {
                        if (!tokens[e]) continue;
                        --tokens[e];
                        ++tokens[out_edges[v][0]];
                        explore();
                        --tokens[out_edges[v][0]];
                        ++tokens[e];
                    }
                    break;
                }
            }
        }
    };

    ++tokens[out_edges[start][0]];
    explore();
    return traces;
}

}  // namespace normcheck::testing
