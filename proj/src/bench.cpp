#include <algorithm>
#include <functional>
#include <set>

#include "normcheck/bench.hpp"

namespace normcheck {

namespace {

// splitmix64: deterministic across platforms, unlike std distributions.
struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed) {}
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

class ModelBuilder {
public:
    explicit ModelBuilder(unsigned loops_to_place) : loops_left_(loops_to_place) {}

    ProcessGraph finish(std::string name) {
        g_.name = std::move(name);
        node("end", NodeKind::End);
        g_.build_indexes();
        return std::move(g_);
    }

    void begin() {
        Node n;
        n.id = "start";
        n.kind = NodeKind::Start;
        g_.nodes.push_back(n);
        cur_ = "start";
    }

    unsigned loops_left() const { return loops_left_; }

    // n sequential tasks; while hostable, remaining loops wrap one task each.
    void chain(unsigned n, bool hostable) {
        for (unsigned i = 0; i < n; ++i) {
            if (hostable && loops_left_ > 0) {
                --loops_left_;
                const std::string header = fresh("lh");
                const std::string exit = fresh("lx");
                node(header, NodeKind::XorJoin);
                const std::string body = task();
                node(exit, NodeKind::XorSplit);
                g_.edges.emplace_back(exit, header);  // back-edge
            } else {
                task();
            }
        }
    }

    void xor_block(const std::vector<std::function<void()>>& branches) {
        const std::string split = fresh("x");
        node(split, NodeKind::XorSplit);
        const std::string join = next_id("j");
        std::vector<std::string> ends;
        for (const auto& branch : branches) {
            cur_ = split;
            branch();
            ends.push_back(cur_);
        }
        Node jn;
        jn.id = join;
        jn.kind = NodeKind::XorJoin;
        g_.nodes.push_back(jn);
        ++join_n_;
        for (const auto& e : ends) g_.edges.emplace_back(e, join);
        cur_ = join;
    }

private:
    std::string next_id(const char* prefix) {
        unsigned n = 0;
        if (prefix[0] == 't') n = task_n_;
        else if (prefix[0] == 'x') n = split_n_;
        else if (prefix[0] == 'j') n = join_n_;
        else n = loop_n_;
        return std::string(prefix) + std::to_string(n + 1);
    }

    std::string fresh(const char* prefix) {
        std::string id = next_id(prefix);
        if (prefix[0] == 'x') ++split_n_;
        else if (prefix[0] == 'l') { if (prefix[1] == 'x') ++loop_n_; }
        return id;
    }

    void node(const std::string& id, NodeKind kind) {
        Node n;
        n.id = id;
        n.kind = kind;
        g_.nodes.push_back(n);
        g_.edges.emplace_back(cur_, id);
        cur_ = id;
    }

    std::string task() {
        ++task_n_;
        const std::string id = "t" + std::to_string(task_n_);
        node(id, NodeKind::Task);
        return id;
    }

    ProcessGraph g_;
    std::string cur_;
    unsigned task_n_ = 0, split_n_ = 0, join_n_ = 0, loop_n_ = 0;
    unsigned loops_left_;
};

}  // namespace

ModelProfile profile_model(const ProcessGraph& g) {
    ModelProfile p;
    const std::size_t n = g.nodes.size();
    std::size_t start = n, end = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (g.nodes[i].is_task()) ++p.tasks;
        if (g.nodes[i].kind == NodeKind::Start) start = i;
        if (g.nodes[i].kind == NodeKind::End) end = i;
    }
    if (start == n || end == n) return p;

    // DFS back-edge detection (grey-ancestor edges); on validated
    // block-structured graphs these are exactly the loop back-edges.
    std::vector<int> color(n, 0);
    std::set<std::pair<std::size_t, std::size_t>> back;
    std::function<void(std::size_t)> dfs = [&](std::size_t v) {
        color[v] = 1;
        for (std::size_t s : g.succ[v]) {
            if (color[s] == 1)
                back.insert({v, s});
            else if (color[s] == 0)
                dfs(s);
        }
        color[v] = 2;
    };
    dfs(start);
    p.loops = static_cast<unsigned>(back.size());

    std::set<std::size_t> loop_exits;
    for (const auto& [u, v] : back) loop_exits.insert(u);
    for (std::size_t i = 0; i < n; ++i) {
        if (g.nodes[i].kind != NodeKind::XorSplit || loop_exits.count(i)) continue;
        ++p.xor_decisions;
        if (g.succ[i].size() == 3) ++p.ternary;
    }

    // Task counts over loop-free graph paths (one successor per node).
    std::vector<std::vector<std::size_t>> dag(n);
    std::vector<std::size_t> indeg(n, 0);
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v : g.succ[u])
            if (!back.count({u, v})) {
                dag[u].push_back(v);
                ++indeg[v];
            }
    std::vector<std::size_t> topo, queue;
    for (std::size_t i = 0; i < n; ++i)
        if (indeg[i] == 0) queue.push_back(i);
    while (!queue.empty()) {
        std::size_t v = queue.back();
        queue.pop_back();
        topo.push_back(v);
        for (std::size_t s : dag[v])
            if (--indeg[s] == 0) queue.push_back(s);
    }
    std::vector<unsigned> mn(n, 0), mx(n, 0);
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
        const std::size_t v = *it;
        if (v == end) continue;
        unsigned best_min = UINT32_MAX, best_max = 0;
        for (std::size_t s : dag[v]) {
            best_min = std::min(best_min, mn[s]);
            best_max = std::max(best_max, mx[s]);
        }
        if (dag[v].empty()) best_min = 0;
        const unsigned own = g.nodes[v].is_task() ? 1 : 0;
        mn[v] = best_min + own;
        mx[v] = best_max + own;
    }
    p.shortest = mn[start];
    p.longest = mx[start];
    return p;
}

ProcessGraph generate_model(const BenchShape& shape) {
    const unsigned T = shape.tasks, X = shape.xor_decisions, R = shape.ternary,
                   L = shape.loops, S = shape.shortest, G = shape.longest;
    if (T < 1) throw BenchError("at least one task required");
    if (S < 1 || G < S || T < G) throw BenchError("need 1 <= shortest <= longest <= tasks");
    if (R > X) throw BenchError("more ternary decisions than decisions");

    ModelBuilder b(L);
    b.begin();

    if (X == 0) {
        if (S != T || G != T)
            throw BenchError("a model without decisions is a chain: shortest = longest = tasks");
        if (L > T) throw BenchError("more loops than tasks to host them");
        b.chain(T, true);
        ProcessGraph g = b.finish("bench");
        ValidationReport report = validate_graph(g);
        if (!report.ok()) throw BenchError("generator built an invalid model: " + report.str());
        return g;
    }

    const unsigned x_small = std::min({2u, X - 1, S - 1});
    const unsigned spine = S - x_small;
    const unsigned remaining = X - 1 - x_small;  // decisions left for D2 + cascade
    const unsigned extra = G - S;                // alpha + beta
    if (T < G + x_small) throw BenchError("tasks too few for the given paths and decisions");
    const unsigned off = T - G - x_small;  // tasks hidden off the longest path

    // Layout: spine tasks, one skip-or-B decision D1, then x_small (1|1)
    // decisions. B = chain(alpha) + D2(chain(beta) | c2), where c2 = chain(f)
    // + an XOR comb whose leaves hold the remaining off-path tasks. Every
    // off-path region keeps its longest path at or under beta so the global
    // longest path stays on the beta side.
    unsigned alpha = 0, beta = 0, f = 0, cascade = 0, leaves = 0;
    std::vector<unsigned> leaf_len;
    if (remaining == 0) {
        if (R > 0) throw BenchError("no nested decisions available to make ternary");
        if (off != 0)
            throw BenchError("no off-path region exists to hide " + std::to_string(off) +
                             " task(s); adjust tasks or longest");
        alpha = extra;
    } else if (remaining == 1) {
        if (R > 0) throw BenchError("no nested decisions available to make ternary");
        if (off > extra)
            throw BenchError("off-path tasks exceed what one nested decision can hide");
        f = off;  // c2 is a plain chain; its length must not beat the beta chain
        beta = std::max(off, extra / 2);
        alpha = extra - beta;
    } else {
        cascade = remaining - 1;
        if (R > cascade) throw BenchError("not enough nested decisions for ternary splits");
        leaves = cascade + 1 + R;
        bool feasible = false;
        const unsigned preferred = std::max(1u, extra / 3);
        for (unsigned attempt = 0; attempt <= 2 * extra + 1 && !feasible; ++attempt) {
            const long candidate =
                static_cast<long>(preferred) +
                ((attempt % 2) ? static_cast<long>((attempt + 1) / 2)
                               : -static_cast<long>(attempt / 2));
            if (candidate < 0 || candidate > static_cast<long>(extra)) continue;
            const unsigned a = static_cast<unsigned>(candidate);
            const unsigned bta = extra - a;
            const unsigned fl = std::min(2u, off);
            const unsigned leaf_total = off - fl;
            if (bta < fl) continue;
            const unsigned max_leaf = bta - fl;
            if (leaf_total > 0 &&
                (max_leaf == 0 ||
                 static_cast<std::uint64_t>(leaves) * max_leaf < leaf_total))
                continue;
            alpha = a;
            beta = bta;
            f = fl;
            leaf_len.assign(leaves, 0);
            unsigned left = leaf_total;
            for (unsigned i = 0; i < leaves && left > 0; ++i) {
                leaf_len[i] = std::min(max_leaf, left);
                left -= leaf_len[i];
            }
            feasible = true;
        }
        if (!feasible) throw BenchError("no feasible branch allocation for the given shape");
    }

    const unsigned branch_hosts = alpha + beta + f;
    if (L > branch_hosts + spine)
        throw BenchError("more loops than chain tasks to host them");

    b.chain(spine, L > branch_hosts);
    std::vector<std::function<void()>> d1;
    d1.emplace_back([] {});  // skip branch
    d1.emplace_back([&] {
        b.chain(alpha, true);
        if (remaining > 0) {
            std::vector<std::function<void()>> d2;
            d2.emplace_back([&] { b.chain(beta, true); });
            d2.emplace_back([&] {
                b.chain(f, true);
                if (cascade > 0) {
                    // left comb of XOR splits; the first R carry an extra branch
                    std::size_t leaf_idx = 0;
                    std::function<void(unsigned)> comb = [&](unsigned depth) {
                        std::vector<std::function<void()>> branches;
                        const unsigned extra_branches = depth < R ? 1u : 0u;
                        for (unsigned e = 0; e < 1 + extra_branches; ++e) {
                            const std::size_t mine = leaf_idx++;
                            branches.emplace_back(
                                [&b, &leaf_len, mine] { b.chain(leaf_len[mine], false); });
                        }
                        if (depth + 1 < cascade) {
                            branches.emplace_back([&comb, depth] { comb(depth + 1); });
                        } else {
                            const std::size_t mine = leaf_idx++;
                            branches.emplace_back(
                                [&b, &leaf_len, mine] { b.chain(leaf_len[mine], false); });
                        }
                        b.xor_block(branches);
                    };
                    comb(0);
                }
            });
            b.xor_block(d2);
        }
    });
    b.xor_block(d1);
    for (unsigned i = 0; i < x_small; ++i) {
        std::vector<std::function<void()>> sm;
        sm.emplace_back([&] { b.chain(1, false); });
        sm.emplace_back([&] { b.chain(1, false); });
        b.xor_block(sm);
    }
    (void)spine_hostable;
    if (b.loops_left() > 0) throw BenchError("could not place every loop");

    ProcessGraph g = b.finish("bench");
    ValidationReport report = validate_graph(g);
    if (!report.ok()) throw BenchError("generator built an invalid model: " + report.str());
    ModelProfile p = profile_model(g);
    if (p.tasks != T || p.xor_decisions != X || p.ternary != R || p.loops != L ||
        p.shortest != S || p.longest != G)
        throw BenchError("generator missed its shape targets");
    return g;
}

RuleSet generate_rules(const BenchRuleShape& shape, ProcessGraph& model) {
    const unsigned N = shape.propositions;
    const unsigned R = shape.rules;
    const unsigned D = shape.definitional;
    const unsigned P = shape.superiority;
    if (R < D + 2 * P) throw BenchError("rules too few for the definitional and superiority targets");
    if (N < D + 3) throw BenchError("propositions too few");

    std::vector<std::string> atoms;
    atoms.reserve(N);
    for (unsigned i = 1; i <= N; ++i) atoms.push_back("p" + std::to_string(i));
    const unsigned n_state = std::max(1u, N * 2 / 5);
    const unsigned n_def = std::min(D, N - n_state - 1);
    auto state_atom = [&](Rng& rng) { return atoms[rng.below(n_state)]; };
    auto body_atom = [&](Rng& rng) { return atoms[rng.below(n_state + n_def)]; };
    auto content_atom = [&](Rng& rng) {
        // obligations mostly over the tail pool, sometimes over state atoms so
        // annotations can fulfil them
        if (rng.chance(35) || n_state + n_def >= N) return atoms[rng.below(n_state)];
        return atoms[n_state + n_def + rng.below(N - n_state - n_def)];
    };

    Rng rng(shape.seed);
    RuleSet rs;
    unsigned rule_n = 0;
    auto add_body = [&](Rule& rule, unsigned count) {
        for (unsigned i = 0; i < count; ++i) {
            BodyItem item;
            item.item = Literal{body_atom(rng), !rng.chance(12)};
            if (std::find(rule.body.begin(), rule.body.end(), item) == rule.body.end())
                rule.body.push_back(std::move(item));
        }
    };

    for (unsigned i = 0; i < D; ++i) {
        Rule rule;
        rule.id = "r" + std::to_string(++rule_n);
        add_body(rule, 1 + rng.below(2));
        rule.head = DefinitionalHead{Literal{atoms[n_state + (i % n_def)], true}};
        rs.rules.push_back(std::move(rule));
    }

    static const Modality kObligations[] = {Modality::OM,    Modality::OPU,  Modality::OAPNP,
                                            Modality::OANPNP, Modality::OAPP, Modality::OANPP};
    for (unsigned k = 0; k < P; ++k) {
        const Literal content{content_atom(rng), true};
        const Modality mod = kObligations[rng.below(6)];
        Rule winner, loser;
        winner.id = "r" + std::to_string(++rule_n);
        add_body(winner, 1);
        winner.head = DeonticHead{ReparationChain{{DeonticLiteral{mod, content}}}};
        loser.id = "r" + std::to_string(++rule_n);
        add_body(loser, 1);
        loser.head =
            DeonticHead{ReparationChain{{DeonticLiteral{mod, content.complement()}}}};
        rs.superiority.emplace_back(winner.id, loser.id);
        rs.rules.push_back(std::move(winner));
        rs.rules.push_back(std::move(loser));
    }

    while (rule_n < R) {
        Rule rule;
        rule.id = "r" + std::to_string(++rule_n);
        add_body(rule, 1 + rng.below(2));
        ReparationChain chain;
        const Modality mod =
            rng.chance(8) ? Modality::P : kObligations[rng.below(6)];
        Literal content{content_atom(rng), !rng.chance(10)};
        chain.links.push_back(DeonticLiteral{mod, content});
        if (mod != Modality::P && rng.chance(20)) {
            Literal second{content_atom(rng), true};
            if (second != content && second != content.complement())
                chain.links.push_back(DeonticLiteral{kObligations[rng.below(4)], second});
        }
        if (rng.chance(6)) rule.terminates.insert(Literal{content_atom(rng), true});
        rule.head = DeonticHead{std::move(chain)};
        rs.rules.push_back(std::move(rule));
    }
    std::sort(rs.superiority.begin(), rs.superiority.end());

    // Sweep unused atoms into rule bodies until every proposition occurs.
    std::set<std::string> used;
    auto collect = [&] {
        used.clear();
        RuleSetStats stats = ruleset_stats(rs);
        (void)stats;
        for (const Rule& r : rs.rules) {
            for (const auto& item : r.body) {
                if (const auto* dl = std::get_if<DeonticLiteral>(&item.item))
                    used.insert(dl->content.atom);
                else
                    used.insert(std::get<Literal>(item.item).atom);
            }
            for (const auto& l : r.terminates) used.insert(l.atom);
            if (const auto* def = r.definitional()) used.insert(def->literal.atom);
            else
                for (const auto& link : r.deontic()->chain.links) used.insert(link.content.atom);
        }
    };
    collect();
    std::size_t sink = 0;
    for (const std::string& atom : atoms) {
        if (used.count(atom)) continue;
        Rule& rule = rs.rules[sink++ % rs.rules.size()];
        BodyItem item;
        item.item = Literal{atom, true};
        if (std::find(rule.body.begin(), rule.body.end(), item) == rule.body.end())
            rule.body.push_back(std::move(item));
    }

    RuleSetStats stats = ruleset_stats(rs);
    if (stats.rule_count != R || stats.definitional_rules != D ||
        stats.superiority_count != P || stats.atom_count != N)
        throw BenchError("rule generator missed its targets");

    // Annotate the model's tasks from the same atom pools.
    for (Node& node : model.nodes) {
        if (!node.is_task()) continue;
        node.annotations.clear();
        const unsigned count = 1 + static_cast<unsigned>(rng.below(3));
        std::set<std::string> chosen;
        for (unsigned i = 0; i < count; ++i) {
            std::string atom = rng.chance(30) ? content_atom(rng) : state_atom(rng);
            if (!chosen.insert(atom).second) continue;
            node.annotations.insert(Literal{atom, !rng.chance(15)});
        }
        if (!is_consistent(node.annotations))
            throw BenchError("generator produced inconsistent annotations");
    }
    return rs;
}

}  // namespace normcheck
