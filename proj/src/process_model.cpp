#include <algorithm>
#include <sstream>

#include "normcheck/process_model.hpp"

#include "json.hpp"

namespace normcheck {

const char* node_kind_name(NodeKind k) {
    switch (k) {
        case NodeKind::Task: return "task";
        case NodeKind::AndSplit: return "and_split";
        case NodeKind::AndJoin: return "and_join";
        case NodeKind::XorSplit: return "xor_split";
        case NodeKind::XorJoin: return "xor_join";
        case NodeKind::Start: return "start";
        case NodeKind::End: return "end";
    }
    return "?";
}

namespace {

std::optional<NodeKind> node_kind_from(const std::string& s) {
    static const std::pair<std::string_view, NodeKind> table[] = {
        {"task", NodeKind::Task},           {"and_split", NodeKind::AndSplit},
        {"and_join", NodeKind::AndJoin},    {"xor_split", NodeKind::XorSplit},
        {"xor_join", NodeKind::XorJoin},    {"start", NodeKind::Start},
        {"end", NodeKind::End},
    };
    for (const auto& [name, kind] : table)
        if (name == s) return kind;
    return std::nullopt;
}

[[noreturn]] void semantic_error(const std::string& locus, const std::string& message) {
    ValidationReport report;
    report.violations.push_back(Violation{"semantic", locus, message});
    throw ModelError(std::move(report));
}

// Byte offset -> 1-based line/column for ParseError positions.
std::pair<std::size_t, std::size_t> line_col(std::string_view text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

// nlohmann's parser recurses on nested containers; bound the depth before
// handing it arbitrary bytes.
void check_depth(std::string_view text) {
    constexpr int kMaxDepth = 512;
    int depth = 0;
    bool in_string = false, escaped = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_string) {
            if (escaped)
                escaped = false;
            else if (c == '\\')
                escaped = true;
            else if (c == '"')
                in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        if (c == '[' || c == '{') {
            if (++depth > kMaxDepth) {
                auto [line, col] = line_col(text, i);
                throw ParseError("JSON nesting exceeds depth limit", line, col);
            }
        }
        if (c == ']' || c == '}') --depth;
    }
}

}  // namespace

ModelError::ModelError(ValidationReport r)
    : std::runtime_error("invalid model: " + r.str()), report(std::move(r)) {}

std::string ValidationReport::str() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < violations.size(); ++i) {
        if (i) out << "; ";
        const Violation& v = violations[i];
        out << "[" << v.code << "] " << v.locus << ": " << v.message;
    }
    return out.str();
}

void ProcessGraph::build_indexes() {
    index.clear();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!index.emplace(nodes[i].id, i).second)
            semantic_error("nodes[" + std::to_string(i) + "]",
                           "duplicate node id '" + nodes[i].id + "'");
    }
    succ.assign(nodes.size(), {});
    pred.assign(nodes.size(), {});
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const auto& [from, to] = edges[i];
        auto f = index.find(from);
        auto t = index.find(to);
        if (f == index.end() || t == index.end())
            semantic_error("edges[" + std::to_string(i) + "]",
                           "edge references unknown node '" +
                               (f == index.end() ? from : to) + "'");
        succ[f->second].push_back(t->second);
        pred[t->second].push_back(f->second);
    }
}

const Node* ProcessGraph::find(const std::string& id) const {
    auto it = index.find(id);
    return it == index.end() ? nullptr : &nodes[it->second];
}

std::string Trace::str() const {
    std::string out;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (i) out += ',';
        out += steps[i];
    }
    return out;
}

ProcessGraph parse_model_lenient(std::string_view text) {
    check_depth(text);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ParseError(std::string("JSON syntax error: ") + e.what(), line, col);
    }
    if (!doc.is_object()) semantic_error("$", "model must be a JSON object");

    ProcessGraph g;
    if (doc.contains("name")) {
        if (!doc["name"].is_string()) semantic_error("name", "must be a string");
        g.name = doc["name"].get<std::string>();
    }
    if (!doc.contains("nodes") || !doc["nodes"].is_array())
        semantic_error("nodes", "missing or not an array");
    if (!doc.contains("edges") || !doc["edges"].is_array())
        semantic_error("edges", "missing or not an array");

    std::size_t i = 0;
    for (const auto& jn : doc["nodes"]) {
        const std::string locus = "nodes[" + std::to_string(i++) + "]";
        if (!jn.is_object()) semantic_error(locus, "node must be an object");
        Node node;
        if (!jn.contains("id") || !jn["id"].is_string() || jn["id"].get<std::string>().empty())
            semantic_error(locus, "missing or empty node id");
        node.id = jn["id"].get<std::string>();
        if (!jn.contains("type") || !jn["type"].is_string())
            semantic_error(locus, "missing node type");
        auto kind = node_kind_from(jn["type"].get<std::string>());
        if (!kind)
            semantic_error(locus, "unknown node type '" + jn["type"].get<std::string>() + "'");
        node.kind = *kind;
        if (jn.contains("name")) {
            if (!jn["name"].is_string()) semantic_error(locus, "name must be a string");
            node.name = jn["name"].get<std::string>();
        }
        if (jn.contains("annotations")) {
            if (node.kind != NodeKind::Task)
                semantic_error(locus, "only tasks carry annotations");
            if (!jn["annotations"].is_array())
                semantic_error(locus, "annotations must be an array");
            for (const auto& ja : jn["annotations"]) {
                if (!ja.is_string()) semantic_error(locus, "annotation must be a string");
                try {
                    node.annotations.insert(parse_literal(ja.get<std::string>()));
                } catch (const std::invalid_argument& e) {
                    semantic_error(locus, e.what());
                }
            }
            if (!is_consistent(node.annotations))
                semantic_error(locus, "inconsistent annotation set on '" + node.id + "'");
        }
        g.nodes.push_back(std::move(node));
    }
    i = 0;
    for (const auto& je : doc["edges"]) {
        const std::string locus = "edges[" + std::to_string(i++) + "]";
        if (!je.is_object() || !je.contains("from") || !je.contains("to") ||
            !je["from"].is_string() || !je["to"].is_string())
            semantic_error(locus, "edge must be an object with string 'from' and 'to'");
        g.edges.emplace_back(je["from"].get<std::string>(), je["to"].get<std::string>());
    }
    g.build_indexes();
    return g;
}

ProcessGraph parse_model(std::string_view text) {
    ProcessGraph g = parse_model_lenient(text);
    ValidationReport report = validate_graph(g);
    if (!report.ok()) throw ModelError(std::move(report));
    return g;
}

std::string serialize_model(const ProcessGraph& g) {
    nlohmann::json doc;
    doc["name"] = g.name;
    nlohmann::json nodes = nlohmann::json::array();
    for (const Node& n : g.nodes) {
        nlohmann::json jn;
        jn["id"] = n.id;
        jn["type"] = node_kind_name(n.kind);
        if (!n.name.empty()) jn["name"] = n.name;
        if (!n.annotations.empty()) {
            nlohmann::json anns = nlohmann::json::array();
            for (const Literal& l : n.annotations) anns.push_back(l.str());
            jn["annotations"] = anns;
        }
        nodes.push_back(std::move(jn));
    }
    doc["nodes"] = std::move(nodes);
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [from, to] : g.edges) edges.push_back({{"from", from}, {"to", to}});
    doc["edges"] = std::move(edges);
    return doc.dump(2) + "\n";
}

TraceOverflowError::TraceOverflowError(std::uint64_t estimate, std::uint64_t cap)
    : std::runtime_error("trace count " +
                         (estimate == UINT64_MAX ? std::string("(overflowed)")
                                                 : std::to_string(estimate)) +
                         " exceeds cap " + std::to_string(cap)),
      estimate(estimate),
      cap(cap) {}

ResolvedTrace resolve_trace(const Trace& t, const ProcessGraph& g) {
    ResolvedTrace out;
    out.reserve(t.steps.size());
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
        const Node* node = g.find(t.steps[i]);
        if (!node || !node->is_task())
            semantic_error("trace[" + std::to_string(i + 1) + "]",
                           "'" + t.steps[i] + "' is not a task of the model");
        out.push_back(ResolvedStep{node->id, node->annotations});
    }
    return out;
}

StateSequence cumulate(const Trace& t, const ProcessGraph& g) {
    return cumulate(resolve_trace(t, g));
}

}  // namespace normcheck
