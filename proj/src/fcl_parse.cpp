#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "normcheck/fcl.hpp"

namespace normcheck {

namespace {

// ── Lexer ───────────────────────────────────────────────────────────────────

enum class Tok {
    Ident,
    Colon,      // :
    Comma,      // ,
    Arrow,      // =>
    Otimes,     // (x)
    LBracket,   // [
    RBracket,   // ]
    LBrace,     // {
    RBrace,     // }
    Greater,    // >
    Tilde,      // ~
    Terminates, // keyword
    Eol,
};

struct Token {
    Tok kind;
    std::string text;
    std::size_t line;
    std::size_t col;
};

class LineLexer {
public:
    LineLexer(std::string_view line, std::size_t line_no) : line_(line), line_no_(line_no) {}

    std::vector<Token> lex() {
        std::vector<Token> out;
        while (true) {
            skip_space();
            if (pos_ >= line_.size() || line_[pos_] == '#') break;
            out.push_back(next());
        }
        out.push_back(Token{Tok::Eol, "", line_no_, pos_ + 1});
        return out;
    }

private:
    void skip_space() {
        while (pos_ < line_.size() &&
               (line_[pos_] == ' ' || line_[pos_] == '\t' || line_[pos_] == '\r'))
            ++pos_;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(msg, line_no_, pos_ + 1);
    }

    Token next() {
        std::size_t col = pos_ + 1;
        char c = line_[pos_];
        auto single = [&](Tok k) {
            ++pos_;
            return Token{k, std::string(1, c), line_no_, col};
        };
        switch (c) {
            case ':': return single(Tok::Colon);
            case ',': return single(Tok::Comma);
            case '[': return single(Tok::LBracket);
            case ']': return single(Tok::RBracket);
            case '{': return single(Tok::LBrace);
            case '}': return single(Tok::RBrace);
            case '>': return single(Tok::Greater);
            case '~': return single(Tok::Tilde);
            case '=':
                if (pos_ + 1 < line_.size() && line_[pos_ + 1] == '>') {
                    pos_ += 2;
                    return Token{Tok::Arrow, "=>", line_no_, col};
                }
                fail("expected '=>'");
            case '(':
                if (pos_ + 2 < line_.size() && line_[pos_ + 1] == 'x' && line_[pos_ + 2] == ')') {
                    pos_ += 3;
                    return Token{Tok::Otimes, "(x)", line_no_, col};
                }
                fail("expected '(x)'");
            default: break;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < line_.size() &&
                   (std::isalnum(static_cast<unsigned char>(line_[pos_])) || line_[pos_] == '_'))
                ++pos_;
            std::string word(line_.substr(start, pos_ - start));
            if (word == "terminates") return Token{Tok::Terminates, word, line_no_, col};
            return Token{Tok::Ident, word, line_no_, col};
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    std::string_view line_;
    std::size_t line_no_;
    std::size_t pos_ = 0;
};

// ── Statement parser ─────────────────────────────────────────────────────────

class LineParser {
public:
    LineParser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    // Either a rule or a superiority statement.
    struct Sup {
        std::string winner, loser;
        std::size_t line, col;
    };
    std::variant<Rule, Sup> parse() {
        const Token& first = expect(Tok::Ident, "rule id");
        if (peek().kind == Tok::Greater) {
            advance();
            const Token& loser = expect(Tok::Ident, "rule id after '>'");
            expect(Tok::Eol, "end of line");
            return Sup{first.text, loser.text, first.line, first.col};
        }
        Rule rule;
        rule.id = first.text;
        expect(Tok::Colon, "':' after rule id");
        if (peek().kind != Tok::Arrow) parse_body(rule);
        expect(Tok::Arrow, "'=>'");
        parse_head(rule);
        if (peek().kind == Tok::Terminates) parse_terminates(rule);
        expect(Tok::Eol, "end of line");
        return rule;
    }

private:
    const Token& peek() const { return toks_[idx_]; }
    const Token& advance() { return toks_[idx_++]; }

    const Token& expect(Tok kind, const std::string& what) {
        if (peek().kind != kind)
            throw ParseError("expected " + what, peek().line, peek().col);
        return advance();
    }

    Literal parse_lit() {
        bool positive = true;
        if (peek().kind == Tok::Tilde) {
            advance();
            positive = false;
        }
        const Token& t = expect(Tok::Ident, "atom");
        return Literal{t.text, positive};
    }

    DeonticLiteral parse_deontic() {
        expect(Tok::LBracket, "'['");
        const Token& m = expect(Tok::Ident, "modality");
        std::optional<Modality> mod;
        bool forbidden_sugar = (m.text == "F");
        if (!forbidden_sugar) {
            mod = modality_from_name(m.text);
            if (!mod) throw ParseError("unknown modality '" + m.text + "'", m.line, m.col);
        }
        expect(Tok::RBracket, "']'");
        Literal lit = parse_lit();
        if (forbidden_sugar) return DeonticLiteral{Modality::OM, lit.complement()};
        return DeonticLiteral{*mod, lit};
    }

    void parse_body(Rule& rule) {
        while (true) {
            BodyItem item;
            if (peek().kind == Tok::LBracket) {
                std::size_t line = peek().line, col = peek().col;
                item.item = parse_deontic();
                if (peek().kind == Tok::Otimes)
                    throw ParseError("reparation chains are not allowed in rule bodies", line,
                                     col);
            } else {
                item.item = parse_lit();
            }
            if (std::find(rule.body.begin(), rule.body.end(), item) == rule.body.end())
                rule.body.push_back(std::move(item));
            if (peek().kind != Tok::Comma) break;
            advance();
        }
    }

    void parse_head(Rule& rule) {
        if (peek().kind != Tok::LBracket) {
            rule.head = DefinitionalHead{parse_lit()};
            return;
        }
        ReparationChain chain;
        std::set<Literal> contents;
        while (true) {
            std::size_t line = peek().line, col = peek().col;
            DeonticLiteral dl = parse_deontic();
            if (is_permission(dl.modality) && !chain.links.empty())
                throw ParseError("permission cannot appear after the first chain link", line,
                                 col);
            if (!chain.links.empty() && is_permission(chain.links.front().modality))
                throw ParseError("a permission head cannot be followed by a chain", line, col);
            if (!contents.insert(dl.content).second)
                throw ParseError("chain links must have distinct contents ('" +
                                     dl.content.str() + "' repeats)",
                                 line, col);
            chain.links.push_back(std::move(dl));
            if (peek().kind != Tok::Otimes) break;
            advance();
        }
        rule.head = DeonticHead{std::move(chain)};
    }

    void parse_terminates(Rule& rule) {
        advance();  // 'terminates'
        expect(Tok::LBrace, "'{'");
        while (true) {
            rule.terminates.insert(parse_lit());
            if (peek().kind != Tok::Comma) break;
            advance();
        }
        expect(Tok::RBrace, "'}'");
    }

    std::vector<Token> toks_;
    std::size_t idx_ = 0;
};

// Incremental cycle check over superiority edges restricted to rules with
// conflicting heads, so a rejection can point at the line that closes the
// cycle.
bool closes_cycle(const std::map<std::string, std::set<std::string>>& edges,
                  const std::string& from, const std::string& to) {
    std::set<std::string> seen;
    std::function<bool(const std::string&)> reach = [&](const std::string& cur) {
        if (cur == from) return true;
        if (!seen.insert(cur).second) return false;
        auto it = edges.find(cur);
        if (it == edges.end()) return false;
        for (const auto& next : it->second)
            if (reach(next)) return true;
        return false;
    };
    return reach(to);
}

}  // namespace

RuleSet parse_rules(std::string_view text) {
    RuleSet rs;
    std::map<std::string, std::size_t> rule_index;
    struct PendingSup {
        std::string winner, loser;
        std::size_t line, col;
    };
    std::vector<PendingSup> sups;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        ++line_no;
        pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;

        std::vector<Token> toks = LineLexer(line, line_no).lex();
        if (toks.size() == 1) continue;  // blank / comment-only
        auto stmt = LineParser(std::move(toks)).parse();
        if (auto* rule = std::get_if<Rule>(&stmt)) {
            if (rule_index.count(rule->id))
                throw ParseError("duplicate rule id '" + rule->id + "'", line_no, 1);
            rule_index[rule->id] = rs.rules.size();
            rs.rules.push_back(std::move(*rule));
        } else {
            auto& sup = std::get<LineParser::Sup>(stmt);
            sups.push_back(PendingSup{sup.winner, sup.loser, sup.line, sup.col});
        }
    }

    // Resolve superiority after all rules are known (forward references are fine).
    std::map<std::string, std::set<std::string>> conflict_edges;
    for (const auto& sup : sups) {
        for (const auto& id : {sup.winner, sup.loser})
            if (!rule_index.count(id))
                throw ParseError("superiority references unknown rule '" + id + "'", sup.line,
                                 sup.col);
        if (sup.winner == sup.loser)
            throw ParseError("superiority cannot relate a rule to itself", sup.line, sup.col);
        const Rule& w = rs.rules[rule_index[sup.winner]];
        const Rule& l = rs.rules[rule_index[sup.loser]];
        if (rules_conflict(w, l)) {
            if (closes_cycle(conflict_edges, sup.winner, sup.loser))
                throw ParseError("superiority cycle among conflicting rules ('" + sup.winner +
                                     "' > '" + sup.loser + "')",
                                 sup.line, sup.col);
            conflict_edges[sup.winner].insert(sup.loser);
        }
        rs.superiority.emplace_back(sup.winner, sup.loser);
    }
    std::sort(rs.superiority.begin(), rs.superiority.end());
    rs.superiority.erase(std::unique(rs.superiority.begin(), rs.superiority.end()),
                         rs.superiority.end());
    return rs;
}

std::string serialize_rules(const RuleSet& rs) {
    std::ostringstream out;
    for (const auto& rule : rs.rules) {
        out << rule.id << ": ";
        for (std::size_t i = 0; i < rule.body.size(); ++i) {
            if (i) out << ", ";
            out << rule.body[i].str();
        }
        if (!rule.body.empty()) out << ' ';
        out << "=> ";
        if (const auto* def = rule.definitional()) {
            out << def->literal.str();
        } else {
            out << rule.deontic()->chain.str();
        }
        if (!rule.terminates.empty()) {
            out << " terminates {";
            bool first = true;
            for (const auto& l : rule.terminates) {
                if (!first) out << ", ";
                first = false;
                out << l.str();
            }
            out << '}';
        }
        out << '\n';
    }
    for (const auto& [winner, loser] : rs.superiority) out << winner << " > " << loser << '\n';
    return out.str();
}

}  // namespace normcheck
