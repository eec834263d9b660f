#include <algorithm>
#include <set>
#include <sstream>

#include "normcheck/fcl.hpp"

#include "json.hpp"

namespace normcheck {

const char* modality_name(Modality m) {
    switch (m) {
        case Modality::P: return "P";
        case Modality::OPU: return "OPU";
        case Modality::OM: return "OM";
        case Modality::OAPP: return "OAPP";
        case Modality::OAPNP: return "OAPNP";
        case Modality::OANPP: return "OANPP";
        case Modality::OANPNP: return "OANPNP";
    }
    return "?";
}

std::optional<Modality> modality_from_name(std::string_view s) {
    static const std::pair<std::string_view, Modality> table[] = {
        {"P", Modality::P},         {"OPU", Modality::OPU},     {"OM", Modality::OM},
        {"OAPP", Modality::OAPP},   {"OAPNP", Modality::OAPNP}, {"OANPP", Modality::OANPP},
        {"OANPNP", Modality::OANPNP},
    };
    for (const auto& [name, mod] : table)
        if (name == s) return mod;
    return std::nullopt;
}

std::string DeonticLiteral::str() const {
    return std::string("[") + modality_name(modality) + "]" + content.str();
}

std::string ReparationChain::str() const {
    std::string out;
    for (std::size_t i = 0; i < links.size(); ++i) {
        if (i) out += " (x) ";
        out += links[i].str();
    }
    return out;
}

std::string BodyItem::str() const {
    if (const auto* lit = std::get_if<Literal>(&item)) return lit->str();
    return std::get<DeonticLiteral>(item).str();
}

const Rule* RuleSet::find_rule(std::string_view id) const {
    for (const auto& r : rules)
        if (r.id == id) return &r;
    return nullptr;
}

bool RuleSet::is_superior(const std::string& winner, const std::string& loser) const {
    return std::binary_search(superiority.begin(), superiority.end(),
                              std::make_pair(winner, loser));
}

bool rules_conflict(const Rule& a, const Rule& b) {
    const auto* da = a.definitional();
    const auto* db = b.definitional();
    if (da && db) return da->literal == db->literal.complement();
    if (da || db) return false;  // definitional vs deontic: different layers
    const DeonticLiteral& ha = a.deontic()->chain.links.front();
    const DeonticLiteral& hb = b.deontic()->chain.links.front();
    if (ha.content != hb.content.complement()) return false;
    // Obligation vs obligation, or obligation vs permission-of-complement.
    // Two permissions of complementary contents coexist.
    return !(is_permission(ha.modality) && is_permission(hb.modality));
}

std::size_t RuleSetStats::head_total() const {
    std::size_t n = 0;
    for (const auto& [mod, occ] : head_occurrences) n += occ.total;
    return n;
}

RuleSetStats ruleset_stats(const RuleSet& rs) {
    RuleSetStats s;
    s.rule_count = rs.rules.size();
    s.superiority_count = rs.superiority.size();
    std::map<Modality, std::set<DeonticLiteral>> head_distinct;
    std::set<DeonticLiteral> comp_distinct;
    std::set<std::string> atoms;
    for (const auto& rule : rs.rules) {
        for (const auto& item : rule.body) {
            if (const auto* dl = std::get_if<DeonticLiteral>(&item.item)) {
                ++s.body_occurrences[dl->modality];
                atoms.insert(dl->content.atom);
            } else {
                atoms.insert(std::get<Literal>(item.item).atom);
            }
        }
        for (const auto& l : rule.terminates) atoms.insert(l.atom);
        if (const auto* def = rule.definitional()) {
            ++s.definitional_rules;
            atoms.insert(def->literal.atom);
            continue;
        }
        ++s.deontic_rules;
        const auto& links = rule.deontic()->chain.links;
        for (std::size_t i = 0; i < links.size(); ++i) {
            const DeonticLiteral& dl = links[i];
            atoms.insert(dl.content.atom);
            head_distinct[dl.modality].insert(dl);
            ++s.head_occurrences[dl.modality].total;
            if (i >= 1) {
                comp_distinct.insert(dl);
                ++s.compensations.total;
            }
        }
    }
    for (const auto& [mod, set] : head_distinct) s.head_occurrences[mod].distinct = set.size();
    s.compensations.distinct = comp_distinct.size();
    s.atom_count = atoms.size();
    return s;
}

std::string stats_to_text(const RuleSetStats& s) {
    std::ostringstream out;
    out << "rules:        " << s.rule_count << " (" << s.definitional_rules << " definitional, "
        << s.deontic_rules << " deontic)\n";
    out << "superiority:  " << s.superiority_count << '\n';
    out << "atoms:        " << s.atom_count << '\n';
    out << "head occurrences (distinct / total):\n";
    for (const auto& [mod, occ] : s.head_occurrences)
        out << "  " << modality_name(mod) << ": " << occ.distinct << " / " << occ.total << '\n';
    out << "compensation links: " << s.compensations.distinct << " / " << s.compensations.total
        << '\n';
    if (!s.body_occurrences.empty()) {
        out << "deontic body occurrences:\n";
        for (const auto& [mod, n] : s.body_occurrences)
            out << "  " << modality_name(mod) << ": " << n << '\n';
    }
    return out.str();
}

std::string stats_to_json(const RuleSetStats& s) {
    nlohmann::json j;
    j["rules"] = s.rule_count;
    j["definitional_rules"] = s.definitional_rules;
    j["deontic_rules"] = s.deontic_rules;
    j["superiority"] = s.superiority_count;
    j["atoms"] = s.atom_count;
    nlohmann::json heads = nlohmann::json::object();
    for (const auto& [mod, occ] : s.head_occurrences)
        heads[modality_name(mod)] = {{"distinct", occ.distinct}, {"total", occ.total}};
    j["head_occurrences"] = heads;
    nlohmann::json body = nlohmann::json::object();
    for (const auto& [mod, n] : s.body_occurrences) body[modality_name(mod)] = n;
    j["body_occurrences"] = body;
    j["compensations"] = {{"distinct", s.compensations.distinct},
                          {"total", s.compensations.total}};
    return j.dump(2);
}

}  // namespace normcheck
