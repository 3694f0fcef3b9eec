#include "chasekit/normalize.hpp"

#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <set>

namespace chasekit {

std::vector<std::vector<Atom>> pieces(const Rule& rule)
{
    const auto& head = rule.head;
    std::vector<std::size_t> parent(head.size());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x)
            x = parent[x] = parent[parent[x]];
        return x;
    };
    std::map<Term, std::size_t> owner;
    for (std::size_t i = 0; i < head.size(); ++i)
        for (const auto& t : head[i].args) {
            if (!std::binary_search(rule.existentials.begin(), rule.existentials.end(), t))
                continue;
            auto [it, fresh] = owner.emplace(t, i);
            if (!fresh)
                parent[find(i)] = find(it->second);
        }
    std::map<std::size_t, std::vector<Atom>> groups;
    for (std::size_t i = 0; i < head.size(); ++i)
        groups[find(i)].push_back(head[i]);
    std::vector<std::vector<Atom>> out;
    for (auto& [root, atoms] : groups) {
        canonicalize(atoms);
        out.push_back(std::move(atoms));
    }
    std::sort(out.begin(), out.end(),
              [](const std::vector<Atom>& a, const std::vector<Atom>& b) { return a < b; });
    return out;
}

Procedure parse_procedure(std::string_view text)
{
    if (text == "sp")
        return Procedure::SinglePiece;
    if (text == "1ad")
        return Procedure::OneWay;
    if (text == "2ad")
        return Procedure::TwoWay;
    throw Error("unknown normalisation procedure: " + std::string(text));
}

const char* procedure_name(Procedure p)
{
    switch (p) {
    case Procedure::SinglePiece:
        return "sp";
    case Procedure::OneWay:
        return "1ad";
    case Procedure::TwoWay:
        return "2ad";
    }
    return "?";
}

std::string fresh_predicate_name(const std::string& rule_id)
{
    std::string out = "X__";
    for (char c : rule_id)
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '_') ? c : '_';
    return out;
}

std::vector<Symbol> rules_signature(const std::vector<Rule>& rules)
{
    std::vector<Symbol> out;
    for (const auto& r : rules) {
        for (const auto& a : r.body)
            out.push_back(a.predicate);
        for (const auto& a : r.head)
            out.push_back(a.predicate);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::string DecompositionReport::sidecar_json() const
{
    nlohmann::ordered_json j;
    j["procedure"] = procedure_name(procedure);
    j["fresh_predicates"] = nlohmann::ordered_json::array();
    for (const auto& f : fresh)
        j["fresh_predicates"].push_back(
            {{"name", f.name}, {"arity", f.arity}, {"rule", f.rule_id}});
    nlohmann::ordered_json m = nlohmann::ordered_json::object();
    for (const auto& [id, outs] : mapping)
        m[id] = outs;
    j["mapping"] = m;
    j["input_rules"] = input.size();
    j["output_rules"] = output.size();
    return j.dump(2) + "\n";
}

DecompositionReport single_piece(const std::vector<Rule>& rules, const NormalizeOptions& opt)
{
    DecompositionReport rep;
    rep.procedure = Procedure::SinglePiece;
    rep.input = rules;
    for (const auto& r : rules) {
        std::vector<std::string> ids;
        if (opt.skip_atomic && r.is_atomic_head()) {
            rep.output.push_back(r);
            ids.push_back(r.id);
        } else {
            auto ps = pieces(r);
            for (std::size_t k = 0; k < ps.size(); ++k) {
                std::string id = r.id + ".p" + std::to_string(k + 1);
                rep.output.push_back(make_rule(id, r.body, ps[k]));
                ids.push_back(id);
            }
        }
        rep.mapping.emplace_back(r.id, std::move(ids));
    }
    return rep;
}

namespace {

DecompositionReport atomic(const std::vector<Rule>& rules, const NormalizeOptions& opt,
                           const std::vector<Symbol>& reserved, bool backward)
{
    DecompositionReport rep;
    rep.procedure = backward ? Procedure::TwoWay : Procedure::OneWay;
    rep.input = rules;
    std::set<std::string> taken;
    for (const auto& s : rules_signature(rules))
        taken.insert(s.str());
    for (const auto& s : reserved)
        taken.insert(s.str());
    std::set<std::string> minted;
    for (const auto& r : rules) {
        std::vector<std::string> ids;
        if (opt.skip_atomic && r.is_atomic_head()) {
            rep.output.push_back(r);
            rep.mapping.emplace_back(r.id, std::vector<std::string>{r.id});
            continue;
        }
        std::string name = fresh_predicate_name(r.id);
        if (taken.count(name))
            throw FreshNameClash("fresh predicate " + name + " for rule " + r.id +
                                 " already occurs in the input signature");
        if (!minted.insert(name).second)
            throw FreshNameClash("fresh predicate " + name + " would be introduced twice (rule " +
                                 r.id + ")");
        std::vector<Term> args = r.frontier;
        args.insert(args.end(), r.existentials.begin(), r.existentials.end());
        Atom x{Symbol(name), args};
        rep.fresh.push_back({name, args.size(), r.id});

        std::string gen = r.id + ".x";
        rep.output.push_back(make_rule(gen, r.body, {x}));
        ids.push_back(gen);
        for (std::size_t k = 0; k < r.head.size(); ++k) {
            std::string id = r.id + ".h" + std::to_string(k + 1);
            rep.output.push_back(make_rule(id, {x}, {r.head[k]}));
            ids.push_back(id);
        }
        if (backward) {
            std::string id = r.id + ".back";
            rep.output.push_back(make_rule(id, r.head, {x}));
            ids.push_back(id);
        }
        rep.mapping.emplace_back(r.id, std::move(ids));
    }
    return rep;
}

} // namespace

DecompositionReport one_way(const std::vector<Rule>& rules, const NormalizeOptions& opt,
                            const std::vector<Symbol>& reserved)
{
    return atomic(rules, opt, reserved, false);
}

DecompositionReport two_way(const std::vector<Rule>& rules, const NormalizeOptions& opt,
                            const std::vector<Symbol>& reserved)
{
    return atomic(rules, opt, reserved, true);
}

DecompositionReport normalize(Procedure proc, const std::vector<Rule>& rules,
                              const NormalizeOptions& opt, const std::vector<Symbol>& reserved)
{
    switch (proc) {
    case Procedure::SinglePiece:
        return single_piece(rules, opt);
    case Procedure::OneWay:
        return one_way(rules, opt, reserved);
    case Procedure::TwoWay:
        return two_way(rules, opt, reserved);
    }
    throw Error("unknown normalisation procedure");
}

KnowledgeBase normalize_kb(Procedure proc, const KnowledgeBase& kb, const NormalizeOptions& opt)
{
    KnowledgeBase out;
    out.rules = normalize(proc, kb.rules, opt, kb.signature()).output;
    out.facts = kb.facts;
    out.queries = kb.queries;
    out.validate();
    return out;
}

FactBase restrict_signature(const FactBase& f, const std::vector<Symbol>& signature)
{
    std::vector<Atom> keep;
    for (const auto& a : f)
        if (std::find(signature.begin(), signature.end(), a.predicate) != signature.end())
            keep.push_back(a);
    return FactBase(std::move(keep));
}

} // namespace chasekit
