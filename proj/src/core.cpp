#include "chasekit/core.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <mutex>
#include <unordered_set>

namespace chasekit {

namespace {

struct InternTable {
    std::mutex mu;
    std::unordered_set<std::string> strings;
};

InternTable& table()
{
    static InternTable t;
    return t;
}

const std::string* intern(std::string_view text)
{
    auto& t = table();
    std::lock_guard<std::mutex> lock(t.mu);
    auto it = t.strings.emplace(text).first;
    return &*it;
}

} // namespace

Symbol::Symbol() : p_(intern("")) {}
Symbol::Symbol(std::string_view text) : p_(intern(text)) {}

std::string Term::text() const
{
    if (is_null())
        return "_" + name.str();
    return name.str();
}

bool Atom::is_ground() const noexcept
{
    return std::none_of(args.begin(), args.end(), [](const Term& t) { return t.is_variable(); });
}

std::string Atom::text() const
{
    std::string out = predicate.str();
    if (args.empty())
        return out;
    out += '(';
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i)
            out += ',';
        out += args[i].text();
    }
    out += ')';
    return out;
}

std::size_t AtomHash::operator()(const Atom& a) const noexcept
{
    std::size_t h = std::hash<const void*>()(a.predicate.ptr());
    TermHash th;
    for (const auto& t : a.args)
        h = h * 1000003u ^ th(t);
    return h;
}

Atom make_atom(std::string_view predicate, std::vector<Term> args)
{
    return Atom{Symbol(predicate), std::move(args)};
}

void canonicalize(std::vector<Atom>& atoms)
{
    std::sort(atoms.begin(), atoms.end());
    atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
}

std::vector<Term> terms_of(const std::vector<Atom>& atoms)
{
    std::vector<Term> out;
    for (const auto& a : atoms)
        out.insert(out.end(), a.args.begin(), a.args.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

FactBase::FactBase(std::vector<Atom> atoms)
{
    for (const auto& a : atoms)
        if (!a.is_ground())
            throw RuleError("fact base atom contains a variable: " + a.text());
    atoms_ = std::move(atoms);
    canonicalize(atoms_);
}

bool FactBase::insert(const Atom& atom)
{
    if (!atom.is_ground())
        throw RuleError("fact base atom contains a variable: " + atom.text());
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), atom);
    if (it != atoms_.end() && *it == atom)
        return false;
    atoms_.insert(it, atom);
    return true;
}

std::vector<Atom> FactBase::insert_all(const std::vector<Atom>& atoms)
{
    std::vector<Atom> added;
    for (const auto& a : atoms)
        if (insert(a))
            added.push_back(a);
    return added;
}

bool FactBase::contains(const Atom& atom) const
{
    return std::binary_search(atoms_.begin(), atoms_.end(), atom);
}

bool FactBase::contains_all(const std::vector<Atom>& atoms) const
{
    return std::all_of(atoms.begin(), atoms.end(), [&](const Atom& a) { return contains(a); });
}

std::pair<FactBase::const_iterator, FactBase::const_iterator> FactBase::range(Symbol predicate) const
{
    auto lo = std::lower_bound(atoms_.begin(), atoms_.end(), predicate,
                               [](const Atom& a, Symbol p) { return a.predicate < p; });
    auto hi = std::upper_bound(lo, atoms_.end(), predicate,
                               [](Symbol p, const Atom& a) { return p < a.predicate; });
    return {lo, hi};
}

std::vector<Symbol> FactBase::signature() const
{
    std::vector<Symbol> out;
    for (const auto& a : atoms_)
        if (out.empty() || !(out.back() == a.predicate))
            out.push_back(a.predicate);
    return out;
}

std::vector<Term> FactBase::terms() const { return terms_of(atoms_); }

std::vector<Term> FactBase::nulls() const
{
    auto all = terms();
    std::vector<Term> out;
    for (const auto& t : all)
        if (t.is_null())
            out.push_back(t);
    return out;
}

namespace {

std::vector<Term> vars_of(const std::vector<Atom>& atoms)
{
    std::vector<Term> out;
    for (const auto& t : terms_of(atoms))
        if (t.is_variable())
            out.push_back(t);
    return out;
}

} // namespace

Rule make_rule(std::string id, std::vector<Atom> body, std::vector<Atom> head)
{
    if (body.empty())
        throw RuleError("rule " + id + " has an empty body");
    if (head.empty())
        throw RuleError("rule " + id + " has an empty head");
    for (const auto* side : {&body, &head})
        for (const auto& a : *side)
            for (const auto& t : a.args)
                if (t.is_null())
                    throw RuleError("rule " + id + " contains a null: " + a.text());
    Rule r;
    r.id = std::move(id);
    r.body = std::move(body);
    r.head = std::move(head);
    canonicalize(r.body);
    canonicalize(r.head);
    r.body_vars = vars_of(r.body);
    auto head_vars = vars_of(r.head);
    std::set_intersection(r.body_vars.begin(), r.body_vars.end(), head_vars.begin(),
                          head_vars.end(), std::back_inserter(r.frontier));
    std::set_difference(head_vars.begin(), head_vars.end(), r.body_vars.begin(),
                        r.body_vars.end(), std::back_inserter(r.existentials));
    for (const auto& f : r.frontier)
        r.frontier_pos.push_back(static_cast<std::size_t>(
            std::lower_bound(r.body_vars.begin(), r.body_vars.end(), f) - r.body_vars.begin()));
    return r;
}

std::vector<Term> frontier_of(const Rule& rule) { return rule.frontier; }

const Rule* KnowledgeBase::find_rule(std::string_view id) const
{
    for (const auto& r : rules)
        if (r.id == id)
            return &r;
    return nullptr;
}

std::size_t KnowledgeBase::rule_index(std::string_view id) const
{
    for (std::size_t i = 0; i < rules.size(); ++i)
        if (rules[i].id == id)
            return i;
    throw RuleError("unknown rule id: " + std::string(id));
}

void check_arities(const std::vector<Rule>& rules, const std::vector<Atom>& facts,
                   const std::vector<Query>& queries)
{
    std::map<std::string, std::size_t> seen;
    auto visit = [&](const Atom& a) {
        auto [it, fresh] = seen.emplace(a.predicate.str(), a.arity());
        if (!fresh && it->second != a.arity())
            throw ArityError("predicate " + a.predicate.str() + " used with arity " +
                             std::to_string(a.arity()) + ", expected " +
                             std::to_string(it->second));
    };
    for (const auto& r : rules) {
        for (const auto& a : r.body)
            visit(a);
        for (const auto& a : r.head)
            visit(a);
    }
    for (const auto& a : facts)
        visit(a);
    for (const auto& q : queries)
        for (const auto& a : q)
            visit(a);
}

void KnowledgeBase::validate() const
{
    std::unordered_set<std::string> ids;
    for (const auto& r : rules)
        if (!ids.insert(r.id).second)
            throw RuleError("duplicate rule id: " + r.id);
    check_arities(rules, facts.atoms(), queries);
}

std::vector<Symbol> KnowledgeBase::signature() const
{
    std::vector<Symbol> out = facts.signature();
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

Term Trigger::image(const Term& var) const
{
    auto& vars = rule->body_vars;
    auto it = std::lower_bound(vars.begin(), vars.end(), var);
    if (it == vars.end() || !(*it == var))
        throw RuleError("variable " + var.text() + " is not a body variable of " + rule->id);
    return match[static_cast<std::size_t>(it - vars.begin())];
}

std::vector<Term> Trigger::frontier_image() const
{
    std::vector<Term> out;
    out.reserve(rule->frontier_pos.size());
    for (auto p : rule->frontier_pos)
        out.push_back(match[p]);
    return out;
}

std::size_t TriggerKeyHash::operator()(const TriggerKey& k) const noexcept
{
    std::size_t h = std::hash<const void*>()(k.rule);
    TermHash th;
    for (const auto& t : k.image)
        h = h * 1000003u ^ th(t);
    return h;
}

std::string null_label(const Rule& rule, std::uint64_t serial, const Term& var)
{
    return rule.id + "#" + std::to_string(serial) + "." + var.name.str();
}

namespace {

Term substitute(const Trigger& t, const Term& x,
                const std::function<std::string(const Term&)>* label)
{
    if (!x.is_variable())
        return x;
    auto& vars = t.rule->body_vars;
    auto it = std::lower_bound(vars.begin(), vars.end(), x);
    if (it != vars.end() && *it == x)
        return t.match[static_cast<std::size_t>(it - vars.begin())];
    if (label)
        return Term::null((*label)(x));
    return Term::null(null_label(*t.rule, t.serial, x));
}

std::vector<Atom> instantiate(const Trigger& t, const std::vector<Atom>& atoms,
                              const std::function<std::string(const Term&)>* label)
{
    std::vector<Atom> out;
    out.reserve(atoms.size());
    for (const auto& a : atoms) {
        Atom b{a.predicate, {}};
        b.args.reserve(a.args.size());
        for (const auto& x : a.args)
            b.args.push_back(substitute(t, x, label));
        out.push_back(std::move(b));
    }
    canonicalize(out);
    return out;
}

} // namespace

std::vector<Atom> support(const Trigger& t) { return instantiate(t, t.rule->body, nullptr); }

std::vector<Atom> trigger_output(const Trigger& t) { return instantiate(t, t.rule->head, nullptr); }

std::vector<Atom> trigger_output(const Trigger& t,
                                 const std::function<std::string(const Term&)>& label)
{
    return instantiate(t, t.rule->head, &label);
}

std::string trigger_text(const Trigger& t)
{
    std::string out = t.rule->id + "{";
    for (std::size_t i = 0; i < t.match.size(); ++i) {
        if (i)
            out += ",";
        out += t.rule->body_vars[i].text() + "->" + t.match[i].text();
    }
    return out + "}";
}

Variant Variant::parse(std::string_view text)
{
    std::string s;
    for (char c : text)
        if (c != '-' && c != '_')
            s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    Variant v;
    if (s.rfind("df", 0) == 0) {
        v.datalog_first = true;
        s = s.substr(2);
    }
    if (s == "o")
        v.kind = VariantKind::O;
    else if (s == "so")
        v.kind = VariantKind::SO;
    else if (s == "r")
        v.kind = VariantKind::R;
    else if (s == "e")
        v.kind = VariantKind::E;
    else
        throw Error("unknown chase variant: " + std::string(text));
    return v;
}

std::string Variant::name() const
{
    static const char* names[] = {"O", "SO", "R", "E"};
    std::string base = names[static_cast<int>(kind)];
    return datalog_first ? "DF-" + base : base;
}

const char* verdict_name(Verdict v)
{
    switch (v) {
    case Verdict::TerminatedFair:
        return "TerminatedFair";
    case Verdict::TerminatedUnfair:
        return "TerminatedUnfair";
    case Verdict::BudgetExhausted:
        return "BudgetExhausted";
    }
    return "?";
}

FactBase Derivation::prefix(std::size_t i) const
{
    FactBase f = initial;
    for (std::size_t k = 0; k < i && k < steps.size(); ++k)
        f.insert_all(steps[k].added);
    return f;
}

} // namespace chasekit
