// Value types shared by every module: symbols, terms, atoms, rules,
// fact bases, knowledge bases, triggers and derivations.
#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace chasekit {

// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
    virtual const char* kind() const noexcept { return "Error"; }
};

#define CHASEKIT_ERROR(Name)                                                  \
    class Name : public Error {                                               \
    public:                                                                   \
        explicit Name(const std::string& what) : Error(what) {}               \
        const char* kind() const noexcept override { return #Name; }          \
    }

CHASEKIT_ERROR(ArityError);
CHASEKIT_ERROR(VariableScopeError);
CHASEKIT_ERROR(RuleError);
CHASEKIT_ERROR(FreshNameClash);
CHASEKIT_ERROR(StrategyError);
CHASEKIT_ERROR(BudgetError);
CHASEKIT_ERROR(InvalidMachine);
CHASEKIT_ERROR(FixtureError);

// Interned string. Equality is pointer equality; ordering is by text.
class Symbol {
public:
    Symbol();
    explicit Symbol(std::string_view text);

    const std::string& str() const noexcept { return *p_; }
    const std::string* ptr() const noexcept { return p_; }

    friend bool operator==(Symbol a, Symbol b) noexcept { return a.p_ == b.p_; }
    friend std::strong_ordering operator<=>(Symbol a, Symbol b) noexcept
    {
        if (a.p_ == b.p_)
            return std::strong_ordering::equal;
        return a.str().compare(b.str()) < 0 ? std::strong_ordering::less
                                            : std::strong_ordering::greater;
    }

private:
    const std::string* p_;
};

enum class TermKind : std::uint8_t { Constant = 0, Null = 1, Variable = 2 };

struct Term {
    TermKind kind = TermKind::Constant;
    Symbol name;

    static Term constant(std::string_view n) { return {TermKind::Constant, Symbol(n)}; }
    static Term null(std::string_view label) { return {TermKind::Null, Symbol(label)}; }
    static Term variable(std::string_view n) { return {TermKind::Variable, Symbol(n)}; }

    bool is_constant() const noexcept { return kind == TermKind::Constant; }
    bool is_null() const noexcept { return kind == TermKind::Null; }
    bool is_variable() const noexcept { return kind == TermKind::Variable; }

    // Surface form: constants and variables print as their name, nulls as `_label`.
    std::string text() const;

    friend bool operator==(const Term& a, const Term& b) noexcept
    {
        return a.kind == b.kind && a.name == b.name;
    }
    friend std::strong_ordering operator<=>(const Term& a, const Term& b) noexcept
    {
        if (a.kind != b.kind)
            return a.kind <=> b.kind;
        return a.name <=> b.name;
    }
};

struct TermHash {
    std::size_t operator()(const Term& t) const noexcept
    {
        return std::hash<const void*>()(t.name.ptr()) * 3u + static_cast<std::size_t>(t.kind);
    }
};

struct Atom {
    Symbol predicate;
    std::vector<Term> args;

    std::size_t arity() const noexcept { return args.size(); }
    bool is_ground() const noexcept;
    std::string text() const;

    friend bool operator==(const Atom& a, const Atom& b) noexcept
    {
        return a.predicate == b.predicate && a.args == b.args;
    }
    friend std::strong_ordering operator<=>(const Atom& a, const Atom& b) noexcept
    {
        if (auto c = a.predicate <=> b.predicate; c != 0)
            return c;
        return std::lexicographical_compare_three_way(a.args.begin(), a.args.end(),
                                                      b.args.begin(), b.args.end());
    }
};

struct AtomHash {
    std::size_t operator()(const Atom& a) const noexcept;
};

Atom make_atom(std::string_view predicate, std::vector<Term> args);

// Sorts and deduplicates an atom list into canonical order.
void canonicalize(std::vector<Atom>& atoms);

// Distinct terms of an atom list, in canonical order.
std::vector<Term> terms_of(const std::vector<Atom>& atoms);

// Finite set of atoms kept in canonical order. Atoms of one predicate are
// contiguous, which gives cheap candidate ranges for matching.
class FactBase {
public:
    using const_iterator = std::vector<Atom>::const_iterator;

    FactBase() = default;
    explicit FactBase(std::vector<Atom> atoms);

    // Returns true if the atom was not present. Throws RuleError on variables.
    bool insert(const Atom& atom);
    // Inserts every atom, returning the ones that were new (in input order).
    std::vector<Atom> insert_all(const std::vector<Atom>& atoms);
    bool contains(const Atom& atom) const;
    bool contains_all(const std::vector<Atom>& atoms) const;

    std::size_t size() const noexcept { return atoms_.size(); }
    bool empty() const noexcept { return atoms_.empty(); }
    const_iterator begin() const noexcept { return atoms_.begin(); }
    const_iterator end() const noexcept { return atoms_.end(); }
    const std::vector<Atom>& atoms() const noexcept { return atoms_; }

    // Atoms with the given predicate.
    std::pair<const_iterator, const_iterator> range(Symbol predicate) const;

    std::vector<Symbol> signature() const;
    std::vector<Term> terms() const;
    std::vector<Term> nulls() const;

    friend bool operator==(const FactBase& a, const FactBase& b) { return a.atoms_ == b.atoms_; }

private:
    std::vector<Atom> atoms_;
};

// Existential rule. Body and head are stored in canonical order; variable
// lists are in canonical variable order.
struct Rule {
    std::string id;
    std::vector<Atom> body;
    std::vector<Atom> head;
    std::vector<Term> body_vars;
    std::vector<Term> frontier;
    std::vector<Term> existentials;
    // Positions of the frontier variables inside body_vars.
    std::vector<std::size_t> frontier_pos;

    bool is_datalog() const noexcept { return existentials.empty(); }
    bool is_atomic_head() const noexcept { return head.size() == 1; }
};

// Builds a rule and checks the variable partition. Head variables missing
// from the body become existentials.
Rule make_rule(std::string id, std::vector<Atom> body, std::vector<Atom> head);

std::vector<Term> frontier_of(const Rule& rule);

using Query = std::vector<Atom>;

struct KnowledgeBase {
    std::vector<Rule> rules;
    FactBase facts;
    std::vector<Query> queries;

    const Rule* find_rule(std::string_view id) const;
    std::size_t rule_index(std::string_view id) const;
    // Throws RuleError on duplicate ids, ArityError on clashing arities.
    void validate() const;
    std::vector<Symbol> signature() const;
};

// Checks arity consistency over rules, facts and queries.
void check_arities(const std::vector<Rule>& rules, const std::vector<Atom>& facts,
                   const std::vector<Query>& queries);

// A rule together with an image for each body variable (aligned with
// rule->body_vars). The serial is fixed when the trigger is applied.
struct Trigger {
    const Rule* rule = nullptr;
    std::vector<Term> match;
    std::uint64_t serial = 0;

    Term image(const Term& var) const;
    std::vector<Term> frontier_image() const;

    friend bool operator==(const Trigger& a, const Trigger& b) noexcept
    {
        return a.rule == b.rule && a.match == b.match;
    }
};

struct TriggerKey {
    const Rule* rule;
    std::vector<Term> image;
    friend bool operator==(const TriggerKey&, const TriggerKey&) = default;
};

struct TriggerKeyHash {
    std::size_t operator()(const TriggerKey& k) const noexcept;
};

std::string null_label(const Rule& rule, std::uint64_t serial, const Term& var);

std::vector<Atom> support(const Trigger& t);
// Head instance; existential z becomes the null `ruleId#serial.z`.
std::vector<Atom> trigger_output(const Trigger& t);
// Same, with existential nulls named by an explicit label function.
std::vector<Atom> trigger_output(const Trigger& t,
                                 const std::function<std::string(const Term&)>& label);

std::string trigger_text(const Trigger& t);

enum class VariantKind { O, SO, R, E };

struct Variant {
    VariantKind kind = VariantKind::R;
    bool datalog_first = false;

    // Accepts o, so, r, e, dfo, dfso, dfr, dfe (case-insensitive, '-' allowed).
    static Variant parse(std::string_view text);
    std::string name() const;

    friend bool operator==(const Variant&, const Variant&) = default;
};

enum class Verdict { TerminatedFair, TerminatedUnfair, BudgetExhausted };

const char* verdict_name(Verdict v);

struct Step {
    std::string rule_id;
    std::vector<std::pair<Term, Term>> match;
    std::uint64_t serial = 0;
    std::vector<Atom> added;
};

struct Derivation {
    FactBase initial;
    std::vector<Step> steps;
    Variant variant;
    Verdict verdict = Verdict::TerminatedFair;

    std::size_t length() const noexcept { return steps.size(); }
    // Factbase after the first i steps.
    FactBase prefix(std::size_t i) const;
    FactBase result() const { return prefix(steps.size()); }
};

} // namespace chasekit
