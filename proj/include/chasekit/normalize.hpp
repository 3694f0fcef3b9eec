// Rule normalisation: single-piece decomposition and the one-way and
// two-way atomic decompositions, plus signature restriction.
#pragma once

#include "chasekit/core.hpp"

#include <string>
#include <utility>
#include <vector>

namespace chasekit {

// Connected components of the head under "shares an existential variable",
// each in canonical atom order, sorted by their first atom.
std::vector<std::vector<Atom>> pieces(const Rule& rule);

struct FreshPredicate {
    std::string name;
    std::size_t arity = 0;
    std::string rule_id;
};

enum class Procedure { SinglePiece, OneWay, TwoWay };

Procedure parse_procedure(std::string_view text); // sp | 1ad | 2ad
const char* procedure_name(Procedure p);

struct NormalizeOptions {
    // Leave rules with a single head atom untouched.
    bool skip_atomic = false;
};

struct DecompositionReport {
    Procedure procedure = Procedure::SinglePiece;
    std::vector<Rule> input;
    std::vector<Rule> output;
    std::vector<FreshPredicate> fresh;
    // Input rule id -> ids of the rules it produced.
    std::vector<std::pair<std::string, std::vector<std::string>>> mapping;

    // JSON sidecar: procedure, fresh predicates and the id mapping.
    std::string sidecar_json() const;
};

// Name of the fresh predicate introduced for a rule id.
std::string fresh_predicate_name(const std::string& rule_id);

DecompositionReport single_piece(const std::vector<Rule>& rules, const NormalizeOptions& opt = {});
// Throws FreshNameClash when a fresh name collides with an input predicate
// (including those listed in `reserved`) or with another fresh name.
DecompositionReport one_way(const std::vector<Rule>& rules, const NormalizeOptions& opt = {},
                            const std::vector<Symbol>& reserved = {});
DecompositionReport two_way(const std::vector<Rule>& rules, const NormalizeOptions& opt = {},
                            const std::vector<Symbol>& reserved = {});

DecompositionReport normalize(Procedure proc, const std::vector<Rule>& rules,
                              const NormalizeOptions& opt = {},
                              const std::vector<Symbol>& reserved = {});

// Same facts and queries, rules replaced by their normal form. Fresh names
// are checked against the whole signature of the knowledge base.
KnowledgeBase normalize_kb(Procedure proc, const KnowledgeBase& kb,
                           const NormalizeOptions& opt = {});

FactBase restrict_signature(const FactBase& f, const std::vector<Symbol>& signature);

// Predicates occurring in a rule list.
std::vector<Symbol> rules_signature(const std::vector<Rule>& rules);

} // namespace chasekit
