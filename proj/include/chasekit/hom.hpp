// Homomorphism search between atom sets, plus retractions, isomorphism
// and canonical codes.
#pragma once

#include "chasekit/core.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace chasekit {

// Partial map on non-constant terms. Constants are implicitly fixed.
using Assignment = std::unordered_map<Term, Term, TermHash>;

struct HomOptions {
    // Distinct source terms must get distinct images (constants included).
    bool injective = false;
    // Movable terms may only be mapped to nulls.
    bool nulls_to_nulls = false;
    // Abort after this many search nodes; 0 means unlimited.
    std::uint64_t node_budget = 0;
};

enum class SearchStatus { Found, NotFound, Aborted };

struct HomStats {
    std::uint64_t searches = 0;
    std::uint64_t nodes = 0;
};

// Calls `visit` for every extension of `fixed` mapping `source` into
// `target`, in deterministic order, until it returns false. Every variable
// and every null of `source` not bound by `fixed` is movable.
SearchStatus for_each_homomorphism(const std::vector<Atom>& source, const FactBase& target,
                                   const Assignment& fixed,
                                   const std::function<bool(const Assignment&)>& visit,
                                   const HomOptions& options = {}, HomStats* stats = nullptr);

std::optional<Assignment> find_homomorphism(const std::vector<Atom>& source,
                                            const FactBase& target,
                                            const Assignment& fixed = {},
                                            const HomOptions& options = {},
                                            HomStats* stats = nullptr);

std::size_t count_homomorphisms(const std::vector<Atom>& source, const FactBase& target,
                                const Assignment& fixed = {});

std::vector<Atom> apply_assignment(const std::vector<Atom>& atoms, const Assignment& h);

// True iff some homomorphism whole -> part is the identity on the terms of part.
bool exists_retraction(const FactBase& whole, const FactBase& part);
std::optional<Assignment> find_retraction(const FactBase& whole, const FactBase& part);

// Bijective renaming of nulls mapping one set exactly onto the other.
bool are_isomorphic(const FactBase& a, const FactBase& b);
std::optional<Assignment> find_isomorphism(const FactBase& a, const FactBase& b);

// Injective homomorphism with constants fixed and nulls sent to terms.
bool embeds_injectively(const FactBase& a, const FactBase& b);

// Both directions admit a homomorphism.
bool hom_equivalent(const FactBase& a, const FactBase& b);

// Exact isomorphism invariant: equal codes iff isomorphic sets. Constants are
// rigid, nulls are anonymous.
std::string canonical_code(const FactBase& f);
std::string canonical_code(const std::vector<Atom>& atoms);

} // namespace chasekit
