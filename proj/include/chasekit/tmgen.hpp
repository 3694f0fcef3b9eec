// Compiles a deterministic Turing machine over a unary input alphabet into
// existential rules: tape creation with an emergency brake, and simulation.
#pragma once

#include "chasekit/chase.hpp"
#include "chasekit/core.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace chasekit {

enum class Move { Left, Right };

struct Transition {
    std::string next;
    std::string write;
    Move move = Move::Right;
};

struct TuringMachine {
    std::string initial;
    std::string accept;
    std::string reject;
    std::string blank;
    // Input symbol of the unary alphabet.
    std::string input = "1";
    std::vector<std::string> states;   // sorted, includes the halting states
    std::vector<std::string> alphabet; // sorted, includes input and blank
    std::map<std::pair<std::string, std::string>, Transition> delta;

    bool is_halting(const std::string& q) const { return q == accept || q == reject; }
    // Throws InvalidMachine unless delta is total on non-halting states.
    void validate() const;
};

// Machine file: headers `initial:`, `accept:`, `reject:`, `blank:` and one
// transition per line, `q a -> r b L|R`. '%' and '#' start comments.
TuringMachine parse_machine(std::string_view text);
TuringMachine load_machine(const std::string& path);

std::string content_predicate(const std::string& symbol);
std::string head_predicate(const std::string& state);

struct Encoding {
    std::vector<Rule> rules_w;
    std::vector<Rule> rules_m;
    FactBase seed;
    // Predicate name -> arity over every predicate of the encoding.
    std::map<std::string, std::size_t> predicates;

    KnowledgeBase tape_creation_kb() const; // rules_w over the seed
    KnowledgeBase full_kb() const;          // rules_w and rules_m over the seed
};

Encoding encode(const TuringMachine& m);

// Direct encoding of the input word 1^n: cells c0..cn.
FactBase tape_factbase(std::size_t n, const std::string& blank = "blank",
                       const std::string& input = "1");

// Simulation rules (rules_m plus the head-initialisation rule) over a tape.
KnowledgeBase simulation_kb(const TuringMachine& m, std::size_t n);

// Phased strategy for tape creation: the chain rule once n-1 times, the brake
// once, then the remaining creation rules to exhaustion.
Strategy tape_generation_strategy(std::size_t n);

} // namespace chasekit
