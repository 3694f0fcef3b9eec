// Trigger enumeration, applicability tests, derivations under pluggable
// strategies, Datalog saturation and the breadth-first chase.
#pragma once

#include "chasekit/core.hpp"
#include "chasekit/hom.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_set>
#include <vector>

namespace chasekit {

// Fired-trigger bookkeeping used by the O and SO variants.
struct History {
    std::unordered_set<TriggerKey, TriggerKeyHash> fired_o;  // (rule, body image)
    std::unordered_set<TriggerKey, TriggerKeyHash> fired_so; // (rule, frontier image)

    void record(const Trigger& t);
    bool fired_same_match(const Trigger& t) const;
    bool fired_same_frontier(const Trigger& t) const;
};

struct ChaseStats {
    std::uint64_t steps = 0;
    std::uint64_t triggers_considered = 0;
    std::uint64_t hom_calls = 0;
};

enum class Applicability { Applicable, NotApplicable, Aborted };

// Every (rule, body match) pair, in rule order then canonical match order.
std::vector<Trigger> enumerate_triggers(const std::vector<Rule>& rules, const FactBase& f);
std::vector<Trigger> enumerate_triggers(const Rule& rule, const FactBase& f);

// Triggers of `rule` whose match sends at least one body atom onto an atom
// of `delta`. `f` must already contain `delta`.
std::vector<Trigger> triggers_touching(const Rule& rule, const FactBase& f,
                                       const std::vector<Atom>& delta);

Applicability check_applicable(Variant variant, const Trigger& t, const FactBase& f,
                               const History& h, std::uint64_t node_budget = 0,
                               ChaseStats* stats = nullptr);
// Unbudgeted convenience form.
bool is_applicable(Variant variant, const Trigger& t, const FactBase& f, const History& h);

// True iff `f` satisfies every rule: each trigger's head extends into `f`.
bool satisfies(const std::vector<Rule>& rules, const FactBase& f);
bool satisfies_datalog(const std::vector<Rule>& rules, const FactBase& f);

// Applies a trigger: fixes its serial, adds out(t), records history.
// Returns the atoms that were new.
std::vector<Atom> apply_trigger(Trigger& t, std::uint64_t serial, FactBase& f, History& h);

enum class PhaseMode { Exhaust, Once };

struct Phase {
    std::vector<std::string> rules;
    PhaseMode mode = PhaseMode::Exhaust;
};

struct ScriptedChoice {
    std::string rule_id;
    // Partial match by body-variable name; the first applicable trigger of
    // the rule consistent with it is taken.
    std::vector<std::pair<std::string, Term>> binding;
};

struct Strategy {
    enum class Kind { FIFO, DatalogFirst, Phased, Scripted, Random };
    Kind kind = Kind::FIFO;
    std::vector<Phase> phases;
    std::vector<ScriptedChoice> script;
    std::uint64_t seed = 0;

    static Strategy fifo() { return {}; }
    static Strategy datalog_first();
    static Strategy phased(std::vector<Phase> phases);
    static Strategy scripted(std::vector<ScriptedChoice> script);
    static Strategy random(std::uint64_t seed);

    std::string name() const;
};

// Phase file: one phase per line, `rule,rule,... [exhaust|once]`; '%' and
// '#' start comments.
std::vector<Phase> parse_phases(std::string_view text);
std::vector<Phase> load_phases(const std::string& path);

struct ChaseOptions {
    std::uint64_t max_steps = 1000;
    // Per applicability check; 0 means unlimited.
    std::uint64_t hom_node_budget = 0;
};

struct ChaseOutcome {
    Derivation derivation;
    FactBase result;
    History history;
    ChaseStats stats;
    bool interrupted = false;
};

// Called after every step with the current factbase; returning false stops
// the run (outcome.interrupted is then set).
using StepObserver = std::function<bool(const FactBase&, const Step&)>;

ChaseOutcome run_chase(const KnowledgeBase& kb, Variant variant, const Strategy& strategy,
                       const ChaseOptions& options = {}, const StepObserver& observer = {});

// Least fixpoint of the Datalog rules over f. Throws BudgetError when more
// than max_steps atoms would be added.
FactBase datalog_saturate(const std::vector<Rule>& rules, const FactBase& f,
                          std::uint64_t max_steps = 1000000);

// One breadth-first layer: f plus out(t) for every trigger on f.
FactBase breadth_first_layer(const std::vector<Rule>& rules, const FactBase& f);
// k layers from kb.facts. Nulls are minted once per (rule, match) and the
// label records the layer where the trigger first appeared.
FactBase ch_k(const KnowledgeBase& kb, std::size_t k);

} // namespace chasekit
