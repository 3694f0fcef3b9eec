// Derivation-graph exploration, search for terminating derivations, BCQ
// entailment with budgets, and corpus classification.
#pragma once

#include "chasekit/chase.hpp"
#include "chasekit/core.hpp"
#include "chasekit/hom.hpp"
#include "chasekit/normalize.hpp"

#include <optional>
#include <string>
#include <vector>

namespace chasekit {

struct ExploreOptions {
    std::size_t max_depth = 12;
    std::size_t max_nodes = 5000;
    // Merge isomorphic states (canonical codes). Off explores the raw tree.
    bool dedup = true;
    std::uint64_t hom_node_budget = 0;
};

enum class ExploreVerdict { AllFinite, GrowthWitness, BudgetExceeded };

const char* explore_verdict_name(ExploreVerdict v);

struct ExplorationReport {
    ExploreVerdict verdict = ExploreVerdict::AllFinite;
    // AllFinite: longest derivation length and number of states visited.
    std::size_t max_len = 0;
    std::size_t nodes = 0;
    // GrowthWitness: a concrete derivation longer than max_depth.
    FactBase initial;
    std::vector<Step> witness;
    std::string reason;
    bool certified = false;
    // BudgetExceeded: unexpanded children left on the search stack.
    std::size_t frontier = 0;
    // Statistics.
    std::size_t expanded = 0;
    std::size_t dedup_hits = 0;
    ExploreOptions budget;

    // "non-termination certified" or "unbounded derivation found (fairness
    // not certified)" for growth, verdict name otherwise.
    std::string label() const;
    FactBase witness_state(std::size_t i) const;
};

ExplorationReport explore_all(const KnowledgeBase& kb, Variant variant,
                              const ExploreOptions& options = {});

// Triggers that a derivation may apply next from (f, h): the applicable ones,
// restricted to Datalog triggers when the variant is Datalog-first and some
// Datalog trigger is applicable. Sets `aborted` if a check ran out of budget.
std::vector<Trigger> next_triggers(const std::vector<Rule>& rules, Variant variant,
                                   const FactBase& f, const History& h, bool& aborted,
                                   std::uint64_t hom_node_budget = 0);

struct FindOptions {
    std::size_t max_steps = 200;
    std::size_t max_nodes = 20000;
    std::vector<std::vector<Phase>> phased;
    std::uint64_t hom_node_budget = 0;
};

struct FindResult {
    std::optional<Derivation> derivation;
    // Name of the pool entry that succeeded, or "search".
    std::string found_by;
    bool budget_hit = false;
    std::size_t nodes = 0;
};

FindResult find_terminating(const KnowledgeBase& kb, Variant variant,
                            const FindOptions& options = {});

enum class Truth { Yes, No, Unknown };

const char* truth_name(Truth t);

struct TriState {
    Truth value = Truth::Unknown;
    std::optional<Assignment> witness; // set for Yes
    std::size_t steps = 0;
    Verdict run_verdict = Verdict::BudgetExhausted;
};

TriState entails(const KnowledgeBase& kb, const Query& q, Variant variant,
                 std::size_t max_steps, const Strategy& strategy = Strategy::fifo());

// Rewrites every null of a derivation result into a null named after its
// provenance (rule id plus the images of the body variables, resolved
// recursively). Two O-derivations from one KB reach the same provenance
// names whatever order they apply triggers in.
FactBase provenance_normal_form(const Derivation& d);

// --- corpus classification -------------------------------------------------

enum class ExpectMode { Forall, Exists, Run };

struct Expectation {
    Variant variant;
    ExpectMode mode = ExpectMode::Forall;
    std::string outcome; // AllFinite | Growth | BudgetExceeded | Found | NotFound | <Verdict>
    std::string strategy = "fifo"; // run mode only: fifo | datalog-first | phased
};

struct Fixture {
    std::string id;
    std::string anchor;
    std::string path;
    std::optional<Procedure> normalize;
    KnowledgeBase kb;
    std::size_t depth = 12;
    std::size_t nodes = 5000;
    std::size_t steps = 200;
    std::vector<std::vector<Phase>> phased;
    std::vector<Expectation> expectations;
};

// Reads the `%@ key: value` annotations of an .erl document.
Fixture parse_fixture(const std::string& text, const std::string& path = "");
Fixture load_fixture(const std::string& path);
// Knowledge base of a document with its `%@ normalize:` annotation applied,
// if any. `applied` receives the procedure used.
KnowledgeBase parse_annotated_kb(const std::string& text,
                                 std::optional<Procedure>* applied = nullptr);
KnowledgeBase load_annotated_kb(const std::string& path,
                                std::optional<Procedure>* applied = nullptr);
// Every *.erl in `dir` carrying an `%@ id:` annotation, sorted by id.
std::vector<Fixture> load_fixtures(const std::string& dir);

struct ClassificationRow {
    std::string fixture;
    std::string variant;
    std::string expected; // mode:outcome
    std::string observed; // mode:outcome
    std::size_t depth = 0, nodes = 0, steps = 0;
    bool pass = false;
    std::string detail;
};

// Variant whose exploration decides "every fair derivation terminates" for
// `v`. For the equivalent chase this is its Datalog-first form: both have the
// same all-derivations termination class, and the Datalog-first graph has no
// unfair branches that starve Datalog rules.
Variant forall_proxy(Variant v);

std::vector<ClassificationRow> classify_fixture(const Fixture& f);
std::vector<ClassificationRow> classify(const std::vector<Fixture>& fixtures);

} // namespace chasekit
