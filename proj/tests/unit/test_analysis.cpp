#include "helpers.hpp"

#include "doctest.h"

using namespace chasekit;
using namespace chasekit::test;

namespace {

const char* ex1 = "[r1] P(X,Y) -> exists Z. P(Y,Z), P(Z,Y).\nP(a,b).";

const char* t2f = "[r1] A(X) -> R(X,X).\n"
                  "[r2] R(X,Y), S(Y,Z) -> S(X,X).\n"
                  "[r3] A(X), S(X,Y) -> A(Y).\n"
                  "[r4] A(X) -> exists Z. R(X,Z).\n"
                  "[r5] R(X,Y) -> exists Z. S(Y,Z).\n"
                  "A(a).";

} // namespace

TEST_CASE("exploring EX1 under the restricted chase")
{
    auto rep = explore_all(kb(ex1), Variant::parse("r"));
    CHECK(rep.verdict == ExploreVerdict::AllFinite);
    CHECK(rep.max_len == 1);
    CHECK(rep.nodes == 2);
    CHECK(rep.label() == "AllFinite");
}

TEST_CASE("a KB without applicable triggers is trivially finite")
{
    auto rep = explore_all(kb("A(X) -> B(X).\nC(a)."), Variant::parse("r"));
    CHECK(rep.verdict == ExploreVerdict::AllFinite);
    CHECK(rep.max_len == 0);
    CHECK(rep.nodes == 1);
}

TEST_CASE("semi-oblivious exploration of EX1 finds certified growth")
{
    auto rep = explore_all(kb(ex1), Variant::parse("so"));
    REQUIRE(rep.verdict == ExploreVerdict::GrowthWitness);
    CHECK(rep.witness.size() == 13);
    CHECK(rep.certified == false); // the head has two atoms
    CHECK(rep.label() == "unbounded derivation found (fairness not certified)");
    CHECK(rep.witness_state(0) == kb(ex1).facts);
    CHECK(rep.witness_state(13).size() == 27);
}

TEST_CASE("atomic-head growth under R is certified")
{
    auto rep = explore_all(kb("[r] P(X,Y) -> exists Z. P(Y,Z).\nP(a,b)."), Variant::parse("r"));
    REQUIRE(rep.verdict == ExploreVerdict::GrowthWitness);
    CHECK(rep.certified);
    CHECK(rep.label() == "non-termination certified");
}

TEST_CASE("node budget yields BudgetExceeded")
{
    ExploreOptions o;
    o.max_nodes = 3;
    auto rep = explore_all(kb(t2f), Variant::parse("r"), o);
    CHECK(rep.verdict == ExploreVerdict::BudgetExceeded);
    CHECK(rep.frontier > 0);
}

TEST_CASE("deduplication only merges isomorphic states")
{
    auto k = kb("[r] A(X) -> exists Z. P(X,Z).\n[s] B(X) -> exists Z. P(X,Z).\nA(a). B(a).");
    ExploreOptions raw;
    raw.dedup = false;
    auto a = explore_all(k, Variant::parse("o"));
    auto b = explore_all(k, Variant::parse("o"), raw);
    CHECK(a.verdict == ExploreVerdict::AllFinite);
    CHECK(b.verdict == ExploreVerdict::AllFinite);
    CHECK(a.max_len == b.max_len);
    CHECK(a.nodes < b.nodes);
}

TEST_CASE("next_triggers honours Datalog-first")
{
    auto k = kb(t2f);
    bool aborted = false;
    auto f = facts("A(a). R(_u,a).");
    auto all = next_triggers(k.rules, Variant::parse("r"), f, {}, aborted);
    auto df = next_triggers(k.rules, Variant::parse("dfr"), f, {}, aborted);
    CHECK_FALSE(aborted);
    CHECK(df.size() < all.size());
    for (const auto& t : df)
        CHECK(t.rule->is_datalog());
}

TEST_CASE("find_terminating uses the supplied phased strategy")
{
    FindOptions o;
    o.phased.push_back(parse_phases("r3,r4,r5 exhaust\nr2\nr1"));
    auto res = find_terminating(kb(t2f), Variant::parse("r"), o);
    REQUIRE(res.derivation);
    CHECK(res.found_by == "phased#1");
    CHECK(res.derivation->length() == 4);
    CHECK(res.derivation->result().size() == 5);
}

TEST_CASE("find_terminating finds nothing for Datalog-first on the same rules")
{
    FindOptions o;
    o.max_steps = 30;
    o.max_nodes = 3000;
    auto res = find_terminating(kb(t2f), Variant::parse("dfr"), o);
    CHECK_FALSE(res.derivation);
}

TEST_CASE("FIFO already terminates EX1")
{
    auto res = find_terminating(kb(ex1), Variant::parse("r"));
    REQUIRE(res.derivation);
    CHECK(res.found_by == "fifo");
}

TEST_CASE("entailment answers")
{
    auto k = kb("[r1] P(X,Y) -> exists Z. P(Y,Z), P(Z,Y).\nP(a,b).\n? P(X,Y), P(Y,X).\n? Q(X).");
    auto yes = entails(k, k.queries[0], Variant::parse("r"), 100);
    CHECK(yes.value == Truth::Yes);
    REQUIRE(yes.witness);

    auto k0 = kb("P(a,b).\n? Q(X).");
    auto no = entails(k0, k0.queries[0], Variant::parse("r"), 100);
    CHECK(no.value == Truth::No);

    auto k2 = kb("[r1] P(X,Y) -> exists Z. P(Y,Z), P(Z,Y).\nP(a,b).\n? P(X,X).");
    auto unknown = entails(k2, k2.queries[0], Variant::parse("o"), 3);
    CHECK(unknown.value == Truth::Unknown);
    CHECK(std::string(truth_name(unknown.value)) == "Unknown");
}

TEST_CASE("provenance names do not depend on the application order")
{
    auto k = kb("[r] A(X) -> exists Z. P(X,Z).\n[s] P(X,Y) -> exists W. Q(Y,W).\nA(a). A(b).");
    auto a = run_chase(k, Variant::parse("o"), Strategy::fifo());
    auto b = run_chase(k, Variant::parse("o"),
                       Strategy::scripted({{"r", {{"X", c("b")}}},
                                           {"s", {}},
                                           {"r", {{"X", c("a")}}},
                                           {"s", {}}}));
    CHECK(b.derivation.verdict == Verdict::TerminatedFair);
    CHECK(a.result != b.result);
    CHECK(provenance_normal_form(a.derivation) == provenance_normal_form(b.derivation));
}

TEST_CASE("fixture annotations")
{
    auto fx = parse_fixture("%@ id: X1\n%@ anchor: test\n%@ normalize: sp\n"
                            "%@ budget: depth=5 nodes=70 steps=9\n"
                            "%@ phased: r1.p1; r2.p1 once\n"
                            "%@ expect: dfr forall AllFinite\n"
                            "%@ expect: r exists Found\n"
                            "%@ expect: r run TerminatedFair strategy=datalog-first\n"
                            "[r1] A(X) -> B(X), C(X).\n[r2] B(X) -> C(X).\nA(a).\n");
    CHECK(fx.id == "X1");
    CHECK(fx.anchor == "test");
    CHECK(fx.normalize == Procedure::SinglePiece);
    CHECK(fx.kb.rules.size() == 3);
    CHECK(fx.depth == 5);
    CHECK(fx.nodes == 70);
    CHECK(fx.steps == 9);
    REQUIRE(fx.phased.size() == 1);
    CHECK(fx.phased[0].size() == 2);
    REQUIRE(fx.expectations.size() == 3);
    CHECK(fx.expectations[0].variant == Variant::parse("dfr"));
    CHECK(fx.expectations[2].mode == ExpectMode::Run);
    CHECK(fx.expectations[2].strategy == "datalog-first");

    CHECK_THROWS_AS(parse_fixture("%@ id: Y\n%@ expect: r sometimes AllFinite\nA(a)."),
                    FixtureError);
    CHECK_THROWS_AS(parse_fixture("%@ id: Y\n%@ expect: q forall AllFinite\nA(a)."), Error);
    CHECK_THROWS_AS(parse_fixture("%@ id: Y\n%@ budget: depth=x\nA(a)."), FixtureError);
}

TEST_CASE("classification of a small fixture")
{
    auto fx = parse_fixture("%@ id: EX\n%@ expect: r forall AllFinite\n%@ expect: so forall Growth\n"
                            "%@ expect: r exists Found\n%@ expect: o forall AllFinite\n" +
                            std::string(ex1));
    auto rows = classify_fixture(fx);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].pass);
    CHECK(rows[1].pass);
    CHECK(rows[2].pass);
    CHECK_FALSE(rows[3].pass);
    CHECK(rows[3].observed == "forall:Growth");
}

TEST_CASE("the E forall row is decided on the Datalog-first graph")
{
    CHECK(forall_proxy(Variant::parse("e")) == Variant::parse("dfe"));
    CHECK(forall_proxy(Variant::parse("r")) == Variant::parse("r"));
}

TEST_CASE("annotated documents apply their normalisation")
{
    std::optional<Procedure> p;
    auto k = load_annotated_kb(source_path("corpus/T4a_sp.erl"), &p);
    CHECK(p == Procedure::SinglePiece);
    CHECK(k.rules.size() == 3);
    auto plain = load_annotated_kb(source_path("corpus/T4a.erl"), &p);
    CHECK_FALSE(p);
    CHECK(plain.rules.size() == 2);
}
