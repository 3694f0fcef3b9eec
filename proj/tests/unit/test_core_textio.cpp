#include "helpers.hpp"

#include "doctest.h"

#include <algorithm>

using namespace chasekit;
using namespace chasekit::test;

TEST_CASE("frontier is the body/head variable intersection")
{
    auto r6 = rule("R(X,Y) -> exists Z,U. P(X,Z), A(Z), A(U), P(X,Y).");
    CHECK(frontier_of(r6) == std::vector<Term>{v("X"), v("Y")});
    CHECK(r6.existentials == std::vector<Term>{v("U"), v("Z")});
    CHECK(frontier_of(rule("P(X) -> Q(X).")) == std::vector<Term>{v("X")});
    CHECK(frontier_of(rule("A(X) -> exists Z. P(X,Z).")) == std::vector<Term>{v("X")});
}

TEST_CASE("head variables missing from the body become existentials")
{
    auto r = make_rule("r", {make_atom("A", {v("X")})}, {make_atom("P", {v("X"), v("Y")})});
    CHECK(r.existentials == std::vector<Term>{v("Y")});
    CHECK_FALSE(r.is_datalog());
    CHECK(r.is_atomic_head());
}

TEST_CASE("trigger outputs name nulls by rule, serial and variable")
{
    auto k = kb("[R] P(X,Y) -> exists Z. P(Y,Z), P(Z,Y).\nP(a,b).");
    auto ts = enumerate_triggers(k.rules, k.facts);
    REQUIRE(ts.size() == 1);
    auto t1 = ts[0];
    CHECK(t1.image(v("X")) == c("a"));
    CHECK(t1.image(v("Y")) == c("b"));
    t1.serial = 1;
    auto out = trigger_output(t1);
    std::vector<Atom> want{make_atom("P", {c("b"), n("R#1.Z")}), make_atom("P", {n("R#1.Z"), c("b")})};
    canonicalize(want);
    CHECK(out == want);
    CHECK(trigger_output(t1) == out);
    CHECK(support(t1) == std::vector<Atom>{make_atom("P", {c("a"), c("b")})});

    Trigger t2{&k.rules[0], {c("b"), n("R#1.Z")}, 2};
    std::vector<Atom> want2{make_atom("P", {n("R#1.Z"), n("R#2.Z")}),
                            make_atom("P", {n("R#2.Z"), n("R#1.Z")})};
    canonicalize(want2);
    CHECK(trigger_output(t2) == want2);
}

TEST_CASE("Datalog trigger output is the substituted head")
{
    auto k = kb("P(X) -> Q(X).\nP(a).");
    auto ts = enumerate_triggers(k.rules, k.facts);
    REQUIRE(ts.size() == 1);
    CHECK(trigger_output(ts[0]) == std::vector<Atom>{make_atom("Q", {c("a")})});
}

TEST_CASE("fact bases stay canonical and reject variables")
{
    FactBase f;
    CHECK(f.insert(make_atom("P", {c("b"), c("a")})));
    CHECK(f.insert(make_atom("P", {c("a"), c("b")})));
    CHECK_FALSE(f.insert(make_atom("P", {c("a"), c("b")})));
    CHECK(f.atoms().front() == make_atom("P", {c("a"), c("b")}));
    CHECK_THROWS_AS(f.insert(make_atom("P", {v("X"), c("b")})), RuleError);
    f.insert(make_atom("Q", {n("z")}));
    CHECK(f.nulls() == std::vector<Term>{n("z")});
    auto [lo, hi] = f.range(Symbol("P"));
    CHECK(hi - lo == 2);
}

TEST_CASE("variants parse in every documented spelling")
{
    CHECK(Variant::parse("r") == Variant{VariantKind::R, false});
    CHECK(Variant::parse("DF-R") == Variant{VariantKind::R, true});
    CHECK(Variant::parse("dfso") == Variant{VariantKind::SO, true});
    CHECK(Variant::parse("E").name() == "E");
    CHECK(Variant::parse("dfe").name() == "DF-E");
    CHECK_THROWS_AS(Variant::parse("x"), Error);
}

TEST_CASE("knowledge bases reject duplicate ids and arity clashes")
{
    CHECK_THROWS_AS(kb("[r] A(X) -> B(X).\n[r] B(X) -> A(X)."), SyntaxError);
    KnowledgeBase dup;
    dup.rules = {rule("[r] A(X) -> B(X)."), rule("[r] B(X) -> A(X).")};
    CHECK_THROWS_AS(dup.validate(), RuleError);
    CHECK_THROWS_AS(kb("A(X) -> B(X,X).\nB(a)."), ArityError);
    CHECK_THROWS_AS(kb("A(X) -> B(X).\n? A(X,Y)."), ArityError);
}

TEST_CASE("parser reads rules, facts and queries")
{
    auto doc = parse_document("p(X,Y) -> exists Z. p(Y,Z), p(Z,Y).\np(a,b).\n? p(X,X).");
    REQUIRE(doc.rules.size() == 1);
    const auto& r = doc.rules[0];
    CHECK(r.body == std::vector<Atom>{make_atom("p", {v("X"), v("Y")})});
    CHECK(r.head.size() == 2);
    CHECK(r.frontier == std::vector<Term>{v("Y")});
    CHECK(r.existentials == std::vector<Term>{v("Z")});
    CHECK(doc.facts == std::vector<Atom>{make_atom("p", {c("a"), c("b")})});
    REQUIRE(doc.queries.size() == 1);
    CHECK(doc.queries[0] == Query{make_atom("p", {v("X"), v("X")})});
}

TEST_CASE("parser assigns default rule ids and accepts comments and digits")
{
    auto doc = parse_document("% comment\nA(X) -> B(X). % trailing\nA(0).\n[k] B(X) -> C(X).");
    REQUIRE(doc.rules.size() == 2);
    CHECK(doc.rules[1].id == "k");
    CHECK(doc.rules[0].id != doc.rules[1].id);
    CHECK(doc.facts[0].args[0] == c("0"));
}

TEST_CASE("syntax errors carry a position")
{
    try {
        parse_document("P(a,b).\nP(a,.");
        FAIL("expected a syntax error");
    } catch (const SyntaxError& e) {
        CHECK(e.line() == 2);
        CHECK(e.col() == 5);
        CHECK_FALSE(e.expected().empty());
    }
    CHECK_THROWS_AS(parse_document("P(a,b)"), SyntaxError);
    CHECK_THROWS_AS(parse_document("A(X) -> exists Y. B(Y)"), SyntaxError);
}

TEST_CASE("declared existentials may not occur in the body")
{
    CHECK_THROWS_AS(parse_document("P(X,Y) -> exists Y. Q(Y)."), VariableScopeError);
}

TEST_CASE("facts must be ground")
{
    CHECK_THROWS(parse_kb("P(X)."));
}

TEST_CASE("serializer output is canonical and re-parses")
{
    CHECK(serialize_factbase(facts("P(a,b).")) == "P(a,b).\n");
    CHECK(serialize_factbase(FactBase{}).empty());
    auto f = facts("P(b,_R#1.z). P(a,b). P(_R#1.z,b).");
    auto s = serialize_factbase(f);
    CHECK(s == "P(a,b).\nP(b,_R#1.z).\nP(_R#1.z,b).\n");
    CHECK(facts(s) == f);
    const std::string text = "[r1] P(X,Y) -> exists Z. P(Y,Z), P(Z,Y).\nP(a,b).\n? P(b,X), P(X,b).\n";
    CHECK(serialize_kb(kb(text)) == text);
}

TEST_CASE("serialized rules sort body and head atoms")
{
    auto r = rule("[r] S(X), A(X) -> exists Z. Q(Z), P(X,Z).");
    CHECK(serialize_rule(r) == "[r] A(X), S(X) -> exists Z. P(X,Z), Q(Z).");
}

TEST_CASE("every corpus file survives a parse/serialize round trip")
{
    for (const auto& fx : load_fixtures(source_path("corpus"))) {
        CAPTURE(fx.id);
        auto once = serialize_kb(load_kb(fx.path));
        auto twice = serialize_kb(parse_kb(once));
        CHECK(once == twice);
    }
}
