#include "chasekit/report.hpp"

#include "chasekit/textio.hpp"

#include <cstdlib>
#include <map>

namespace chasekit {

Json step_json(const Step& s)
{
    Json m = Json::object();
    for (const auto& [var, term] : s.match)
        m[var.text()] = term.text();
    Json added = Json::array();
    for (const auto& a : s.added)
        added.push_back(serialize_atom(a));
    return Json{{"serial", s.serial}, {"rule", s.rule_id}, {"match", m}, {"added", added}};
}

Json derivation_json(const std::vector<Step>& steps)
{
    Json out = Json::array();
    for (const auto& s : steps)
        out.push_back(step_json(s));
    return out;
}

Json atoms_json(const FactBase& f)
{
    Json out = Json::array();
    for (const auto& a : f)
        out.push_back(serialize_atom(a));
    return out;
}

Strategy parse_strategy(const std::string& text)
{
    if (text == "fifo")
        return Strategy::fifo();
    if (text == "datalog-first")
        return Strategy::datalog_first();
    if (text.rfind("phased:", 0) == 0)
        return Strategy::phased(load_phases(text.substr(7)));
    if (text.rfind("random:", 0) == 0) {
        auto v = text.substr(7);
        char* end = nullptr;
        auto seed = std::strtoull(v.c_str(), &end, 10);
        if (v.empty() || *end)
            throw StrategyError("bad random seed: " + v);
        return Strategy::random(seed);
    }
    throw StrategyError("unknown strategy: " + text);
}

Json make_report(const std::string& command, Json inputs)
{
    return Json{{"command", command},   {"inputs", std::move(inputs)},
                {"verdict", nullptr},   {"steps", 0},
                {"atoms", 0},           {"derivation", nullptr},
                {"stats", Json::object()}};
}

Json run_report(const KnowledgeBase& kb, Json inputs, Variant variant, const Strategy& strategy,
                const ChaseOptions& options, bool trace)
{
    inputs["variant"] = variant.name();
    inputs["strategy"] = strategy.name();
    inputs["max_steps"] = options.max_steps;
    auto out = run_chase(kb, variant, strategy, options);
    Json r = make_report("run", std::move(inputs));
    r["verdict"] = verdict_name(out.derivation.verdict);
    r["steps"] = out.derivation.steps.size();
    r["atoms"] = out.result.size();
    if (trace)
        r["derivation"] = derivation_json(out.derivation.steps);
    r["stats"] = Json{{"triggers_considered", out.stats.triggers_considered},
                      {"hom_calls", out.stats.hom_calls},
                      {"result", atoms_json(out.result)}};
    return r;
}

Json explore_report(const KnowledgeBase& kb, Json inputs, Variant variant,
                    const ExploreOptions& options)
{
    inputs["variant"] = variant.name();
    inputs["max_depth"] = options.max_depth;
    inputs["max_nodes"] = options.max_nodes;
    inputs["dedup"] = options.dedup;
    auto rep = explore_all(kb, variant, options);
    Json r = make_report("explore", std::move(inputs));
    r["verdict"] = explore_verdict_name(rep.verdict);
    Json stats{{"label", rep.label()},
               {"nodes", rep.nodes},
               {"expanded", rep.expanded},
               {"dedup_hits", rep.dedup_hits}};
    switch (rep.verdict) {
    case ExploreVerdict::AllFinite:
        r["steps"] = rep.max_len;
        stats["max_len"] = rep.max_len;
        break;
    case ExploreVerdict::GrowthWitness:
        r["steps"] = rep.witness.size();
        r["atoms"] = rep.witness_state(rep.witness.size()).size();
        r["derivation"] = derivation_json(rep.witness);
        stats["certified"] = rep.certified;
        stats["reason"] = rep.reason;
        break;
    case ExploreVerdict::BudgetExceeded:
        stats["frontier"] = rep.frontier;
        stats["reason"] = rep.reason;
        break;
    }
    r["stats"] = stats;
    return r;
}

Json search_report(const KnowledgeBase& kb, Json inputs, Variant variant,
                   const FindOptions& options)
{
    inputs["variant"] = variant.name();
    inputs["max_steps"] = options.max_steps;
    inputs["max_nodes"] = options.max_nodes;
    auto res = find_terminating(kb, variant, options);
    Json r = make_report("search", std::move(inputs));
    r["verdict"] = res.derivation ? "Found" : "NotFound";
    Json stats{{"budget_hit", res.budget_hit}, {"nodes", res.nodes}};
    if (res.derivation) {
        r["steps"] = res.derivation->length();
        auto result = res.derivation->result();
        r["atoms"] = result.size();
        r["derivation"] = derivation_json(res.derivation->steps);
        stats["found_by"] = res.found_by;
        stats["result"] = atoms_json(result);
    }
    r["stats"] = stats;
    return r;
}

Json entails_report(const KnowledgeBase& kb, Json inputs, std::size_t query_index,
                    Variant variant, std::size_t max_steps, const Strategy& strategy)
{
    if (query_index >= kb.queries.size())
        throw Error("query index " + std::to_string(query_index) + " out of range (" +
                    std::to_string(kb.queries.size()) + " queries)");
    const auto& q = kb.queries[query_index];
    inputs["query"] = serialize_query(q);
    inputs["variant"] = variant.name();
    inputs["strategy"] = strategy.name();
    inputs["max_steps"] = max_steps;
    auto res = entails(kb, q, variant, max_steps, strategy);
    Json r = make_report("entails", std::move(inputs));
    r["verdict"] = truth_name(res.value);
    r["steps"] = res.steps;
    Json stats{{"run_verdict", verdict_name(res.run_verdict)}};
    if (res.witness) {
        std::map<std::string, std::string> sorted;
        for (const auto& [k, v] : *res.witness)
            if (k.is_variable())
                sorted[k.text()] = v.text();
        stats["answer"] = sorted;
    }
    r["stats"] = stats;
    return r;
}

Json normalize_report(const KnowledgeBase& kb, Json inputs, Procedure proc,
                      const NormalizeOptions& options)
{
    inputs["procedure"] = procedure_name(proc);
    inputs["skip_atomic"] = options.skip_atomic;
    auto rep = normalize(proc, kb.rules, options, kb.signature());
    KnowledgeBase out;
    out.rules = rep.output;
    out.facts = kb.facts;
    out.queries = kb.queries;
    out.validate();
    Json r = make_report("normalize", std::move(inputs));
    r["verdict"] = "ok";
    r["atoms"] = kb.facts.size();
    r["stats"] = Json{{"rules_in", rep.input.size()},
                      {"rules_out", rep.output.size()},
                      {"sidecar", Json::parse(rep.sidecar_json())},
                      {"output", serialize_kb(out)}};
    return r;
}

Json classify_report(const std::vector<Fixture>& fixtures, Json inputs)
{
    auto rows = classify(fixtures);
    Json r = make_report("classify", std::move(inputs));
    Json jrows = Json::array();
    std::size_t passed = 0;
    for (const auto& row : rows) {
        passed += row.pass;
        jrows.push_back(Json{{"fixture", row.fixture},
                             {"variant", row.variant},
                             {"expected", row.expected},
                             {"observed", row.observed},
                             {"budget",
                              {{"depth", row.depth}, {"nodes", row.nodes}, {"steps", row.steps}}},
                             {"pass", row.pass},
                             {"detail", row.detail}});
    }
    r["verdict"] = passed == rows.size() ? "pass" : "fail";
    r["stats"] = Json{{"fixtures", fixtures.size()},
                      {"rows", rows.size()},
                      {"passed", passed},
                      {"table", jrows}};
    return r;
}

Json tm_report(const std::string& mode, const TuringMachine& m, Json inputs, std::size_t len)
{
    Json r = make_report("tm", std::move(inputs));
    auto e = encode(m);
    if (mode == "encode") {
        auto kb = e.full_kb();
        r["atoms"] = kb.facts.size();
        r["stats"] = Json{{"rules_w", e.rules_w.size()},
                          {"rules_m", e.rules_m.size()},
                          {"seed", e.seed.size()},
                          {"predicates", e.predicates},
                          {"output", serialize_kb(kb)}};
    } else if (mode == "tape") {
        auto kb = simulation_kb(m, len);
        r["atoms"] = kb.facts.size();
        r["stats"] = Json{{"rules", kb.rules.size()}, {"output", serialize_kb(kb)}};
    } else {
        throw Error("unknown tm mode: " + mode);
    }
    r["verdict"] = "ok";
    return r;
}

Json error_report(const std::string& command, Json inputs, const std::exception& e)
{
    Json r = make_report(command, std::move(inputs));
    r["verdict"] = "error";
    Json err{{"kind", "Error"}, {"message", e.what()}};
    if (auto ce = dynamic_cast<const Error*>(&e))
        err["kind"] = ce->kind();
    if (auto se = dynamic_cast<const SyntaxError*>(&e)) {
        err["line"] = se->line();
        err["col"] = se->col();
        err["expected"] = se->expected();
    }
    r["stats"] = Json{{"error", err}};
    return r;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

} // namespace chasekit
