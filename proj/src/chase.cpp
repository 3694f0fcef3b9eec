#include "chasekit/chase.hpp"

#include "chasekit/textio.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <random>
#include <sstream>
#include <unordered_map>

namespace chasekit {

void History::record(const Trigger& t)
{
    fired_o.insert(TriggerKey{t.rule, t.match});
    fired_so.insert(TriggerKey{t.rule, t.frontier_image()});
}

bool History::fired_same_match(const Trigger& t) const
{
    return fired_o.count(TriggerKey{t.rule, t.match}) > 0;
}

bool History::fired_same_frontier(const Trigger& t) const
{
    return fired_so.count(TriggerKey{t.rule, t.frontier_image()}) > 0;
}

namespace {

Trigger make_trigger(const Rule& rule, const Assignment& h)
{
    Trigger t;
    t.rule = &rule;
    t.match.reserve(rule.body_vars.size());
    for (const auto& v : rule.body_vars)
        t.match.push_back(h.at(v));
    return t;
}

bool match_less(const Trigger& a, const Trigger& b) { return a.match < b.match; }

} // namespace

std::vector<Trigger> enumerate_triggers(const Rule& rule, const FactBase& f)
{
    std::vector<Trigger> out;
    for_each_homomorphism(rule.body, f, {}, [&](const Assignment& h) {
        out.push_back(make_trigger(rule, h));
        return true;
    });
    std::sort(out.begin(), out.end(), match_less);
    return out;
}

std::vector<Trigger> enumerate_triggers(const std::vector<Rule>& rules, const FactBase& f)
{
    std::vector<Trigger> out;
    for (const auto& r : rules) {
        auto ts = enumerate_triggers(r, f);
        out.insert(out.end(), ts.begin(), ts.end());
    }
    return out;
}

std::vector<Trigger> triggers_touching(const Rule& rule, const FactBase& f,
                                       const std::vector<Atom>& delta)
{
    std::unordered_set<TriggerKey, TriggerKeyHash> seen;
    std::vector<Trigger> out;
    for (const auto& b : rule.body) {
        for (const auto& d : delta) {
            if (!(d.predicate == b.predicate) || d.args.size() != b.args.size())
                continue;
            Assignment fixed;
            bool ok = true;
            for (std::size_t p = 0; p < b.args.size() && ok; ++p) {
                const Term& x = b.args[p];
                if (!x.is_variable()) {
                    ok = x == d.args[p];
                    continue;
                }
                auto [it, fresh] = fixed.emplace(x, d.args[p]);
                ok = fresh || it->second == d.args[p];
            }
            if (!ok)
                continue;
            for_each_homomorphism(rule.body, f, fixed, [&](const Assignment& h) {
                Trigger t = make_trigger(rule, h);
                if (seen.insert(TriggerKey{t.rule, t.match}).second)
                    out.push_back(std::move(t));
                return true;
            });
        }
    }
    std::sort(out.begin(), out.end(), match_less);
    return out;
}

namespace {

std::vector<Term> fresh_nulls(const Trigger& t)
{
    std::vector<Term> out;
    for (const auto& z : t.rule->existentials)
        out.push_back(Term::null(null_label(*t.rule, t.serial, z)));
    std::sort(out.begin(), out.end());
    return out;
}

// Atoms of f null-connected to the given seed atoms (seed atoms excluded).
std::vector<Atom> connected_part(const FactBase& f, const std::vector<Atom>& seed)
{
    std::unordered_map<Term, std::vector<std::size_t>, TermHash> by_null;
    const auto& atoms = f.atoms();
    for (std::size_t i = 0; i < atoms.size(); ++i)
        for (const auto& t : atoms[i].args)
            if (t.is_null()) {
                auto& v = by_null[t];
                if (v.empty() || v.back() != i)
                    v.push_back(i);
            }
    std::unordered_set<Term, TermHash> visited;
    std::vector<Term> work;
    for (const auto& a : seed)
        for (const auto& t : a.args)
            if (t.is_null() && visited.insert(t).second)
                work.push_back(t);
    std::vector<bool> taken(atoms.size(), false);
    std::vector<Atom> out;
    while (!work.empty()) {
        Term n = work.back();
        work.pop_back();
        auto it = by_null.find(n);
        if (it == by_null.end())
            continue;
        for (auto i : it->second) {
            if (taken[i])
                continue;
            taken[i] = true;
            out.push_back(atoms[i]);
            for (const auto& t : atoms[i].args)
                if (t.is_null() && visited.insert(t).second)
                    work.push_back(t);
        }
    }
    return out;
}

Applicability from_status(SearchStatus s)
{
    switch (s) {
    case SearchStatus::Found:
        return Applicability::NotApplicable;
    case SearchStatus::NotFound:
        return Applicability::Applicable;
    case SearchStatus::Aborted:
        break;
    }
    return Applicability::Aborted;
}

} // namespace

Applicability check_applicable(Variant variant, const Trigger& trigger, const FactBase& f,
                               const History& h, std::uint64_t node_budget, ChaseStats* stats)
{
    if (stats)
        ++stats->triggers_considered;
    Trigger t = trigger;
    t.serial = 0;
    auto out = trigger_output(t);
    if (f.contains_all(out))
        return Applicability::NotApplicable;
    if (t.rule->is_datalog())
        return Applicability::Applicable;
    switch (variant.kind) {
    case VariantKind::O:
        return h.fired_same_match(t) ? Applicability::NotApplicable : Applicability::Applicable;
    case VariantKind::SO:
        return h.fired_same_frontier(t) ? Applicability::NotApplicable
                                        : Applicability::Applicable;
    case VariantKind::R:
    case VariantKind::E:
        break;
    }
    HomOptions opt;
    opt.node_budget = node_budget;
    HomStats hs;
    auto fresh = fresh_nulls(t);
    Assignment fixed;
    for (const auto& x : terms_of(out))
        if (x.is_null() && !std::binary_search(fresh.begin(), fresh.end(), x))
            fixed[x] = x;
    auto status = for_each_homomorphism(
        out, f, fixed, [](const Assignment&) { return false; }, opt, &hs);
    if (stats)
        ++stats->hom_calls;
    auto r = from_status(status);
    if (variant.kind == VariantKind::R || r != Applicability::Applicable)
        return r;
    std::vector<Atom> source = out;
    auto part = connected_part(f, out);
    source.insert(source.end(), part.begin(), part.end());
    canonicalize(source);
    status = for_each_homomorphism(
        source, f, {}, [](const Assignment&) { return false; }, opt, &hs);
    if (stats)
        ++stats->hom_calls;
    return from_status(status);
}

bool is_applicable(Variant variant, const Trigger& t, const FactBase& f, const History& h)
{
    return check_applicable(variant, t, f, h) == Applicability::Applicable;
}

bool satisfies(const std::vector<Rule>& rules, const FactBase& f)
{
    for (const auto& r : rules)
        for (const auto& t : enumerate_triggers(r, f)) {
            Assignment fixed;
            for (std::size_t i = 0; i < r.body_vars.size(); ++i)
                fixed[r.body_vars[i]] = t.match[i];
            if (!find_homomorphism(r.head, f, fixed))
                return false;
        }
    return true;
}

bool satisfies_datalog(const std::vector<Rule>& rules, const FactBase& f)
{
    for (const auto& r : rules) {
        if (!r.is_datalog())
            continue;
        for (const auto& t : enumerate_triggers(r, f))
            if (!f.contains_all(trigger_output(t)))
                return false;
    }
    return true;
}

std::vector<Atom> apply_trigger(Trigger& t, std::uint64_t serial, FactBase& f, History& h)
{
    t.serial = serial;
    auto added = f.insert_all(trigger_output(t));
    h.record(t);
    return added;
}

Strategy Strategy::datalog_first()
{
    Strategy s;
    s.kind = Kind::DatalogFirst;
    return s;
}

Strategy Strategy::phased(std::vector<Phase> phases)
{
    Strategy s;
    s.kind = Kind::Phased;
    s.phases = std::move(phases);
    return s;
}

Strategy Strategy::scripted(std::vector<ScriptedChoice> script)
{
    Strategy s;
    s.kind = Kind::Scripted;
    s.script = std::move(script);
    return s;
}

Strategy Strategy::random(std::uint64_t seed)
{
    Strategy s;
    s.kind = Kind::Random;
    s.seed = seed;
    return s;
}

std::string Strategy::name() const
{
    switch (kind) {
    case Kind::FIFO:
        return "fifo";
    case Kind::DatalogFirst:
        return "datalog-first";
    case Kind::Phased:
        return "phased";
    case Kind::Scripted:
        return "scripted";
    case Kind::Random:
        return "random:" + std::to_string(seed);
    }
    return "?";
}

std::vector<Phase> parse_phases(std::string_view text)
{
    std::vector<Phase> out;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto c = line.find_first_of("%#"); c != std::string::npos)
            line.erase(c);
        std::istringstream ls(line);
        std::string ids, mode, extra;
        if (!(ls >> ids))
            continue;
        Phase p;
        if (ls >> mode) {
            if (mode == "exhaust")
                p.mode = PhaseMode::Exhaust;
            else if (mode == "once")
                p.mode = PhaseMode::Once;
            else
                throw StrategyError("phase line " + std::to_string(lineno) +
                                    ": unknown mode '" + mode + "'");
            if (ls >> extra)
                throw StrategyError("phase line " + std::to_string(lineno) +
                                    ": unexpected '" + extra + "'");
        }
        std::istringstream is(ids);
        std::string id;
        while (std::getline(is, id, ','))
            if (!id.empty())
                p.rules.push_back(id);
        if (p.rules.empty())
            throw StrategyError("phase line " + std::to_string(lineno) + ": no rule ids");
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<Phase> load_phases(const std::string& path)
{
    return parse_phases(read_text_file(path));
}

namespace {

class Engine {
public:
    Engine(const KnowledgeBase& kb, Variant variant, const ChaseOptions& opt,
           const StepObserver& observer)
        : kb_(kb), variant_(variant), opt_(opt), observer_(observer)
    {
        f_ = kb.facts;
        out_.derivation.initial = kb.facts;
        out_.derivation.variant = variant;
    }

    ChaseOutcome run(const Strategy& s)
    {
        switch (s.kind) {
        case Strategy::Kind::FIFO:
        case Strategy::Kind::DatalogFirst:
            run_queue(s.kind == Strategy::Kind::DatalogFirst || variant_.datalog_first);
            break;
        case Strategy::Kind::Phased:
            run_phased(s.phases);
            break;
        case Strategy::Kind::Scripted:
            run_scripted(s.script);
            break;
        case Strategy::Kind::Random:
            run_random(s.seed);
            break;
        }
        out_.result = f_;
        out_.stats.steps = out_.derivation.steps.size();
        return std::move(out_);
    }

private:
    const KnowledgeBase& kb_;
    Variant variant_;
    ChaseOptions opt_;
    const StepObserver& observer_;
    FactBase f_;
    History hist_;
    ChaseOutcome out_;
    std::unordered_set<TriggerKey, TriggerKeyHash> blocked_;

    bool budget_left() const { return out_.derivation.steps.size() < opt_.max_steps; }

    Applicability check(const Trigger& t)
    {
        // Non-applicability is permanent for Datalog triggers and for the O,
        // SO and R variants, since F and the history only grow. The E check
        // depends on the null-connected part of F, which is not monotone.
        bool stable = t.rule->is_datalog() || variant_.kind != VariantKind::E;
        TriggerKey key{t.rule, t.match};
        if (stable && blocked_.count(key))
            return Applicability::NotApplicable;
        auto a = check_applicable(variant_, t, f_, hist_, opt_.hom_node_budget, &out_.stats);
        if (stable && a == Applicability::NotApplicable)
            blocked_.insert(std::move(key));
        return a;
    }

    std::size_t rule_pos(const Rule* r) const
    {
        return static_cast<std::size_t>(r - kb_.rules.data());
    }

    bool canonical_less(const Trigger& a, const Trigger& b) const
    {
        if (a.rule != b.rule)
            return rule_pos(a.rule) < rule_pos(b.rule);
        return a.match < b.match;
    }

    // Returns false when the observer asks to stop.
    bool apply(Trigger t, std::vector<Atom>* added_out = nullptr)
    {
        std::uint64_t serial = out_.derivation.steps.size() + 1;
        auto added = apply_trigger(t, serial, f_, hist_);
        Step step;
        step.rule_id = t.rule->id;
        for (std::size_t i = 0; i < t.match.size(); ++i)
            step.match.emplace_back(t.rule->body_vars[i], t.match[i]);
        step.serial = serial;
        step.added = added;
        out_.derivation.steps.push_back(step);
        if (added_out)
            *added_out = std::move(added);
        if (observer_ && !observer_(f_, out_.derivation.steps.back())) {
            out_.interrupted = true;
            out_.derivation.verdict = Verdict::BudgetExhausted;
            return false;
        }
        return true;
    }

    // First applicable trigger among `rules` (all rules when empty) in
    // canonical order. Aborted checks are reported through `aborted`.
    std::optional<Trigger> first_applicable(const std::vector<const Rule*>& rules, bool& aborted,
                                            bool datalog_only = false)
    {
        aborted = false;
        auto scan = [&](const Rule& r) -> std::optional<Trigger> {
            if (datalog_only && !r.is_datalog())
                return std::nullopt;
            for (auto& t : enumerate_triggers(r, f_)) {
                auto a = check(t);
                if (a == Applicability::Applicable)
                    return t;
                if (a == Applicability::Aborted)
                    aborted = true;
            }
            return std::nullopt;
        };
        if (rules.empty()) {
            for (const auto& r : kb_.rules)
                if (auto t = scan(r))
                    return t;
        } else {
            for (const auto* r : rules)
                if (auto t = scan(*r))
                    return t;
        }
        return std::nullopt;
    }

    // Verdict once the strategy stops choosing.
    void finish(bool strategy_exhausted)
    {
        bool aborted = false;
        auto t = first_applicable({}, aborted);
        if (t || aborted)
            out_.derivation.verdict =
                strategy_exhausted ? Verdict::TerminatedUnfair : Verdict::BudgetExhausted;
        else
            out_.derivation.verdict = Verdict::TerminatedFair;
        if (aborted && !t)
            out_.derivation.verdict = Verdict::BudgetExhausted;
    }

    void run_queue(bool datalog_priority)
    {
        std::deque<Trigger> dl, ndl;
        std::vector<Trigger> dormant;
        std::unordered_set<TriggerKey, TriggerKeyHash> seen;
        auto enqueue = [&](std::vector<Trigger> ts) {
            std::sort(ts.begin(), ts.end(),
                      [&](const Trigger& a, const Trigger& b) { return canonical_less(a, b); });
            for (auto& t : ts) {
                if (!seen.insert(TriggerKey{t.rule, t.match}).second)
                    continue;
                if (datalog_priority && t.rule->is_datalog())
                    dl.push_back(std::move(t));
                else
                    ndl.push_back(std::move(t));
            }
        };
        enqueue(enumerate_triggers(kb_.rules, f_));
        bool keeps_dormant = variant_.kind == VariantKind::E;
        for (;;) {
            if (!budget_left()) {
                bool pending = false;
                for (auto* q : {&dl, &ndl})
                    for (const auto& t : *q)
                        if (!pending && check(t) != Applicability::NotApplicable)
                            pending = true;
                for (const auto& t : dormant)
                    if (!pending && check(t) != Applicability::NotApplicable)
                        pending = true;
                out_.derivation.verdict =
                    pending ? Verdict::BudgetExhausted : Verdict::TerminatedFair;
                return;
            }
            std::optional<Trigger> chosen;
            if (!dl.empty() || !ndl.empty()) {
                auto& q = dl.empty() ? ndl : dl;
                Trigger t = std::move(q.front());
                q.pop_front();
                auto a = check(t);
                if (a == Applicability::Aborted) {
                    out_.derivation.verdict = Verdict::BudgetExhausted;
                    return;
                }
                if (a == Applicability::NotApplicable) {
                    if (keeps_dormant && !t.rule->is_datalog())
                        dormant.push_back(std::move(t));
                    continue;
                }
                chosen = std::move(t);
            } else {
                for (std::size_t i = 0; i < dormant.size(); ++i) {
                    auto a = check(dormant[i]);
                    if (a == Applicability::Aborted) {
                        out_.derivation.verdict = Verdict::BudgetExhausted;
                        return;
                    }
                    if (a == Applicability::Applicable) {
                        chosen = dormant[i];
                        dormant.erase(dormant.begin() + static_cast<std::ptrdiff_t>(i));
                        break;
                    }
                }
                if (!chosen) {
                    out_.derivation.verdict = Verdict::TerminatedFair;
                    return;
                }
            }
            std::vector<Atom> added;
            if (!apply(*chosen, &added))
                return;
            std::vector<Trigger> fresh;
            for (const auto& r : kb_.rules) {
                auto ts = triggers_touching(r, f_, added);
                fresh.insert(fresh.end(), ts.begin(), ts.end());
            }
            enqueue(std::move(fresh));
        }
    }

    const Rule& rule_by_id(const std::string& id) const
    {
        const Rule* r = kb_.find_rule(id);
        if (!r)
            throw StrategyError("unknown rule id in strategy: " + id);
        return *r;
    }

    // Under a Datalog-first variant, applies one pending Datalog trigger.
    // Returns 1 if a step was taken, 0 if Datalog is saturated, -1 to stop.
    int datalog_step()
    {
        bool aborted = false;
        auto d = first_applicable({}, aborted, true);
        if (!d)
            return 0;
        return apply(*d) ? 1 : -1;
    }

    void run_phased(const std::vector<Phase>& phases)
    {
        for (const auto& phase : phases) {
            std::vector<const Rule*> rules;
            for (const auto& id : phase.rules)
                rules.push_back(&rule_by_id(id));
            for (;;) {
                if (!budget_left()) {
                    finish(false);
                    return;
                }
                bool aborted = false;
                auto t = first_applicable(rules, aborted);
                if (aborted) {
                    out_.derivation.verdict = Verdict::BudgetExhausted;
                    return;
                }
                if (!t)
                    break;
                if (variant_.datalog_first && !t->rule->is_datalog()) {
                    int r = datalog_step();
                    if (r < 0)
                        return;
                    if (r > 0)
                        continue;
                }
                if (!apply(*t))
                    return;
                if (phase.mode == PhaseMode::Once)
                    break;
            }
        }
        finish(true);
    }

    void run_scripted(const std::vector<ScriptedChoice>& script)
    {
        for (std::size_t k = 0; k < script.size(); ++k) {
            const auto& choice = script[k];
            if (!budget_left()) {
                finish(false);
                return;
            }
            const Rule& rule = rule_by_id(choice.rule_id);
            std::vector<std::pair<std::size_t, Term>> want;
            for (const auto& [name, term] : choice.binding) {
                Term v = Term::variable(name);
                auto it = std::lower_bound(rule.body_vars.begin(), rule.body_vars.end(), v);
                if (it == rule.body_vars.end() || !(*it == v))
                    throw StrategyError("script step " + std::to_string(k + 1) + ": " + name +
                                        " is not a body variable of " + rule.id);
                want.emplace_back(static_cast<std::size_t>(it - rule.body_vars.begin()), term);
            }
            bool any = false;
            std::optional<Trigger> chosen;
            for (auto& t : enumerate_triggers(rule, f_)) {
                bool consistent = std::all_of(want.begin(), want.end(), [&](const auto& w) {
                    return t.match[w.first] == w.second;
                });
                if (!consistent)
                    continue;
                any = true;
                if (check(t) == Applicability::Applicable) {
                    chosen = std::move(t);
                    break;
                }
            }
            std::string where = "script step " + std::to_string(k + 1) + " (" + rule.id + ")";
            if (!any)
                throw StrategyError(where + ": no such trigger on the current factbase");
            if (!chosen)
                throw StrategyError(where + ": trigger is not " + variant_.name() +
                                    "-applicable");
            if (variant_.datalog_first && !rule.is_datalog()) {
                bool aborted = false;
                if (first_applicable({}, aborted, true))
                    throw StrategyError(where + ": violates Datalog-first (a Datalog trigger "
                                                "is still applicable)");
            }
            if (!apply(*chosen))
                return;
        }
        finish(true);
    }

    void run_random(std::uint64_t seed)
    {
        std::mt19937_64 rng(seed);
        for (;;) {
            if (!budget_left()) {
                finish(false);
                return;
            }
            std::vector<Trigger> dl, all;
            for (auto& t : enumerate_triggers(kb_.rules, f_)) {
                auto a = check(t);
                if (a == Applicability::Aborted) {
                    out_.derivation.verdict = Verdict::BudgetExhausted;
                    return;
                }
                if (a != Applicability::Applicable)
                    continue;
                if (t.rule->is_datalog())
                    dl.push_back(t);
                all.push_back(std::move(t));
            }
            auto& pool = (variant_.datalog_first && !dl.empty()) ? dl : all;
            if (pool.empty()) {
                out_.derivation.verdict = Verdict::TerminatedFair;
                return;
            }
            std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
            if (!apply(pool[pick(rng)]))
                return;
        }
    }
};

} // namespace

ChaseOutcome run_chase(const KnowledgeBase& kb, Variant variant, const Strategy& strategy,
                       const ChaseOptions& options, const StepObserver& observer)
{
    Engine e(kb, variant, options, observer);
    return e.run(strategy);
}

FactBase datalog_saturate(const std::vector<Rule>& rules, const FactBase& f,
                          std::uint64_t max_steps)
{
    FactBase out = f;
    std::uint64_t added = 0;
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& r : rules) {
            if (!r.is_datalog())
                continue;
            for (const auto& t : enumerate_triggers(r, out))
                for (const auto& a : trigger_output(t))
                    if (out.insert(a)) {
                        changed = true;
                        if (++added > max_steps)
                            throw BudgetError("Datalog saturation exceeded " +
                                              std::to_string(max_steps) + " steps");
                    }
        }
    }
    return out;
}

namespace {

using NullMemo = std::unordered_map<TriggerKey, std::string, TriggerKeyHash>;

FactBase layer(const std::vector<Rule>& rules, const FactBase& f, std::size_t depth, NullMemo& memo)
{
    FactBase next = f;
    std::size_t fresh = 0;
    for (const auto& t : enumerate_triggers(rules, f)) {
        TriggerKey key{t.rule, t.match};
        auto it = memo.find(key);
        if (it == memo.end())
            it = memo
                     .emplace(key, t.rule->id + "#L" + std::to_string(depth) + "." +
                                       std::to_string(++fresh))
                     .first;
        const std::string& prefix = it->second;
        next.insert_all(
            trigger_output(t, [&](const Term& z) { return prefix + "." + z.name.str(); }));
    }
    return next;
}

} // namespace

FactBase breadth_first_layer(const std::vector<Rule>& rules, const FactBase& f)
{
    NullMemo memo;
    return layer(rules, f, 1, memo);
}

FactBase ch_k(const KnowledgeBase& kb, std::size_t k)
{
    NullMemo memo;
    FactBase f = kb.facts;
    for (std::size_t i = 1; i <= k; ++i)
        f = layer(kb.rules, f, i, memo);
    return f;
}

} // namespace chasekit
