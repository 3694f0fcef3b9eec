#include "chasekit/analysis.hpp"

#include "chasekit/textio.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <map>
#include <sstream>
#include <unordered_map>

namespace chasekit {

const char* explore_verdict_name(ExploreVerdict v)
{
    switch (v) {
    case ExploreVerdict::AllFinite:
        return "AllFinite";
    case ExploreVerdict::GrowthWitness:
        return "GrowthWitness";
    case ExploreVerdict::BudgetExceeded:
        return "BudgetExceeded";
    }
    return "?";
}

const char* truth_name(Truth t)
{
    switch (t) {
    case Truth::Yes:
        return "Yes";
    case Truth::No:
        return "No";
    case Truth::Unknown:
        return "Unknown";
    }
    return "?";
}

std::string ExplorationReport::label() const
{
    if (verdict != ExploreVerdict::GrowthWitness)
        return explore_verdict_name(verdict);
    return certified ? "non-termination certified"
                     : "unbounded derivation found (fairness not certified)";
}

FactBase ExplorationReport::witness_state(std::size_t i) const
{
    FactBase f = initial;
    for (std::size_t k = 0; k < i && k < witness.size(); ++k)
        f.insert_all(witness[k].added);
    return f;
}

std::vector<Trigger> next_triggers(const std::vector<Rule>& rules, Variant variant,
                                   const FactBase& f, const History& h, bool& aborted,
                                   std::uint64_t hom_node_budget)
{
    aborted = false;
    std::vector<Trigger> out;
    bool have_datalog = false;
    for (auto& t : enumerate_triggers(rules, f)) {
        if (variant.datalog_first && have_datalog && !t.rule->is_datalog())
            continue;
        auto a = check_applicable(variant, t, f, h, hom_node_budget);
        if (a == Applicability::Aborted)
            aborted = true;
        if (a != Applicability::Applicable)
            continue;
        if (variant.datalog_first && t.rule->is_datalog() && !have_datalog) {
            have_datalog = true;
            std::erase_if(out, [](const Trigger& x) { return !x.rule->is_datalog(); });
        }
        out.push_back(std::move(t));
    }
    return out;
}

namespace {

struct State {
    FactBase f;
    History h;
};

Step apply_step(const Trigger& trigger, std::uint64_t serial, State& s)
{
    Trigger t = trigger;
    Step step;
    step.added = apply_trigger(t, serial, s.f, s.h);
    step.rule_id = t.rule->id;
    for (std::size_t i = 0; i < t.match.size(); ++i)
        step.match.emplace_back(t.rule->body_vars[i], t.match[i]);
    step.serial = serial;
    return step;
}

// Isomorphism-invariant key of a search state. The O and SO variants also
// depend on which triggers have fired, so those enter as marker atoms.
std::string state_code(Variant variant, const State& s)
{
    if (variant.kind != VariantKind::O && variant.kind != VariantKind::SO)
        return canonical_code(s.f);
    std::vector<Atom> atoms = s.f.atoms();
    const auto& fired = variant.kind == VariantKind::O ? s.h.fired_o : s.h.fired_so;
    const char* tag = variant.kind == VariantKind::O ? "$O:" : "$S:";
    for (const auto& k : fired) {
        if (k.rule->is_datalog())
            continue;
        atoms.push_back(Atom{Symbol(tag + k.rule->id), k.image});
    }
    canonicalize(atoms);
    return canonical_code(atoms);
}

enum class Stop { None, Growth, Budget };

class Explorer {
public:
    Explorer(const KnowledgeBase& kb, Variant v, const ExploreOptions& o)
        : kb_(kb), variant_(v), opt_(o)
    {
    }

    ExplorationReport run()
    {
        rep_.budget = opt_;
        rep_.initial = kb_.facts;
        // An unbounded prefix only proves fair non-termination for atomic-head
        // rules under the non-equivalent, non-Datalog-first variants.
        rep_.certified = variant_.kind != VariantKind::E && !variant_.datalog_first &&
                         std::all_of(kb_.rules.begin(), kb_.rules.end(),
                                     [](const Rule& r) { return r.is_atomic_head(); });
        State root{kb_.facts, {}};
        std::size_t len = dfs(root, 0);
        switch (stop_) {
        case Stop::None:
            rep_.verdict = ExploreVerdict::AllFinite;
            rep_.max_len = len;
            rep_.nodes = visited_;
            break;
        case Stop::Growth:
            rep_.verdict = ExploreVerdict::GrowthWitness;
            rep_.nodes = visited_;
            rep_.reason = "derivation of length " + std::to_string(rep_.witness.size()) +
                          " exceeds depth bound " + std::to_string(opt_.max_depth);
            break;
        case Stop::Budget:
            rep_.verdict = ExploreVerdict::BudgetExceeded;
            rep_.nodes = visited_;
            rep_.frontier = 0;
            for (auto n : pending_)
                rep_.frontier += n;
            break;
        }
        return rep_;
    }

private:
    const KnowledgeBase& kb_;
    Variant variant_;
    ExploreOptions opt_;
    ExplorationReport rep_;
    std::unordered_map<std::string, std::size_t> memo_;
    std::vector<Step> path_;
    std::vector<std::size_t> pending_;
    std::size_t visited_ = 0;
    Stop stop_ = Stop::None;

    std::vector<Trigger> children(const State& s)
    {
        bool aborted = false;
        auto ts = next_triggers(kb_.rules, variant_, s.f, s.h, aborted, opt_.hom_node_budget);
        if (aborted) {
            stop_ = Stop::Budget;
            rep_.reason = "homomorphism budget exhausted during an applicability check";
        }
        return ts;
    }

    void growth_from(State s, std::size_t remaining)
    {
        // Follow children whose memoised length drops by one per step until
        // the path is longer than the depth bound.
        while (path_.size() <= opt_.max_depth) {
            auto ts = children(s);
            bool moved = false;
            for (const auto& t : ts) {
                State c = s;
                Step st = apply_step(t, path_.size() + 1, c);
                auto it = memo_.find(state_code(variant_, c));
                if (it != memo_.end() && it->second + 1 == remaining) {
                    path_.push_back(std::move(st));
                    s = std::move(c);
                    --remaining;
                    moved = true;
                    break;
                }
            }
            if (!moved)
                throw Error("explorer: inconsistent memo while rebuilding a growth witness");
        }
        rep_.witness = path_;
        stop_ = Stop::Growth;
    }

    std::size_t dfs(State& s, std::size_t depth)
    {
        std::string code;
        if (opt_.dedup) {
            code = state_code(variant_, s);
            auto it = memo_.find(code);
            if (it != memo_.end()) {
                ++rep_.dedup_hits;
                if (depth + it->second > opt_.max_depth)
                    growth_from(s, it->second);
                return it->second;
            }
        }
        if (++visited_ > opt_.max_nodes) {
            stop_ = Stop::Budget;
            rep_.reason = "state budget of " + std::to_string(opt_.max_nodes) + " exceeded";
            --visited_;
            pending_.push_back(1);
            return 0;
        }
        auto ts = children(s);
        if (stop_ != Stop::None)
            return 0;
        if (ts.empty()) {
            if (opt_.dedup)
                memo_.emplace(code, 0);
            return 0;
        }
        if (depth == opt_.max_depth) {
            State c = s;
            path_.push_back(apply_step(ts.front(), depth + 1, c));
            rep_.witness = path_;
            stop_ = Stop::Growth;
            return 1;
        }
        ++rep_.expanded;
        std::size_t best = 0;
        pending_.push_back(ts.size());
        for (const auto& t : ts) {
            --pending_.back();
            State c = s;
            path_.push_back(apply_step(t, depth + 1, c));
            std::size_t l = dfs(c, depth + 1);
            if (stop_ != Stop::None)
                return 0;
            path_.pop_back();
            best = std::max(best, l + 1);
        }
        pending_.pop_back();
        if (opt_.dedup)
            memo_.emplace(code, best);
        return best;
    }
};

} // namespace

ExplorationReport explore_all(const KnowledgeBase& kb, Variant variant,
                              const ExploreOptions& options)
{
    if (options.max_depth == 0)
        throw BudgetError("explore: max_depth must be positive");
    return Explorer(kb, variant, options).run();
}

// --- find_terminating -------------------------------------------------------

namespace {

class Finder {
public:
    Finder(const KnowledgeBase& kb, Variant v, const FindOptions& o) : kb_(kb), variant_(v), opt_(o)
    {
    }

    std::optional<std::vector<Step>> run(FindResult& res)
    {
        for (std::size_t limit = 0; limit <= opt_.max_steps; ++limit) {
            State root{kb_.facts, {}};
            path_.clear();
            if (dfs(root, 0, limit))
                break;
            if (budget_hit_)
                break;
        }
        res.budget_hit = budget_hit_;
        res.nodes = nodes_;
        if (found_)
            return path_;
        return std::nullopt;
    }

private:
    const KnowledgeBase& kb_;
    Variant variant_;
    FindOptions opt_;
    // State code -> largest number of remaining steps already known not to
    // reach a terminal state.
    std::unordered_map<std::string, std::size_t> dead_;
    std::vector<Step> path_;
    std::size_t nodes_ = 0;
    bool budget_hit_ = false;
    bool found_ = false;

    bool dfs(State& s, std::size_t depth, std::size_t limit)
    {
        if (++nodes_ > opt_.max_nodes) {
            budget_hit_ = true;
            return false;
        }
        bool aborted = false;
        auto ts = next_triggers(kb_.rules, variant_, s.f, s.h, aborted, opt_.hom_node_budget);
        if (aborted) {
            budget_hit_ = true;
            return false;
        }
        if (ts.empty()) {
            found_ = true;
            return true;
        }
        if (depth == limit)
            return false;
        std::string code = state_code(variant_, s);
        auto it = dead_.find(code);
        std::size_t left = limit - depth;
        if (it != dead_.end() && it->second >= left)
            return false;
        for (const auto& t : ts) {
            State c = s;
            path_.push_back(apply_step(t, depth + 1, c));
            if (dfs(c, depth + 1, limit))
                return true;
            path_.pop_back();
            if (budget_hit_)
                return false;
        }
        auto& d = dead_[code];
        d = std::max(d, left);
        return false;
    }
};

} // namespace

FindResult find_terminating(const KnowledgeBase& kb, Variant variant, const FindOptions& options)
{
    FindResult res;
    ChaseOptions co;
    co.max_steps = options.max_steps;
    co.hom_node_budget = options.hom_node_budget;
    std::vector<std::pair<std::string, Strategy>> pool{
        {"fifo", Strategy::fifo()}, {"datalog-first", Strategy::datalog_first()}};
    for (std::size_t i = 0; i < options.phased.size(); ++i)
        pool.emplace_back("phased#" + std::to_string(i + 1), Strategy::phased(options.phased[i]));
    for (const auto& [name, s] : pool) {
        auto out = run_chase(kb, variant, s, co);
        if (out.derivation.verdict == Verdict::TerminatedFair) {
            res.derivation = std::move(out.derivation);
            res.found_by = name;
            return res;
        }
    }
    Finder finder(kb, variant, options);
    if (auto steps = finder.run(res)) {
        Derivation d;
        d.initial = kb.facts;
        d.steps = std::move(*steps);
        d.variant = variant;
        d.verdict = Verdict::TerminatedFair;
        res.derivation = std::move(d);
        res.found_by = "search";
    }
    return res;
}

// --- entailment -------------------------------------------------------------

TriState entails(const KnowledgeBase& kb, const Query& q, Variant variant, std::size_t max_steps,
                 const Strategy& strategy)
{
    TriState res;
    if (auto h = find_homomorphism(q, kb.facts)) {
        res.value = Truth::Yes;
        res.witness = std::move(h);
        res.run_verdict = Verdict::TerminatedFair;
        return res;
    }
    ChaseOptions co;
    co.max_steps = max_steps;
    auto out = run_chase(kb, variant, strategy, co, [&](const FactBase& f, const Step&) {
        if (auto h = find_homomorphism(q, f)) {
            res.witness = std::move(h);
            return false;
        }
        return true;
    });
    res.steps = out.derivation.steps.size();
    res.run_verdict = out.derivation.verdict;
    if (res.witness)
        res.value = Truth::Yes;
    else if (out.derivation.verdict == Verdict::TerminatedFair)
        res.value = Truth::No;
    else
        res.value = Truth::Unknown;
    return res;
}

// --- provenance -------------------------------------------------------------

FactBase provenance_normal_form(const Derivation& d)
{
    std::unordered_map<Term, Term, TermHash> rename;
    auto resolve = [&](const Term& t) {
        auto it = rename.find(t);
        return it == rename.end() ? t : it->second;
    };
    for (const auto& step : d.steps) {
        std::string prefix = step.rule_id + "#" + std::to_string(step.serial) + ".";
        std::string origin = step.rule_id + "(";
        for (std::size_t i = 0; i < step.match.size(); ++i) {
            if (i)
                origin += ",";
            origin += resolve(step.match[i].second).text();
        }
        origin += ")";
        for (const auto& a : step.added)
            for (const auto& t : a.args) {
                if (!t.is_null() || rename.count(t))
                    continue;
                const auto& label = t.name.str();
                if (label.compare(0, prefix.size(), prefix) == 0)
                    rename.emplace(t, Term::null(origin + "." + label.substr(prefix.size())));
            }
    }
    std::vector<Atom> atoms;
    for (const auto& a : d.result()) {
        Atom b = a;
        for (auto& t : b.args)
            t = resolve(t);
        atoms.push_back(std::move(b));
    }
    return FactBase(std::move(atoms));
}

// --- fixtures ---------------------------------------------------------------

namespace {

std::string trim(std::string s)
{
    auto issp = [](unsigned char c) { return std::isspace(c); };
    while (!s.empty() && issp(s.back()))
        s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && issp(s[i]))
        ++i;
    return s.substr(i);
}

std::vector<std::string> words(const std::string& s)
{
    std::istringstream in(s);
    std::vector<std::string> out;
    for (std::string w; in >> w;)
        out.push_back(w);
    return out;
}

std::size_t parse_count(const std::string& key, const std::string& v)
{
    try {
        std::size_t pos = 0;
        auto n = std::stoull(v, &pos);
        if (pos != v.size())
            throw FixtureError("");
        return n;
    } catch (const std::exception&) {
        throw FixtureError("bad number for " + key + ": " + v);
    }
}

const char* mode_name(ExpectMode m)
{
    switch (m) {
    case ExpectMode::Forall:
        return "forall";
    case ExpectMode::Exists:
        return "exists";
    case ExpectMode::Run:
        return "run";
    }
    return "?";
}

Expectation parse_expectation(const std::string& value)
{
    auto w = words(value);
    if (w.size() < 3)
        throw FixtureError("expect needs `<variant> <forall|exists|run> <outcome>`: " + value);
    Expectation e;
    e.variant = Variant::parse(w[0]);
    if (w[1] == "forall")
        e.mode = ExpectMode::Forall;
    else if (w[1] == "exists")
        e.mode = ExpectMode::Exists;
    else if (w[1] == "run")
        e.mode = ExpectMode::Run;
    else
        throw FixtureError("unknown expectation mode: " + w[1]);
    e.outcome = w[2];
    static const std::map<ExpectMode, std::vector<std::string>> allowed{
        {ExpectMode::Forall, {"AllFinite", "Growth", "BudgetExceeded"}},
        {ExpectMode::Exists, {"Found", "NotFound"}},
        {ExpectMode::Run, {"TerminatedFair", "TerminatedUnfair", "BudgetExhausted"}}};
    const auto& ok = allowed.at(e.mode);
    if (std::find(ok.begin(), ok.end(), e.outcome) == ok.end())
        throw FixtureError("unknown outcome for " + w[1] + ": " + e.outcome);
    for (std::size_t i = 3; i < w.size(); ++i) {
        if (w[i].rfind("strategy=", 0) == 0)
            e.strategy = w[i].substr(9);
        else
            throw FixtureError("unknown expectation option: " + w[i]);
    }
    if (e.strategy != "fifo" && e.strategy != "datalog-first" && e.strategy != "phased")
        throw FixtureError("unknown strategy: " + e.strategy);
    return e;
}

} // namespace

Fixture parse_fixture(const std::string& text, const std::string& path)
{
    Fixture fx;
    fx.path = path;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        auto l = trim(line);
        if (l.rfind("%@", 0) != 0)
            continue;
        l = trim(l.substr(2));
        auto colon = l.find(':');
        if (colon == std::string::npos)
            throw FixtureError("annotation without key: " + line);
        auto key = trim(l.substr(0, colon));
        auto value = trim(l.substr(colon + 1));
        if (key == "id") {
            fx.id = value;
        } else if (key == "anchor") {
            fx.anchor = fx.anchor.empty() ? value : fx.anchor + " " + value;
        } else if (key == "normalize") {
            fx.normalize = parse_procedure(value);
        } else if (key == "budget") {
            for (const auto& kv : words(value)) {
                auto eq = kv.find('=');
                if (eq == std::string::npos)
                    throw FixtureError("budget entries are key=value: " + kv);
                auto k = kv.substr(0, eq), v = kv.substr(eq + 1);
                if (k == "depth")
                    fx.depth = parse_count(k, v);
                else if (k == "nodes")
                    fx.nodes = parse_count(k, v);
                else if (k == "steps")
                    fx.steps = parse_count(k, v);
                else
                    throw FixtureError("unknown budget key: " + k);
            }
        } else if (key == "phased") {
            std::string lines = value;
            std::replace(lines.begin(), lines.end(), ';', '\n');
            fx.phased.push_back(parse_phases(lines));
        } else if (key == "expect") {
            fx.expectations.push_back(parse_expectation(value));
        } else {
            throw FixtureError("unknown annotation key: " + key);
        }
    }
    if (fx.id.empty())
        throw FixtureError("fixture has no id annotation" + (path.empty() ? "" : ": " + path));
    fx.kb = parse_kb(text);
    if (fx.normalize)
        fx.kb = normalize_kb(*fx.normalize, fx.kb);
    for (const auto& phases : fx.phased)
        for (const auto& p : phases)
            for (const auto& id : p.rules)
                if (!fx.kb.find_rule(id))
                    throw FixtureError(fx.id + ": phase names unknown rule " + id);
    return fx;
}

Fixture load_fixture(const std::string& path)
{
    return parse_fixture(read_text_file(path), path);
}

KnowledgeBase parse_annotated_kb(const std::string& text, std::optional<Procedure>* applied)
{
    auto kb = parse_kb(text);
    std::optional<Procedure> proc;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        auto l = trim(line);
        if (l.rfind("%@", 0) != 0)
            continue;
        l = trim(l.substr(2));
        if (l.rfind("normalize:", 0) == 0)
            proc = parse_procedure(trim(l.substr(10)));
    }
    if (proc)
        kb = normalize_kb(*proc, kb);
    if (applied)
        *applied = proc;
    return kb;
}

KnowledgeBase load_annotated_kb(const std::string& path, std::optional<Procedure>* applied)
{
    return parse_annotated_kb(read_text_file(path), applied);
}

std::vector<Fixture> load_fixtures(const std::string& dir)
{
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir))
        throw FixtureError("not a directory: " + dir);
    std::vector<Fixture> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() != ".erl")
            continue;
        auto text = read_text_file(e.path().string());
        if (text.find("%@ id:") == std::string::npos)
            continue;
        out.push_back(parse_fixture(text, e.path().string()));
    }
    std::sort(out.begin(), out.end(),
              [](const Fixture& a, const Fixture& b) { return a.id < b.id; });
    return out;
}

Variant forall_proxy(Variant v)
{
    if (v.kind == VariantKind::E)
        v.datalog_first = true;
    return v;
}

std::vector<ClassificationRow> classify_fixture(const Fixture& fx)
{
    std::vector<ClassificationRow> rows;
    for (const auto& e : fx.expectations) {
        ClassificationRow row;
        row.fixture = fx.id;
        row.variant = e.variant.name();
        row.expected = std::string(mode_name(e.mode)) + ":" + e.outcome;
        row.depth = fx.depth;
        row.nodes = fx.nodes;
        row.steps = fx.steps;
        std::string observed;
        switch (e.mode) {
        case ExpectMode::Forall: {
            ExploreOptions o;
            o.max_depth = fx.depth;
            o.max_nodes = fx.nodes;
            Variant explored = forall_proxy(e.variant);
            auto rep = explore_all(fx.kb, explored, o);
            if (!(explored == e.variant))
                row.detail = "explored as " + explored.name() + "; ";
            observed = rep.verdict == ExploreVerdict::GrowthWitness
                           ? "Growth"
                           : explore_verdict_name(rep.verdict);
            row.detail += rep.label();
            if (rep.verdict == ExploreVerdict::AllFinite)
                row.detail += " max_len=" + std::to_string(rep.max_len) +
                              " nodes=" + std::to_string(rep.nodes);
            break;
        }
        case ExpectMode::Exists: {
            FindOptions o;
            o.max_steps = fx.steps;
            o.max_nodes = fx.nodes;
            o.phased = fx.phased;
            auto res = find_terminating(fx.kb, e.variant, o);
            observed = res.derivation ? "Found" : "NotFound";
            if (res.derivation)
                row.detail = "length=" + std::to_string(res.derivation->length()) +
                             " via " + res.found_by;
            else
                row.detail = res.budget_hit ? "search budget reached" : "search space exhausted";
            break;
        }
        case ExpectMode::Run: {
            Strategy s = Strategy::fifo();
            if (e.strategy == "datalog-first")
                s = Strategy::datalog_first();
            else if (e.strategy == "phased") {
                if (fx.phased.empty())
                    throw FixtureError(fx.id + ": run with strategy=phased needs a phased line");
                s = Strategy::phased(fx.phased.front());
            }
            ChaseOptions o;
            o.max_steps = fx.steps;
            auto out = run_chase(fx.kb, e.variant, s, o);
            observed = verdict_name(out.derivation.verdict);
            row.detail = "steps=" + std::to_string(out.derivation.steps.size()) +
                         " atoms=" + std::to_string(out.result.size());
            break;
        }
        }
        row.observed = std::string(mode_name(e.mode)) + ":" + observed;
        row.pass = row.observed == row.expected;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<ClassificationRow> classify(const std::vector<Fixture>& fixtures)
{
    std::vector<ClassificationRow> rows;
    for (const auto& f : fixtures) {
        auto r = classify_fixture(f);
        rows.insert(rows.end(), r.begin(), r.end());
    }
    return rows;
}

} // namespace chasekit
