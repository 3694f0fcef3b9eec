#include "chasekit/tmgen.hpp"

#include "chasekit/textio.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace chasekit {

namespace {

bool is_name(const std::string& s)
{
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
               return std::isalnum(c) || c == '_';
           });
}

std::string strip_comment(const std::string& line)
{
    auto p = line.find_first_of("%#");
    return p == std::string::npos ? line : line.substr(0, p);
}

} // namespace

void TuringMachine::validate() const
{
    if (initial.empty())
        throw InvalidMachine("machine has no initial state");
    if (accept.empty() || reject.empty())
        throw InvalidMachine("machine needs accept and reject states");
    if (accept == reject)
        throw InvalidMachine("accept and reject states must differ");
    if (blank.empty())
        throw InvalidMachine("machine has no blank symbol");
    if (blank == input)
        throw InvalidMachine("blank must differ from the input symbol");
    for (const auto& q : states)
        if (!is_name(q))
            throw InvalidMachine("state name must be alphanumeric: " + q);
    for (const auto& c : alphabet)
        if (!is_name(c))
            throw InvalidMachine("symbol must be alphanumeric: " + c);
    for (const auto& entry : delta)
        if (is_halting(entry.first.first))
            throw InvalidMachine("transition out of halting state " + entry.first.first);
    for (const auto& q : states) {
        if (is_halting(q))
            continue;
        for (const auto& c : alphabet)
            if (!delta.count({q, c}))
                throw InvalidMachine("delta is not total: no transition for (" + q + ", " + c +
                                     ")");
    }
}

TuringMachine parse_machine(std::string_view text)
{
    TuringMachine m;
    std::set<std::string> states, symbols;
    std::istringstream in{std::string(text)};
    std::size_t lineno = 0;
    for (std::string raw; std::getline(in, raw);) {
        ++lineno;
        std::string line = strip_comment(raw);
        std::istringstream ls(line);
        std::vector<std::string> w;
        for (std::string x; ls >> x;)
            w.push_back(x);
        if (w.empty())
            continue;
        auto where = " (line " + std::to_string(lineno) + ")";
        if (w[0].back() == ':') {
            if (w.size() != 2)
                throw InvalidMachine("header needs exactly one value" + where);
            auto key = w[0].substr(0, w[0].size() - 1);
            if (key == "initial")
                m.initial = w[1];
            else if (key == "accept")
                m.accept = w[1];
            else if (key == "reject")
                m.reject = w[1];
            else if (key == "blank")
                m.blank = w[1];
            else if (key == "input")
                m.input = w[1];
            else
                throw InvalidMachine("unknown header " + key + where);
            continue;
        }
        if (w.size() != 6 || w[2] != "->")
            throw InvalidMachine("expected `q a -> r b L|R`" + where);
        Transition t{w[3], w[4], Move::Right};
        if (w[5] == "L")
            t.move = Move::Left;
        else if (w[5] != "R")
            throw InvalidMachine("direction must be L or R" + where);
        if (!m.delta.emplace(std::make_pair(w[0], w[1]), t).second)
            throw InvalidMachine("nondeterministic: two transitions for (" + w[0] + ", " + w[1] +
                                 ")" + where);
        states.insert(w[0]);
        states.insert(w[3]);
        symbols.insert(w[1]);
        symbols.insert(w[4]);
    }
    for (const auto* q : {&m.initial, &m.accept, &m.reject})
        if (!q->empty())
            states.insert(*q);
    if (!m.blank.empty())
        symbols.insert(m.blank);
    symbols.insert(m.input);
    m.states.assign(states.begin(), states.end());
    m.alphabet.assign(symbols.begin(), symbols.end());
    m.validate();
    return m;
}

TuringMachine load_machine(const std::string& path)
{
    return parse_machine(read_text_file(path));
}

std::string content_predicate(const std::string& symbol) { return "Content_" + symbol; }
std::string head_predicate(const std::string& state) { return "HeadState_" + state; }

namespace {

std::string tape_creation_text(const TuringMachine& m)
{
    const auto one = content_predicate(m.input);
    const auto blank = content_predicate(m.blank);
    std::ostringstream o;
    o << "[w_chain] B(b), NF(Z,X), R(X) -> exists Y. NF(X,Y), R(Y), D(Y,b), NF(Y,b).\n"
      << "[w_brake] B(b) -> R(b).\n"
      << "[w_final] NF(X,Y) -> exists Z. F(Y,Z).\n"
      << "[w_end] F(X,Y) -> exists Z. D(Y,Z), End(Z), " << blank << "(Z).\n"
      << "[w_trav_nf] NF(T,X), NF(X,Y), D(Y,Z) -> exists U. Nxt(U,Z), D(X,U), " << one
      << "(U).\n"
      << "[w_trav_f] NF(T,X), F(X,Y), D(Y,Z) -> exists U. Nxt(U,Z), D(X,U), " << one << "(U).\n"
      << "[w_first] Int(X), NF(X,Y), D(Y,Z) -> exists U. Nxt(U,Z), D(X,U), " << one
      << "(U), Frst(U).\n"
      << "[w_head] Frst(X) -> " << head_predicate(m.initial) << "(X).\n";
    return o.str();
}

std::string simulation_text(const TuringMachine& m)
{
    std::ostringstream o;
    o << "[m_nxtplus] Nxt(X,Y) -> NxtPlus(X,Y).\n"
      << "[m_trans] NxtPlus(X,Y), NxtPlus(Y,Z) -> NxtPlus(X,Z).\n"
      << "[m_stp_nxt] Nxt(X,Y), Stp(X,Z), Stp(Y,W) -> Nxt(Z,W).\n"
      << "[m_extend] End(X), Stp(X,Z) -> exists V. Nxt(Z,V), " << content_predicate(m.blank)
      << "(V), End(V).\n";
    for (const auto& q : m.states) {
        if (m.is_halting(q))
            continue;
        for (const auto& c : m.alphabet) {
            auto h = head_predicate(q), k = content_predicate(c);
            o << "[m_inert_r_" << q << "_" << c << "] " << h << "(X), NxtPlus(X,Y), " << k
              << "(Y) -> exists Z. Stp(Y,Z), " << k << "(Z).\n";
            o << "[m_inert_l_" << q << "_" << c << "] " << h << "(X), NxtPlus(Y,X), " << k
              << "(Y) -> exists Z. Stp(Y,Z), " << k << "(Z).\n";
        }
    }
    for (const auto& [key, t] : m.delta) {
        const auto& [q, a] = key;
        auto h = head_predicate(q), ka = content_predicate(a);
        o << "[m_write_" << q << "_" << a << "] " << h << "(X), " << ka
          << "(X) -> exists Z. Stp(X,Z), " << content_predicate(t.write) << "(Z).\n";
        o << "[m_move_" << q << "_" << a << "] " << h << "(X), " << ka << "(X), Stp(X,Z), "
          << (t.move == Move::Right ? "Nxt(Z,W)" : "Nxt(W,Z)") << " -> "
          << head_predicate(t.next) << "(W).\n";
    }
    return o.str();
}

std::string seed_text(const TuringMachine& m)
{
    const auto one = content_predicate(m.input);
    const auto blank = content_predicate(m.blank);
    std::ostringstream o;
    // Words of length 1 and 0.
    o << "Frst(c0_1). " << one << "(c0_1). Nxt(c0_1,c1_1). End(c1_1). " << blank << "(c1_1).\n"
      << "Frst(c0_0). End(c0_0). " << blank << "(c0_0).\n";
    // Start of the non-final chain.
    o << "Int(a). NF(a,nf1). R(nf1). NF(nf1,b). D(nf1,b).\n";
    // Brake.
    o << "B(b). F(b,b). NF(b,b). D(b,b). Nxt(b,b). Lst(b). Frst(b).\n";
    // Brake atoms for the simulation predicates.
    for (const auto& c : m.alphabet)
        o << content_predicate(c) << "(b). ";
    o << "End(b). Stp(b,b). NxtPlus(b,b).\n";
    return o.str();
}

void collect(std::map<std::string, std::size_t>& out, const std::vector<Atom>& atoms)
{
    for (const auto& a : atoms)
        out.emplace(a.predicate.str(), a.arity());
}

} // namespace

KnowledgeBase Encoding::tape_creation_kb() const
{
    KnowledgeBase kb;
    kb.rules = rules_w;
    kb.facts = seed;
    kb.validate();
    return kb;
}

KnowledgeBase Encoding::full_kb() const
{
    KnowledgeBase kb;
    kb.rules = rules_w;
    kb.rules.insert(kb.rules.end(), rules_m.begin(), rules_m.end());
    kb.facts = seed;
    kb.validate();
    return kb;
}

Encoding encode(const TuringMachine& m)
{
    m.validate();
    Encoding e;
    e.rules_w = parse_document(tape_creation_text(m)).rules;
    e.rules_m = parse_document(simulation_text(m)).rules;
    e.seed = FactBase(parse_document(seed_text(m)).facts);
    for (const auto* rs : {&e.rules_w, &e.rules_m})
        for (const auto& r : *rs) {
            collect(e.predicates, r.body);
            collect(e.predicates, r.head);
        }
    collect(e.predicates, e.seed.atoms());
    e.full_kb();
    return e;
}

FactBase tape_factbase(std::size_t n, const std::string& blank, const std::string& input)
{
    if (n == 0)
        throw Error("tape length must be positive; the empty word is part of the seed");
    auto cell = [](std::size_t j) { return Term::constant("c" + std::to_string(j)); };
    std::vector<Atom> atoms;
    atoms.push_back(make_atom("Frst", {cell(0)}));
    for (std::size_t j = 0; j < n; ++j) {
        atoms.push_back(make_atom(content_predicate(input), {cell(j)}));
        atoms.push_back(make_atom("Nxt", {cell(j), cell(j + 1)}));
    }
    atoms.push_back(make_atom("End", {cell(n)}));
    atoms.push_back(make_atom(content_predicate(blank), {cell(n)}));
    return FactBase(std::move(atoms));
}

KnowledgeBase simulation_kb(const TuringMachine& m, std::size_t n)
{
    auto e = encode(m);
    KnowledgeBase kb;
    kb.rules = e.rules_m;
    for (const auto& r : e.rules_w)
        if (r.id == "w_head")
            kb.rules.push_back(r);
    kb.facts = tape_factbase(n, m.blank, m.input);
    kb.validate();
    return kb;
}

Strategy tape_generation_strategy(std::size_t n)
{
    if (n < 2)
        throw Error("tape generation strategy needs n >= 2");
    std::vector<Phase> phases;
    for (std::size_t i = 0; i + 1 < n; ++i)
        phases.push_back({{"w_chain"}, PhaseMode::Once});
    phases.push_back({{"w_brake"}, PhaseMode::Once});
    phases.push_back(
        {{"w_final", "w_end", "w_trav_nf", "w_trav_f", "w_first", "w_head"}, PhaseMode::Exhaust});
    return Strategy::phased(std::move(phases));
}

} // namespace chasekit
