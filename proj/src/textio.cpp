#include "chasekit/textio.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace chasekit {

SyntaxError::SyntaxError(std::size_t line, std::size_t col, const std::string& expected)
    : Error(std::to_string(line) + ":" + std::to_string(col) + ": expected " + expected),
      line_(line), col_(col), expected_(expected)
{
}

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_'; }
bool label_char(char c) { return ident_char(c) || c == '#' || c == '.' || c == '-'; }

class Parser {
public:
    explicit Parser(std::string_view text) : s_(text) {}

    SourceDocument run()
    {
        SourceDocument doc;
        std::set<std::string> explicit_ids;
        std::vector<std::pair<std::size_t, bool>> auto_slots;
        std::size_t rule_no = 0;
        for (skip(); !eof(); skip()) {
            Span span{line_, col_};
            if (peek() == '?') {
                advance();
                auto atoms = atom_list();
                expect('.');
                for (const auto& a : atoms)
                    for (const auto& t : a.args)
                        if (t.is_null())
                            fail(span, "a query without nulls");
                doc.queries.push_back(std::move(atoms));
                doc.query_spans.push_back(span);
                continue;
            }
            std::string label;
            bool labelled = false;
            if (peek() == '[') {
                advance();
                skip();
                std::size_t start = pos_;
                while (!eof() && label_char(peek()))
                    advance();
                label = std::string(s_.substr(start, pos_ - start));
                if (label.empty())
                    fail("a rule label");
                skip();
                expect(']');
                labelled = true;
            }
            auto first = atom_list();
            skip();
            if (lookahead("->")) {
                advance();
                advance();
                ++rule_no;
                std::vector<Term> declared;
                skip();
                std::size_t save_pos = pos_, save_line = line_, save_col = col_;
                if (try_keyword("exists")) {
                    skip();
                    if (!eof() && std::isupper(static_cast<unsigned char>(peek()))) {
                        declared = var_list();
                        expect('.');
                    } else {
                        pos_ = save_pos;
                        line_ = save_line;
                        col_ = save_col;
                    }
                }
                auto head = atom_list();
                expect('.');
                std::string id = labelled ? label : "r" + std::to_string(rule_no);
                if (labelled && !explicit_ids.insert(id).second)
                    fail(span, "a unique rule label (duplicate " + id + ")");
                Rule rule;
                try {
                    rule = make_rule(id, first, head);
                } catch (const RuleError& e) {
                    fail(span, std::string("a well-formed rule: ") + e.what());
                }
                for (const auto& v : declared) {
                    if (std::binary_search(rule.body_vars.begin(), rule.body_vars.end(), v))
                        throw VariableScopeError("rule " + id + ": existential variable " +
                                                 v.text() + " also occurs in the body");
                    if (!std::binary_search(rule.existentials.begin(), rule.existentials.end(),
                                            v))
                        throw VariableScopeError("rule " + id + ": existential variable " +
                                                 v.text() + " does not occur in the head");
                }
                auto_slots.emplace_back(doc.rules.size(), labelled);
                doc.rules.push_back(std::move(rule));
                doc.rule_spans.push_back(span);
            } else {
                if (labelled)
                    fail("'->' after a labelled atom list");
                expect('.');
                if (first.size() != 1)
                    fail(span, "a single atom per fact");
                if (!first[0].is_ground())
                    fail(span, "a ground fact (variables are not allowed in facts)");
                doc.facts.push_back(std::move(first[0]));
                doc.fact_spans.push_back(span);
            }
        }
        for (auto [idx, labelled] : auto_slots)
            if (!labelled && explicit_ids.count(doc.rules[idx].id))
                throw RuleError("automatic rule id " + doc.rules[idx].id +
                                " clashes with an explicit label");
        check_arities(doc.rules, doc.facts, doc.queries);
        return doc;
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0, line_ = 1, col_ = 1;

    bool eof() const { return pos_ >= s_.size(); }
    char peek() const { return s_[pos_]; }
    void advance()
    {
        if (s_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }
    bool lookahead(std::string_view w) const { return s_.substr(pos_, w.size()) == w; }

    void skip()
    {
        while (!eof()) {
            char c = peek();
            if (c == '%') {
                while (!eof() && peek() != '\n')
                    advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    [[noreturn]] void fail(const std::string& expected) { throw SyntaxError(line_, col_, expected); }
    [[noreturn]] void fail(Span at, const std::string& expected)
    {
        throw SyntaxError(at.line, at.col, expected);
    }

    void expect(char c)
    {
        skip();
        if (eof() || peek() != c)
            fail(std::string("'") + c + "'");
        advance();
    }

    bool try_keyword(std::string_view w)
    {
        if (!lookahead(w))
            return false;
        std::size_t end = pos_ + w.size();
        if (end < s_.size() && ident_char(s_[end]))
            return false;
        for (std::size_t i = 0; i < w.size(); ++i)
            advance();
        return true;
    }

    std::string ident(const char* what)
    {
        skip();
        if (eof() || !ident_start(peek()))
            fail(what);
        std::size_t start = pos_;
        while (!eof() && ident_char(peek()))
            advance();
        return std::string(s_.substr(start, pos_ - start));
    }

    Term term()
    {
        skip();
        if (eof())
            fail("a term");
        char c = peek();
        if (c == '_') {
            advance();
            std::size_t start = pos_;
            while (!eof() && label_char(peek()))
                advance();
            if (start == pos_)
                fail("a null label after '_'");
            return Term::null(s_.substr(start, pos_ - start));
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (!eof() && ident_char(peek()))
                advance();
            return Term::constant(s_.substr(start, pos_ - start));
        }
        if (!ident_start(c))
            fail("a term");
        std::string name = ident("a term");
        if (std::isupper(static_cast<unsigned char>(name[0])))
            return Term::variable(name);
        return Term::constant(name);
    }

    std::vector<Term> var_list()
    {
        std::vector<Term> vars;
        for (;;) {
            skip();
            if (eof() || !std::isupper(static_cast<unsigned char>(peek())))
                fail("an upper-case variable");
            vars.push_back(Term::variable(ident("a variable")));
            skip();
            if (!eof() && peek() == ',') {
                advance();
                continue;
            }
            return vars;
        }
    }

    Atom atom()
    {
        std::string pred = ident("a predicate name");
        Atom a{Symbol(pred), {}};
        skip();
        if (!eof() && peek() == '(') {
            advance();
            for (;;) {
                a.args.push_back(term());
                skip();
                if (!eof() && peek() == ',') {
                    advance();
                    continue;
                }
                expect(')');
                break;
            }
        }
        return a;
    }

    std::vector<Atom> atom_list()
    {
        std::vector<Atom> atoms;
        for (;;) {
            atoms.push_back(atom());
            skip();
            if (!eof() && peek() == ',') {
                advance();
                continue;
            }
            return atoms;
        }
    }
};

std::string join_atoms(const std::vector<Atom>& atoms)
{
    std::string out;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        if (i)
            out += ", ";
        out += atoms[i].text();
    }
    return out;
}

} // namespace

SourceDocument parse_document(std::string_view text) { return Parser(text).run(); }

std::string read_text_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

SourceDocument parse_file(const std::string& path) { return parse_document(read_text_file(path)); }

KnowledgeBase SourceDocument::to_kb() const
{
    KnowledgeBase kb;
    kb.rules = rules;
    kb.facts = FactBase(facts);
    kb.queries = queries;
    kb.validate();
    return kb;
}

KnowledgeBase parse_kb(std::string_view text) { return parse_document(text).to_kb(); }
KnowledgeBase load_kb(const std::string& path) { return parse_file(path).to_kb(); }

std::string serialize_atom(const Atom& a) { return a.text(); }

std::string serialize_rule(const Rule& r)
{
    std::string out = "[" + r.id + "] " + join_atoms(r.body) + " -> ";
    if (!r.existentials.empty()) {
        out += "exists ";
        for (std::size_t i = 0; i < r.existentials.size(); ++i) {
            if (i)
                out += ",";
            out += r.existentials[i].text();
        }
        out += ". ";
    }
    return out + join_atoms(r.head) + ".";
}

std::string serialize_query(const Query& q) { return "? " + join_atoms(q) + "."; }

std::string serialize_rules(const std::vector<Rule>& rules)
{
    std::string out;
    for (const auto& r : rules)
        out += serialize_rule(r) + "\n";
    return out;
}

std::string serialize_factbase(const FactBase& f)
{
    std::string out;
    for (const auto& a : f)
        out += a.text() + ".\n";
    return out;
}

std::string serialize_document(const SourceDocument& doc)
{
    std::string out = serialize_rules(doc.rules);
    for (const auto& a : doc.facts)
        out += a.text() + ".\n";
    for (const auto& q : doc.queries)
        out += serialize_query(q) + "\n";
    return out;
}

std::string serialize_kb(const KnowledgeBase& kb)
{
    std::string out = serialize_rules(kb.rules) + serialize_factbase(kb.facts);
    for (const auto& q : kb.queries)
        out += serialize_query(q) + "\n";
    return out;
}

} // namespace chasekit
