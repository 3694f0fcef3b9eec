// Parser and serializer for the `.erl` rule language.
//
//   document  := statement*
//   statement := rule | fact | query            ('%' starts a comment)
//   rule      := ('[' label ']')? atomlist '->' ('exists' varlist '.')? atomlist '.'
//   fact      := atom '.'
//   query     := '?' atomlist '.'
//   atom      := IDENT '(' term (',' term)* ')' | IDENT
//   term      := Upper-case IDENT (variable) | lower-case IDENT (constant) | '_' label (null)
#pragma once

#include "chasekit/core.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace chasekit {

class SyntaxError : public Error {
public:
    SyntaxError(std::size_t line, std::size_t col, const std::string& expected);
    const char* kind() const noexcept override { return "SyntaxError"; }
    std::size_t line() const noexcept { return line_; }
    std::size_t col() const noexcept { return col_; }
    const std::string& expected() const noexcept { return expected_; }

private:
    std::size_t line_, col_;
    std::string expected_;
};

struct Span {
    std::size_t line = 0;
    std::size_t col = 0;
};

struct SourceDocument {
    std::vector<Rule> rules;
    std::vector<Atom> facts;
    std::vector<Query> queries;
    std::vector<Span> rule_spans, fact_spans, query_spans;

    KnowledgeBase to_kb() const;
};

SourceDocument parse_document(std::string_view text);
SourceDocument parse_file(const std::string& path);

// Convenience: parse a document and build a validated knowledge base.
KnowledgeBase parse_kb(std::string_view text);
KnowledgeBase load_kb(const std::string& path);

std::string read_text_file(const std::string& path);

std::string serialize_atom(const Atom& a);
std::string serialize_rule(const Rule& r);
std::string serialize_query(const Query& q);
std::string serialize_rules(const std::vector<Rule>& rules);
// One fact per line in canonical order; empty fact base gives "".
std::string serialize_factbase(const FactBase& f);
std::string serialize_document(const SourceDocument& doc);
std::string serialize_kb(const KnowledgeBase& kb);

} // namespace chasekit
