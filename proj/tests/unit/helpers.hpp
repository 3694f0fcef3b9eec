// Small builders shared by the unit tests.
#pragma once

#include "chasekit/analysis.hpp"
#include "chasekit/textio.hpp"

#include <string>

namespace chasekit::test {

inline KnowledgeBase kb(const std::string& text) { return parse_kb(text); }

inline FactBase facts(const std::string& text) { return FactBase(parse_document(text).facts); }

inline Rule rule(const std::string& text) { return parse_document(text).rules.at(0); }

inline std::string source_path(const std::string& rel)
{
    return std::string(CHASEKIT_SOURCE_DIR) + "/" + rel;
}

inline Term c(const char* n) { return Term::constant(n); }
inline Term v(const char* n) { return Term::variable(n); }
inline Term n(const char* n) { return Term::null(n); }

} // namespace chasekit::test
