// JSON reports shared by the command-line tool and the Python module. Every
// report carries the keys command, inputs, verdict, steps, atoms, derivation
// and stats, in that order; command-specific detail lives under stats.
#pragma once

#include "chasekit/analysis.hpp"
#include "chasekit/chase.hpp"
#include "chasekit/normalize.hpp"
#include "chasekit/tmgen.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace chasekit {

using Json = nlohmann::ordered_json;

Json step_json(const Step& s);
Json derivation_json(const std::vector<Step>& steps);
Json atoms_json(const FactBase& f);

// fifo | datalog-first | phased:<file> | random:<seed>
Strategy parse_strategy(const std::string& text);

Json make_report(const std::string& command, Json inputs);

Json run_report(const KnowledgeBase& kb, Json inputs, Variant variant, const Strategy& strategy,
                const ChaseOptions& options, bool trace);
Json explore_report(const KnowledgeBase& kb, Json inputs, Variant variant,
                    const ExploreOptions& options);
Json search_report(const KnowledgeBase& kb, Json inputs, Variant variant,
                   const FindOptions& options);
Json entails_report(const KnowledgeBase& kb, Json inputs, std::size_t query_index,
                    Variant variant, std::size_t max_steps, const Strategy& strategy);
Json normalize_report(const KnowledgeBase& kb, Json inputs, Procedure proc,
                      const NormalizeOptions& options);
Json classify_report(const std::vector<Fixture>& fixtures, Json inputs);
Json tm_report(const std::string& mode, const TuringMachine& m, Json inputs, std::size_t len);

// Structured form of an exception: verdict "error" and an error object.
Json error_report(const std::string& command, Json inputs, const std::exception& e);

// Two-space indented JSON followed by a newline.
std::string dump(const Json& j);

} // namespace chasekit
