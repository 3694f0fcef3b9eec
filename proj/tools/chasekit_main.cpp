// chasekit: command-line front end.
//
//   chasekit [--json] run FILE [--variant V] [--strategy S] [--max-steps N] [--trace]
//   chasekit [--json] normalize FILE --proc sp|1ad|2ad [--skip-atomic] [--sidecar PATH]
//   chasekit [--json] explore FILE [--variant V] [--max-depth D] [--max-nodes N] [--no-dedup]
//   chasekit [--json] search FILE [--variant V] [--max-steps N] [--max-nodes N] [--phased F]...
//   chasekit [--json] entails FILE [--query-index I] [--variant V] [--max-steps N]
//   chasekit [--json] classify --fixtures DIR
//   chasekit [--json] tm encode|tape --machine FILE [--len N]
//
// Exit status: 0 on success or pass, 1 on failure or mismatch, 2 on usage error.

#include "chasekit/report.hpp"
#include "chasekit/textio.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>

using namespace chasekit;

namespace {

KnowledgeBase load_input(const std::string& file, Json& inputs)
{
    inputs["file"] = file;
    std::optional<Procedure> proc;
    auto kb = load_annotated_kb(file, &proc);
    if (proc)
        inputs["normalize"] = procedure_name(*proc);
    return kb;
}

void print_human(const Json& r)
{
    const std::string cmd = r["command"];
    const auto& st = r["stats"];
    if (cmd == "normalize" || cmd == "tm") {
        std::cout << st["output"].get<std::string>();
        return;
    }
    if (cmd == "classify") {
        std::printf("%-10s %-6s %-22s %-22s %s\n", "fixture", "var", "expected", "observed",
                    "result");
        for (const auto& row : st["table"])
            std::printf("%-10s %-6s %-22s %-22s %s\n",
                        row["fixture"].get<std::string>().c_str(),
                        row["variant"].get<std::string>().c_str(),
                        row["expected"].get<std::string>().c_str(),
                        row["observed"].get<std::string>().c_str(),
                        row["pass"].get<bool>() ? "PASS" : "FAIL");
        std::cout << st["passed"] << "/" << st["rows"] << " expectations met\n";
        return;
    }
    std::cout << "verdict: " << r["verdict"].get<std::string>() << "\n";
    std::cout << "steps: " << r["steps"] << "\n";
    std::cout << "atoms: " << r["atoms"] << "\n";
    for (const auto& [k, v] : st.items()) {
        if (k == "result")
            continue;
        if (v.is_string())
            std::cout << k << ": " << v.get<std::string>() << "\n";
        else
            std::cout << k << ": " << v.dump() << "\n";
    }
    if (r["derivation"].is_array())
        for (const auto& s : r["derivation"]) {
            std::cout << "  " << s["serial"] << ". " << s["rule"].get<std::string>() << " +";
            for (const auto& a : s["added"])
                std::cout << " " << a.get<std::string>();
            std::cout << "\n";
        }
    if (st.contains("result"))
        for (const auto& a : st["result"])
            std::cout << a.get<std::string>() << ".\n";
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"chasekit: chase engine and termination toolkit for existential rules"};
    app.require_subcommand(1);
    app.fallthrough();
    bool json = false;
    app.add_flag("--json", json, "Print a JSON report");

    std::string file, variant = "r", strategy = "fifo", proc, sidecar, fixtures, machine;
    std::size_t max_steps = 1000, max_depth = 12, max_nodes = 5000, query_index = 0, len = 1;
    bool trace = false, skip_atomic = false, no_dedup = false;
    std::vector<std::string> phased;

    auto* run = app.add_subcommand("run", "Run a chase derivation");
    run->add_option("file", file, "Input .erl document")->required();
    run->add_option("--variant", variant, "o, so, r, e, or a df- prefixed form");
    run->add_option("--strategy", strategy, "fifo, datalog-first, phased:<file>, random:<seed>");
    run->add_option("--max-steps", max_steps, "Step budget");
    run->add_flag("--trace", trace, "Include the derivation in the report");

    auto* norm = app.add_subcommand("normalize", "Normalise the rules of a document");
    norm->add_option("file", file, "Input .erl document")->required();
    norm->add_option("--proc", proc, "sp, 1ad or 2ad")->required();
    norm->add_flag("--skip-atomic", skip_atomic, "Keep single-atom-head rules unchanged");
    norm->add_option("--sidecar", sidecar, "Write the decomposition sidecar JSON here");

    auto* expl = app.add_subcommand("explore", "Explore every derivation up to a depth bound");
    expl->add_option("file", file, "Input .erl document")->required();
    expl->add_option("--variant", variant, "Chase variant");
    expl->add_option("--max-depth", max_depth, "Depth bound");
    expl->add_option("--max-nodes", max_nodes, "State budget");
    expl->add_flag("--no-dedup", no_dedup, "Do not merge isomorphic states");

    auto* search = app.add_subcommand("search", "Look for a fair terminating derivation");
    search->add_option("file", file, "Input .erl document")->required();
    search->add_option("--variant", variant, "Chase variant");
    search->add_option("--max-steps", max_steps, "Length bound");
    search->add_option("--max-nodes", max_nodes, "State budget");
    search->add_option("--phased", phased, "Phase file to try before searching");

    auto* ent = app.add_subcommand("entails", "Decide a query with a step budget");
    ent->add_option("file", file, "Input .erl document")->required();
    ent->add_option("--query-index", query_index, "Which query of the document");
    ent->add_option("--variant", variant, "Chase variant");
    ent->add_option("--strategy", strategy, "Chase strategy");
    ent->add_option("--max-steps", max_steps, "Step budget");

    auto* cls = app.add_subcommand("classify", "Check corpus expectations");
    cls->add_option("--fixtures", fixtures, "Fixture directory")->required();

    auto* tm = app.add_subcommand("tm", "Turing machine encodings");
    tm->require_subcommand(1);
    auto* tm_encode = tm->add_subcommand("encode", "Tape-creation and simulation rules with seed");
    tm_encode->add_option("--machine", machine, "Machine file")->required();
    auto* tm_tape = tm->add_subcommand("tape", "Simulation rules over a direct input tape");
    tm_tape->add_option("--machine", machine, "Machine file")->required();
    tm_tape->add_option("--len", len, "Input length")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    std::string command = app.get_subcommands().front()->get_name();
    Variant v;
    try {
        v = Variant::parse(variant);
        if (command == "normalize")
            parse_procedure(proc);
    } catch (const Error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }
    Json inputs = Json::object();
    try {
        Json report;
        if (command == "run") {
            ChaseOptions o;
            o.max_steps = max_steps;
            report = run_report(load_input(file, inputs), inputs, v, parse_strategy(strategy), o, trace);
        } else if (command == "normalize") {
            inputs["file"] = file;
            NormalizeOptions o;
            o.skip_atomic = skip_atomic;
            report = normalize_report(load_kb(file), inputs, parse_procedure(proc), o);
            if (!sidecar.empty()) {
                std::ofstream out(sidecar);
                if (!out)
                    throw Error("cannot write " + sidecar);
                out << dump(report["stats"]["sidecar"]);
            }
        } else if (command == "explore") {
            ExploreOptions o;
            o.max_depth = max_depth;
            o.max_nodes = max_nodes;
            o.dedup = !no_dedup;
            report = explore_report(load_input(file, inputs), inputs, v, o);
        } else if (command == "search") {
            FindOptions o;
            o.max_steps = max_steps;
            o.max_nodes = max_nodes;
            for (const auto& p : phased)
                o.phased.push_back(load_phases(p));
            inputs["phased"] = phased;
            report = search_report(load_input(file, inputs), inputs, v, o);
        } else if (command == "entails") {
            report = entails_report(load_input(file, inputs), inputs, query_index, v, max_steps,
                                    parse_strategy(strategy));
        } else if (command == "classify") {
            inputs["fixtures"] = fixtures;
            report = classify_report(load_fixtures(fixtures), inputs);
        } else if (command == "tm") {
            std::string mode = tm->get_subcommands().front()->get_name();
            inputs["mode"] = mode;
            inputs["machine"] = machine;
            if (mode == "tape")
                inputs["len"] = len;
            report = tm_report(mode, load_machine(machine), inputs, len);
        }
        if (json)
            std::cout << dump(report);
        else
            print_human(report);
        return report["verdict"] == "fail" ? 1 : 0;
    } catch (const std::exception& e) {
        if (json) {
            std::cout << dump(error_report(command, inputs, e));
        } else {
            auto ce = dynamic_cast<const Error*>(&e);
            std::cerr << "error: " << (ce ? ce->kind() : "Error") << ": " << e.what() << "\n";
        }
        return 1;
    }
}
