// Python bindings. Every entry point takes document text and returns the same
// JSON report the command-line tool prints with --json.

#include "chasekit/report.hpp"
#include "chasekit/textio.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace chasekit;

namespace {

KnowledgeBase document(const std::string& text, Json& inputs)
{
    std::optional<Procedure> proc;
    auto kb = parse_annotated_kb(text, &proc);
    if (proc)
        inputs["normalize"] = procedure_name(*proc);
    return kb;
}

std::string py_run(const std::string& text, const std::string& variant, const std::string& strategy,
                   std::size_t max_steps, bool trace)
{
    Json inputs = Json::object();
    auto kb = document(text, inputs);
    ChaseOptions o;
    o.max_steps = max_steps;
    return dump(run_report(kb, inputs, Variant::parse(variant), parse_strategy(strategy), o, trace));
}

std::string py_explore(const std::string& text, const std::string& variant, std::size_t max_depth,
                       std::size_t max_nodes, bool dedup)
{
    Json inputs = Json::object();
    auto kb = document(text, inputs);
    ExploreOptions o;
    o.max_depth = max_depth;
    o.max_nodes = max_nodes;
    o.dedup = dedup;
    return dump(explore_report(kb, inputs, Variant::parse(variant), o));
}

std::string py_search(const std::string& text, const std::string& variant, std::size_t max_steps,
                      std::size_t max_nodes, const std::vector<std::string>& phased)
{
    Json inputs = Json::object();
    auto kb = document(text, inputs);
    FindOptions o;
    o.max_steps = max_steps;
    o.max_nodes = max_nodes;
    for (const auto& p : phased)
        o.phased.push_back(parse_phases(p));
    return dump(search_report(kb, inputs, Variant::parse(variant), o));
}

std::string py_entails(const std::string& text, std::size_t query_index, const std::string& variant,
                       std::size_t max_steps, const std::string& strategy)
{
    Json inputs = Json::object();
    auto kb = document(text, inputs);
    return dump(entails_report(kb, inputs, query_index, Variant::parse(variant), max_steps,
                               parse_strategy(strategy)));
}

std::string py_normalize(const std::string& text, const std::string& proc, bool skip_atomic)
{
    NormalizeOptions o;
    o.skip_atomic = skip_atomic;
    return dump(normalize_report(parse_kb(text), Json::object(), parse_procedure(proc), o));
}

std::string py_classify(const std::string& fixtures)
{
    return dump(classify_report(load_fixtures(fixtures), Json{{"fixtures", fixtures}}));
}

std::string py_tm(const std::string& mode, const std::string& machine, std::size_t len)
{
    Json inputs{{"mode", mode}};
    if (mode == "tape")
        inputs["len"] = len;
    return dump(tm_report(mode, parse_machine(machine), inputs, len));
}

} // namespace

PYBIND11_MODULE(_chasekit, m)
{
    m.doc() = "Chase engine and termination toolkit for existential rules";

    static py::exception<Error> error(m, "ChaseError");
    static py::exception<SyntaxError> syntax(m, "ChaseSyntaxError", error.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p)
                std::rethrow_exception(p);
        } catch (const SyntaxError& e) {
            py::set_error(syntax, e.what());
        } catch (const Error& e) {
            py::set_error(error, (std::string(e.kind()) + ": " + e.what()).c_str());
        }
    });

    m.def("canonical", [](const std::string& text) { return serialize_kb(parse_kb(text)); },
          py::arg("text"));
    m.def("run", &py_run, py::arg("text"), py::arg("variant") = "r", py::arg("strategy") = "fifo",
          py::arg("max_steps") = 1000, py::arg("trace") = false);
    m.def("explore", &py_explore, py::arg("text"), py::arg("variant") = "r", py::arg("max_depth") = 12,
          py::arg("max_nodes") = 5000, py::arg("dedup") = true);
    m.def("search", &py_search, py::arg("text"), py::arg("variant") = "r", py::arg("max_steps") = 1000,
          py::arg("max_nodes") = 5000, py::arg("phased") = std::vector<std::string>{});
    m.def("entails", &py_entails, py::arg("text"), py::arg("query_index") = 0, py::arg("variant") = "r",
          py::arg("max_steps") = 1000, py::arg("strategy") = "fifo");
    m.def("normalize", &py_normalize, py::arg("text"), py::arg("proc"), py::arg("skip_atomic") = false);
    m.def("classify", &py_classify, py::arg("fixtures"));
    m.def("tm", &py_tm, py::arg("mode"), py::arg("machine"), py::arg("len") = 1);
}
