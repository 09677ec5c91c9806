// Python bindings. Values cross the boundary as JSON text in the same
// formats the command line tool reads and writes.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "foldplan/cli.hpp"
#include "foldplan/dataset.hpp"
#include "foldplan/error.hpp"
#include "foldplan/io.hpp"
#include "foldplan/level0.hpp"

namespace py = pybind11;
using namespace foldplan;

namespace {

std::string canonical_cp(const std::string& cp_text) {
  return serialize_cp(canonicalize(parse_cp(cp_text)).pattern());
}

// Verdict of the fully folded assignment, or of `state_text` when given.
// Indices refer to the canonical pattern.
std::string verify(const std::string& cp_text, const std::optional<std::string>& state_text) {
  const auto c = canonicalize(parse_cp(cp_text));
  const FoldState s = state_text ? state_from_json(parse_json(*state_text)) : fully_folded_state(c);
  return verdict_to_json(level0::verify_flat_state(c, s)).dump();
}

py::tuple step(const std::string& cp_text, const std::optional<std::string>& state_text,
               const std::string& action_text) {
  const auto c = canonicalize(parse_cp(cp_text));
  const FoldState s = state_text ? state_from_json(parse_json(*state_text)) : FoldState::flat(c.pattern());
  const auto r = level0::step(c, s, action_from_json(parse_json(action_text)));
  return py::make_tuple(dump_json(state_to_json(r.state), FloatFormat::Shortest), verdict_to_json(r.verdict).dump());
}

py::tuple run(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  int code = 0;
  {
    py::gil_scoped_release release;
    code = run_cli(args, out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_foldplan, m) {
  m.doc() = "Crease-pattern folding planner";
  m.attr("__version__") = std::string(kToolVersion);

  py::register_exception<Error>(m, "FoldplanError", PyExc_ValueError);

  m.def("canonical_cp", &canonical_cp, py::arg("cp_text"), "Canonical CP file text of a CP file.");
  m.def("verify", &verify, py::arg("cp_text"), py::arg("state_text") = py::none(),
        "Verdict JSON for a state (default: every crease fully folded).");
  m.def("step", &step, py::arg("cp_text"), py::arg("state_text"), py::arg("action_text"),
        "Apply one action; returns (state JSON, verdict JSON). A null state means flat.");
  m.def("fixture", [](const std::string& name) {
    const Family f = family_from_string(name);
    switch (f) {
      case Family::Diagonal: return serialize_cp(fixture_diagonal());
      case Family::BookFold: return serialize_cp(fixture_book());
      case Family::Gate: return serialize_cp(fixture_gate());
      case Family::Blintz: return serialize_cp(fixture_blintz());
      default: return serialize_cp(generate_patterns(f, {}, 1, 0).front());
    }
  }, py::arg("family"), "CP file text of a named fixture or the first pattern of a family.");
  m.def("run_cli", &run, py::arg("args"), "Run a subcommand; returns (exit code, stdout, stderr).");
}
