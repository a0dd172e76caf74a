#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ringverify/commands.hpp"
#include "ringverify/evaluator.hpp"

namespace py = pybind11;
using namespace ringverify;

namespace {

using Positions = std::vector<std::int64_t>;

py::object json_to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

std::vector<Positions> positions_of(const std::vector<Configuration>& cs) {
  std::vector<Positions> out;
  for (auto& c : cs) out.push_back(c.positions);
  return out;
}

Configuration config(std::int64_t n, const Positions& p) {
  Configuration c{n, p};
  c.validate();
  return c;
}

}  // namespace

PYBIND11_MODULE(_ringverify, m) {
  m.doc() = "Mobile robots on parameterized rings: explicit semantics, Presburger encodings, SMT checks";

  // later registrations are tried first, so the base class goes first
  auto base = py::register_exception<Error>(m, "Error", PyExc_ValueError).ptr();
  py::register_exception<cli::UsageError>(m, "UsageError", base);
  py::register_exception<smt::SolverError>(m, "SolverError", base);
  py::register_exception<smt::WitnessError>(m, "WitnessError", base);
  py::register_exception<BudgetExceeded>(m, "BudgetExceeded", base);

  m.def("normalize", [](const std::string& text) { return pb::print(pb::parse_formula(text)); },
        "Parse a formula and print it back in canonical form.");
  m.def(
      "evaluate",
      [](const std::string& text, const pb::Valuation& v, std::int64_t bound) {
        return pb::eval(pb::parse_formula(text), v, bound);
      },
      py::arg("formula"), py::arg("valuation"), py::arg("bound") = 0);
  m.def("to_smtlib", [](const std::string& text) { return pb::to_smtlib(pb::parse_formula(text)); });

  m.def(
      "view", [](std::int64_t n, const Positions& p, std::size_t robot) { return view_clockwise(config(n, p), robot).distances; },
      py::arg("n"), py::arg("positions"), py::arg("robot"), "Clockwise view of a robot (0-based index).");
  m.def("revert", [](const Positions& d) {
    View v{d};
    v.validate();
    return revert(v).distances;
  });

  py::class_<Protocol>(m, "Protocol")
      .def(py::init([](const std::string& text, std::size_t k) { return Protocol(pb::parse_formula(text), k); }),
           py::arg("formula"), py::arg("robots"))
      .def_static("parse", &cli::parse_protocol, py::arg("text"), "Protocol text with an optional `# robots: K` line.")
      .def_static("load", &cli::load_protocol, py::arg("path"))
      .def_property_readonly("robots", &Protocol::robots)
      .def_property_readonly("formula", [](const Protocol& p) { return pb::print(p.body()); })
      .def("holds", [](const Protocol& p, const Positions& d) { return p.holds(View{d}); })
      .def("move_set", [](const Protocol& p, const Positions& d) { return move_set(p, View{d}); })
      .def("valid_up_to", [](const Protocol& p, std::int64_t n_max) -> std::optional<Positions> {
        auto bad = protocol_valid_bounded(p, n_max);
        if (!bad) return std::nullopt;
        return bad->distances;
      })
      .def("__repr__", [](const Protocol& p) {
        return "Protocol(" + pb::print(p.body()) + ", robots=" + std::to_string(p.robots()) + ")";
      });

  m.def(
      "post",
      [](const Protocol& phi, std::int64_t n, const Positions& p, const std::string& mode) {
        return positions_of(post(phi, config(n, p), parse_mode(mode)));
      },
      py::arg("protocol"), py::arg("n"), py::arg("positions"), py::arg("mode") = "sync");
  m.def(
      "post_star",
      [](const Protocol& phi, std::int64_t n, const Positions& p, const std::string& mode, std::size_t max_states) {
        return positions_of(post_star(phi, config(n, p), parse_mode(mode), max_states));
      },
      py::arg("protocol"), py::arg("n"), py::arg("positions"), py::arg("mode") = "sync",
      py::arg("max_states") = kDefaultMaxStates);
  m.def(
      "find_violation",
      [](const Protocol& phi, const std::string& ring, const std::string& bad, const std::string& mode,
         std::int64_t n_min, std::int64_t n_max, bool one_step) -> py::object {
        ReachabilityOptions opts;
        opts.one_step = one_step;
        auto m = parse_mode(mode);
        auto w = reachable_bad_bounded(phi, pb::parse_formula(ring), pb::parse_formula(bad), m, n_min, n_max, opts);
        if (!w) return py::none();
        return json_to_py(cli::to_json(*w, m));
      },
      py::arg("protocol"), py::arg("ring"), py::arg("bad"), py::arg("mode"), py::arg("n_min"), py::arg("n_max"),
      py::arg("one_step") = false, "Explicit-state search; a witness dict or None.");

  m.def(
      "safety_smt",
      [](const Protocol& phi, const std::string& ring, const std::string& bad, const std::string& mode) {
        return smt::emit_smt(enc::safety_query(phi, pb::parse_formula(ring), pb::parse_formula(bad), parse_mode(mode)));
      },
      py::arg("protocol"), py::arg("ring"), py::arg("bad"), py::arg("mode") = "sync");
  m.def(
      "crosscheck",
      [](const Protocol& phi, const std::string& mode, std::int64_t n_min, std::int64_t n_max) -> py::dict {
        auto r = cli::crosscheck_post(phi, parse_mode(mode), n_min, n_max);
        py::dict out;
        out["pairs"] = r.pairs;
        if (r.first) {
          py::dict d;
          d["n"] = r.first->n;
          d["from"] = r.first->from;
          d["to"] = r.first->to;
          d["formula"] = r.first->formula;
          d["oracle"] = r.first->oracle;
          out["discrepancy"] = d;
        } else {
          out["discrepancy"] = py::none();
        }
        return out;
      },
      py::arg("protocol"), py::arg("mode"), py::arg("n_min"), py::arg("n_max"),
      "Compare the one-step formula with the explicit relation on every pair of states.");

  auto flags = [](const std::optional<std::string>& solver, std::int64_t timeout) {
    cli::SolverFlags f;
    f.command = solver;
    f.timeout_seconds = timeout;
    return f;
  };
  m.def(
      "verify",
      [flags](const std::string& protocol, const std::string& ring, const std::string& bad, const std::string& mode,
              const std::optional<std::string>& solver, std::int64_t timeout) {
        cli::VerifyArgs a;
        a.protocol = protocol;
        a.ring = ring;
        a.bad = bad;
        a.mode = parse_mode(mode);
        a.solver = flags(solver, timeout);
        return json_to_py(cli::to_json(cli::cmd_verify(a)));
      },
      py::arg("protocol"), py::arg("ring"), py::arg("bad"), py::arg("mode") = "sync", py::arg("solver") = py::none(),
      py::arg("timeout") = 60, "Safety check through the SMT solver; returns the JSON report as a dict.");
  m.def(
      "check",
      [flags](const std::string& protocol, const std::string& property, const std::optional<std::string>& solver,
              std::int64_t timeout) {
        return json_to_py(cli::to_json(cli::cmd_check(protocol, cli::parse_property(property), flags(solver, timeout))));
      },
      py::arg("protocol"), py::arg("property"), py::arg("solver") = py::none(), py::arg("timeout") = 60);
}
