#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cycleq/cli.hpp"
#include "cycleq/parser.hpp"
#include "cycleq/proof.hpp"
#include "cycleq/ri.hpp"
#include "cycleq/scg.hpp"
#include "cycleq/search.hpp"

namespace py = pybind11;
using namespace cycleq;

namespace {

std::vector<std::string> goal_names(const Program& p) {
  std::vector<std::string> out;
  for (const auto& g : p.goals) out.push_back(g.name);
  return out;
}

py::dict prove_goal(const Program& p, const std::string& goal, int depth, long timeout_ms) {
  SearchConfig cfg;
  cfg.depth = depth;
  cfg.timeout_ms = timeout_ms;
  SearchResult r;
  {
    py::gil_scoped_release release;
    r = prove(p, p.goal(goal).eq, cfg);
  }
  py::dict d;
  d["verdict"] = verdict_str(r.verdict);
  d["message"] = r.message;
  d["total_ms"] = r.total_ms;
  d["edge_ms"] = r.edge_ms;
  d["states"] = r.states;
  d["vertices"] = r.proof ? py::cast(r.proof->size()) : py::none();
  d["certificate"] = r.proof ? py::cast(to_json(*r.proof, p.sig, closure_json(closure(*r.proof), *r.proof))) : py::none();
  d["dot"] = r.proof ? py::cast(to_dot(*r.proof)) : py::none();
  return d;
}

py::dict check_certificate(const Program& p, const std::string& json) {
  Preproof pf = from_json(json);
  py::dict d;
  if (pf.ri_translated) {
    auto errors = validate_preproof(pf, p.rules);
    d["ok"] = errors.empty();
    d["errors"] = errors;
    d["witness"] = py::none();
    d["structural"] = true;
    return d;
  }
  ProofVerdict v = is_proof(pf, p.rules);
  d["ok"] = v.ok;
  d["errors"] = v.errors;
  d["witness"] = v.witness ? py::cast(v.witness->str(&pf)) : py::none();
  d["structural"] = false;
  return d;
}

py::dict ri_goal(const Program& p, const std::string& goal, const std::vector<std::string>& prec) {
  Precedence order = prec.empty() ? default_precedence(p.sig) : make_precedence(p.sig, prec);
  RIResult r = ri_prove(p, {p.goal(goal).eq}, order);
  py::dict d;
  d["verdict"] = ri_verdict_str(r.verdict);
  d["message"] = r.message;
  d["steps"] = r.derivation.steps.size();
  d["certificate"] = py::none();
  if (r.verdict == RIVerdict::Proved) {
    Preproof t = translate(p.rules, r.derivation);
    d["certificate"] = to_json(t, p.sig);
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.attr("__version__") = "0.1.0";

  // translators run most recent first, so the base goes in first
  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ParseError>(m, "ParseError", base);
  py::register_exception<AssumptionError>(m, "AssumptionError", base);
  py::register_exception<ProofError>(m, "ProofError", base);

  py::class_<Program>(m, "Program")
      .def_property_readonly("goals", &goal_names)
      .def_property_readonly("assumptions_ok", &Program::assumptions_ok)
      .def("goal", [](const Program& p, const std::string& name) { return pretty_goal(p.goal(name).eq); });

  m.def("parse_program", &parse_program, py::arg("text"));
  m.def("parse_file", &parse_file, py::arg("path"));
  m.def(
      "normalize",
      [](const Program& p, const std::string& t) { return pretty_term(normalize(p.rules, parse_term(p.sig, t))); },
      py::arg("program"), py::arg("term"));
  m.def("prove", &prove_goal, py::arg("program"), py::arg("goal"), py::arg("depth") = 16,
        py::arg("timeout_ms") = 10000);
  m.def("check", &check_certificate, py::arg("program"), py::arg("certificate"));
  m.def("ri_prove", &ri_goal, py::arg("program"), py::arg("goal"), py::arg("prec") = std::vector<std::string>{});
  m.def(
      "run",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
