// Python bindings for the main operations. Rationals cross the boundary as
// "num/den" strings so exactness survives; Python's fractions.Fraction parses
// them directly.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "plopt/apps.hpp"
#include "plopt/boolcircuit.hpp"
#include "plopt/circuit.hpp"
#include "plopt/gates.hpp"
#include "plopt/implicit.hpp"
#include "plopt/lp.hpp"
#include "plopt/solver.hpp"

namespace py = pybind11;
using namespace plopt;

namespace {

RatVec to_rationals(const std::vector<std::string>& strs) {
  RatVec v;
  v.reserve(strs.size());
  for (const std::string& s : strs) v.push_back(parse_rational(s));
  return v;
}

std::vector<std::string> from_rationals(const RatVec& v) {
  std::vector<std::string> s;
  s.reserve(v.size());
  for (const Rational& q : v) s.push_back(rational_to_string(q));
  return s;
}

}  // namespace

PYBIND11_MODULE(_plopt, m) {
  m.doc() = "exact piecewise-linear circuits, linear-OPT-gates and equilibrium solvers";

  py::class_<Circuit>(m, "Circuit")
      .def_property_readonly("n_inputs", [](const Circuit& c) { return c.n_inputs; })
      .def_property_readonly("n_aux", [](const Circuit& c) { return c.n_aux; })
      .def_property_readonly("n_outputs",
                             [](const Circuit& c) { return c.primary_outputs.size(); })
      .def("__str__", &circuit_to_text);

  m.def("parse_circuit", &circuit_from_text, py::arg("text"));
  m.def("circuit_to_text", &circuit_to_text, py::arg("circuit"));
  m.def("heaviside", &heaviside);
  m.def("mult_by_heaviside",
        [](const std::string& bound) { return mult_by_heaviside(parse_rational(bound)); },
        py::arg("input_bound") = "8");
  m.def("magnitude_bound", [](const Circuit& c, const std::string& B) {
    return rational_to_string(magnitude_bound(c, parse_rational(B)));
  });
  m.def("lipschitz_bound",
        [](const Circuit& c) { return rational_to_string(lipschitz_bound(c)); });

  m.def("eval_circuit",
        [](const Circuit& c, const std::vector<std::string>& inputs,
           const std::vector<std::string>& aux) {
          EvalResult r = eval(c, to_rationals(inputs), to_rationals(aux));
          return py::make_tuple(from_rationals(r.primary), from_rationals(r.aux_out));
        },
        py::arg("circuit"), py::arg("inputs"), py::arg("aux") = std::vector<std::string>{});

  m.def("find_fixed_point",
        [](const Circuit& c, const std::vector<std::string>& lo,
           const std::vector<std::string>& hi, std::size_t branch_cap) {
          Box box{to_rationals(lo), to_rationals(hi)};
          SolveOptions opts;
          opts.branch_cap = branch_cap;
          FixedPointSolution sol = find_fixed_point(c, box, opts);
          return py::make_tuple(from_rationals(sol.inputs), from_rationals(sol.aux),
                                sol.pattern.decisions);
        },
        py::arg("circuit"), py::arg("lo"), py::arg("hi"), py::arg("branch_cap") = 4096);

  m.def("solve_pseudo_at",
        [](const Circuit& c, const std::vector<std::string>& inputs, std::size_t branch_cap) {
          SolveOptions opts;
          opts.branch_cap = branch_cap;
          PseudoOutput out = solve_pseudo_at(c, to_rationals(inputs), opts);
          return from_rationals(out.outputs);
        },
        py::arg("circuit"), py::arg("inputs"), py::arg("branch_cap") = 4096);

  m.def("lp_solve",
        [](const std::vector<std::string>& c, const std::vector<std::vector<std::string>>& A,
           const std::vector<std::string>& b, const std::vector<std::string>& lo,
           const std::vector<std::string>& hi, bool maximize) {
          LPProblem p;
          p.c = to_rationals(c);
          for (const auto& row : A) p.A.push_back(to_rationals(row));
          p.b = to_rationals(b);
          for (const std::string& s : lo) p.lo.push_back(parse_rational(s));
          for (const std::string& s : hi) p.hi.push_back(parse_rational(s));
          p.sense = maximize ? LPProblem::Sense::Max : LPProblem::Sense::Min;
          LPResult r = lp_solve_exact(p);
          if (r.status == LPStatus::Infeasible) return py::make_tuple("infeasible", py::none(), py::none());
          if (r.status == LPStatus::Unbounded) return py::make_tuple("unbounded", py::none(), py::none());
          return py::make_tuple("optimal", py::cast(from_rationals(r.x)),
                                py::cast(rational_to_string(r.value)));
        },
        py::arg("c"), py::arg("A"), py::arg("b"), py::arg("lo"), py::arg("hi"),
        py::arg("maximize") = false);

  m.def("solve_instance",
        [](const std::string& json_text, std::size_t branch_cap) {
          apps::Instance inst = apps::instance_from_json(json_text);
          SolveOptions opts;
          opts.branch_cap = branch_cap;
          apps::Solution sol = apps::solve(inst, GammaOptions{}, opts);
          apps::VerifyReport rep = apps::verify_solution(inst, sol);
          return py::make_tuple(from_rationals(sol.fp.inputs), rep.ok, rep.violations);
        },
        py::arg("instance_json"), py::arg("branch_cap") = 4096);

  m.def("solution_to_text", [](const std::vector<std::string>& inputs,
                               const std::vector<std::string>& aux, const std::string& pattern) {
    FixedPointSolution sol;
    sol.inputs = to_rationals(inputs);
    sol.aux = to_rationals(aux);
    sol.pattern.decisions = pattern;
    return solution_to_text(sol);
  });
}
