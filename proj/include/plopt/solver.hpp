#pragma once

#include <cstdint>
#include <string>

#include "plopt/circuit.hpp"
#include "plopt/rational.hpp"

namespace plopt {

// Per-coordinate rational box.
struct Box {
  RatVec lo, hi;
  std::size_t size() const { return lo.size(); }
  static Box uniform(std::size_t n, const Rational& l, const Rational& h);
};

// One decision per branching (max/min) gate of the target circuit, in gate
// order: 'L' means the first argument won, 'R' the second. A Heaviside
// block's {sat-low, interior, sat-high} regime is the induced pair of
// decisions of its max and min gates.
struct BranchPattern {
  std::string decisions;
};

struct FixedPointSolution {
  RatVec inputs;
  RatVec aux;
  BranchPattern pattern;
};

struct SolveOptions {
  std::size_t branch_cap = 22;        // max branching gates accepted
  std::size_t node_budget = 1 << 22;  // max search nodes before giving up
};

// Exact fixed point of the circuit read as a self-map of `domain` (with aux
// ports in [0,1]): enumerates branch patterns in canonical order
// (gate-index-major, left side first), solves the affine piece exactly, and
// returns the lexicographically smallest point of the first consistent
// piece. Throws CapError on cap/budget violation and InternalCheckError if
// no fixed point exists.
FixedPointSolution find_fixed_point(const Circuit& circuit, const Box& domain,
                                    const SolveOptions& options = {});

// True iff exact re-evaluation at (inputs, aux) reproduces (inputs, aux).
bool verify_fixed_point(const Circuit& circuit, const FixedPointSolution& sol);

// Drives a pseudo-circuit at a fixed primary input: finds an aux fixed point
// and returns the corresponding outputs (with the witness). Output values of
// a pseudo-circuit are only defined through this.
struct PseudoOutput {
  RatVec outputs;
  RatVec aux;
  BranchPattern pattern;
};
PseudoOutput solve_pseudo_at(const Circuit& circuit, const RatVec& inputs,
                             const SolveOptions& options = {});

// `solution v1` text block: x<i> / aux<i> assignments plus the decision
// string. Deterministic byte stream.
std::string solution_to_text(const FixedPointSolution& sol);
FixedPointSolution solution_from_text(const std::string& text);

struct LinOptGateSpec;

// For linear-objective specs (subgradient constant in x): true iff x is
// feasible and its objective value equals the exact LP optimum. Throws
// InternalCheckError when the oracle deems the program infeasible while x is
// feasible (a gadget bug).
bool verify_gate_optimality(const LinOptGateSpec& spec, const RatVec& b, const RatVec& c,
                            const RatVec& x);

}  // namespace plopt
