#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "plopt/rational.hpp"

namespace plopt {

// Closed interval with rational endpoints, used for sound per-wire range
// analysis during construction and for the magnitude bound.
struct Interval {
  Rational lo, hi;
  Interval() : lo(0), hi(0) {}
  Interval(Rational l, Rational h) : lo(std::move(l)), hi(std::move(h)) {}
  Rational abs_bound() const { return rat_max(rat_abs(lo), rat_abs(hi)); }
};

Interval interval_add(const Interval& a, const Interval& b);
Interval interval_sub(const Interval& a, const Interval& b);
Interval interval_max(const Interval& a, const Interval& b);
Interval interval_min(const Interval& a, const Interval& b);
Interval interval_scale(const Rational& zeta, const Interval& a);

enum class GateKind { Input, Aux, Const, Add, Sub, Max, Min, Scale };

using GateRef = std::size_t;

// One gate of a PL arithmetic circuit. `a`/`b` are indices of earlier gates;
// `value` holds the constant for Const and the multiplier for Scale;
// `index` addresses a primary input or an aux port.
struct Gate {
  GateKind kind;
  GateRef a = 0, b = 0;
  Rational value;
  std::size_t index = 0;
};

// PL arithmetic circuit over {+, -, max, min, x const} with rational
// constants. With n_aux == 0 this is an ordinary circuit; with n_aux > 0 it
// is a pseudo-circuit: aux ports are extra inputs constrained to [0,1], and
// an output y is deemed valid on input x iff there is z in [0,1]^l with
// aux_outputs(x, z) = z and primary_outputs(x, z) = y.
struct Circuit {
  std::size_t n_inputs = 0;
  std::size_t n_aux = 0;
  std::vector<Gate> gates;  // topologically ordered, append-only
  std::vector<GateRef> primary_outputs;
  std::vector<GateRef> aux_outputs;  // length n_aux

  std::size_t num_branching_gates() const;
  void check_well_formed() const;
};

struct EvalResult {
  RatVec primary;
  RatVec aux_out;
};

// Exact forward evaluation in topological order.
// Throws ContractError on length mismatch or an aux entry outside [0,1].
EvalResult eval(const Circuit& circuit, const RatVec& inputs, const RatVec& aux);

// Evaluates every gate; returns the full wire vector (used by verifiers that
// need interior values).
RatVec eval_all_gates(const Circuit& circuit, const RatVec& inputs, const RatVec& aux);

// Sound interval for every gate given per-input intervals (aux ports get
// [0,1] automatically when `aux_intervals` is empty).
std::vector<Interval> propagate_intervals(const Circuit& circuit,
                                          const std::vector<Interval>& input_intervals,
                                          const std::vector<Interval>& aux_intervals = {});

// K with max_{x in [-B,B]^n, z in [0,1]^l} |f_j(x,z)| <= K for every primary
// output j, by interval propagation. Sound but possibly loose. B >= 0.
Rational magnitude_bound(const Circuit& circuit, const Rational& B);

// L >= the infinity-norm Lipschitz constant of the circuit, by per-gate
// composition over all inputs and aux ports.
Rational lipschitz_bound(const Circuit& circuit);

// The 1-input 1-output 1-aux pseudo-circuit F(x,z) = (z, min{1, max{0, z+x}})
// computing the Heaviside correspondence at its aux fixed points.
Circuit heaviside();

// Incremental construction with interval tracking. Inputs must be declared
// with the interval the circuit is meant to be used on; intervals only feed
// gadget sizing, they are not enforced at evaluation time.
class CircuitBuilder {
 public:
  GateRef input(Interval range);
  GateRef aux();
  GateRef constant(const Rational& value);
  GateRef add(GateRef a, GateRef b);
  GateRef sub(GateRef a, GateRef b);
  GateRef max(GateRef a, GateRef b);
  GateRef min(GateRef a, GateRef b);
  GateRef scale(const Rational& zeta, GateRef a);

  // a + sum_i coeffs[i] * refs[i] as a chain of Scale/Add gates.
  GateRef affine(const Rational& constant_term, const std::vector<Rational>& coeffs,
                 const std::vector<GateRef>& refs);

  // min(hi, max(lo, a)), the [lo, hi] clamp written the way the projection
  // in the gate construction writes it.
  GateRef clamp(GateRef a, const Rational& lo, const Rational& hi);

  // Heaviside block: allocates one aux port z, registers the aux output
  // min{1, max{0, z + arg}} and returns z (the block's value).
  GateRef heaviside_of(GateRef arg);

  // Points aux port `aux_index` at its fixed-point expression. Ports made by
  // aux() start unregistered; heaviside_of and splice register their own.
  void set_aux_output(std::size_t aux_index, GateRef r);

  // Splices `sub` into this circuit: sub's primary inputs are replaced by
  // `input_refs`, its aux ports become fresh aux ports here (with their aux
  // outputs registered). Returns sub's primary output refs.
  std::vector<GateRef> splice(const Circuit& sub, const std::vector<GateRef>& input_refs);

  void mark_primary_output(GateRef r);
  const Interval& range_of(GateRef r) const;
  std::size_t num_inputs() const { return circuit_.n_inputs; }
  std::size_t num_aux() const { return circuit_.n_aux; }

  // Finalizes; the builder must not be reused afterwards.
  Circuit finish();

 private:
  GateRef push(Gate g, Interval range);
  void register_aux_output(GateRef r);
  Circuit circuit_;
  std::vector<Interval> ranges_;
};

// Line-oriented text serialization (`pl-circuit v1` header, one gate per
// line, trailing `out` / `aux` ref lists). Bit-exact round trip.
std::string circuit_to_text(const Circuit& circuit);
Circuit circuit_from_text(const std::string& text);
Circuit read_circuit_file(const std::string& path);

}  // namespace plopt
