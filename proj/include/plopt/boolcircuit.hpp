#pragma once

#include <string>
#include <vector>

#include "plopt/circuit.hpp"

namespace plopt {

enum class BoolOp { Input, Const, And, Or, Not };

struct BoolGate {
  BoolOp op;
  std::size_t a = 0, b = 0;
  bool value = false;     // Const
  std::size_t index = 0;  // Input
};

struct BoolCircuit {
  std::size_t n_inputs = 0;
  std::vector<BoolGate> gates;
  std::vector<std::size_t> outputs;
  void check_well_formed() const;
  std::size_t n_outputs() const { return outputs.size(); }
};

std::vector<bool> eval_bool(const BoolCircuit& c, const std::vector<bool>& inputs);

// Integer view: input bits of `value` (LSB = input 0), output as bitval.
unsigned long bool_apply(const BoolCircuit& c, unsigned long value);

// AND -> min, OR -> max, NOT -> 1 - a; agrees with c on {0,1}^n inputs.
Circuit bool_to_pl(const BoolCircuit& c);

// Same circuit followed by a comparator/mux clamping the output word to
// min(N, value); used so implicit constructions realize f = min(N, C(b)).
BoolCircuit clamp_outputs_to(const BoolCircuit& c, unsigned long N);

// `bool-circuit v1` text format, same line discipline as pl circuits.
std::string bool_circuit_to_text(const BoolCircuit& c);
BoolCircuit bool_circuit_from_text(const std::string& text);

}  // namespace plopt
