#pragma once

// random Boolean circuits for the differential corpora

#include "plopt/boolcircuit.hpp"
#include "test_util.hpp"

inline plopt::BoolCircuit random_bool_circuit(TestRng& rng, std::size_t n,
                                              std::size_t extra_gates) {
  using namespace plopt;
  BoolCircuit c;
  c.n_inputs = n;
  for (std::size_t i = 0; i < n; ++i) {
    BoolGate g{BoolOp::Input};
    g.index = i;
    c.gates.push_back(g);
  }
  for (std::size_t t = 0; t < extra_gates; ++t) {
    BoolGate g{};
    std::size_t pick = rng.below(4);
    g.a = rng.below(c.gates.size());
    g.b = rng.below(c.gates.size());
    if (pick == 0)
      g.op = BoolOp::And;
    else if (pick == 1)
      g.op = BoolOp::Or;
    else if (pick == 2)
      g.op = BoolOp::Not;
    else {
      g.op = BoolOp::Const;
      g.value = rng.coin();
    }
    c.gates.push_back(g);
  }
  for (std::size_t j = 0; j < n; ++j) c.outputs.push_back(rng.below(c.gates.size()));
  return c;
}
