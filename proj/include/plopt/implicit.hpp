#pragma once

#include "plopt/boolcircuit.hpp"
#include "plopt/circuit.hpp"
#include "plopt/gates.hpp"

namespace plopt {

// Succinct representation (C, N) of an integer-valued function
// f(v) = min(N, bitval(C(bits of v))) on {0, ..., N}, and through it of a
// piecewise-linear function (interpolation) or piecewise-constant
// correspondence (right extension). Bit width is floor(log2 N) + 1 and the
// Boolean circuit must match it on both sides.
struct ImplicitSpec {
  BoolCircuit C;
  unsigned long N = 1;
  std::size_t bit_width() const;
  void validate() const;
};

std::size_t bit_width_for(unsigned long N);

// In-builder emissions, composable by the constructions below.
std::vector<GateRef> emit_bitextract(CircuitBuilder& b, GateRef x, GateRef y, std::size_t n,
                                     const GammaOptions& options = {});
GateRef emit_bitmult_word(CircuitBuilder& b, GateRef a, const std::vector<GateRef>& bits,
                          const GammaOptions& options = {});
// Triangle wave T_n(x, p); the square wave is H of this.
GateRef emit_triangle_wave(CircuitBuilder& b, GateRef x, GateRef p, std::size_t n);

// a * bitval_n(b) at fixed points with Boolean b. Inputs (a, b_{n-1..0}).
Circuit bitmult_n(std::size_t n, const Rational& a_bound = Rational(8),
                  const GammaOptions& options = {});

// Floor extraction: inputs (x, y), n outputs b_{n-1..0}; at fixed points
// with 0 < y <= 1 and x/y in [0,2^n] minus the integers, bitval(b) = floor(x/y).
Circuit bitextract_n(std::size_t n, const GammaOptions& options = {});

// S_n(x, p) = H(T_n(x, p)): 2^n + 1/2 square-wave periods of length p.
Circuit square_wave(std::size_t n);

// Pseudo-circuit computing the piecewise-linear function g of (C, N).
Circuit implicit_pl_function(const ImplicitSpec& spec, const GammaOptions& options = {});

// Pseudo-circuit on (x, y, z) computing z * g(x/y) for the piecewise-constant
// correspondence g of (C, N), valid at fixed points with 0 < y <= 1.
Circuit implicit_pc_correspondence(const ImplicitSpec& spec,
                                   const Rational& z_bound = Rational(8),
                                   const GammaOptions& options = {});

}  // namespace plopt
