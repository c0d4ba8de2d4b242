#pragma once

#include <optional>
#include <vector>

#include "plopt/circuit.hpp"
#include "plopt/rational.hpp"

namespace plopt {

// Parameters of one linear-OPT-gate: at aux fixed points the expanded gadget
// outputs an optimal solution of
//     min f(x; c)  s.t.  A x <= b,  x in [-R, R]^n
// whenever the domain is nonempty, f(.; c) is convex with subgradient
// computed by `subgrad`, and |c|_inf <= C.
struct LinOptGateSpec {
  std::size_t n = 0;  // variables
  std::size_t m = 0;  // constraint rows
  std::size_t k = 0;  // objective parameters
  RatMat A;           // m x n, fixed at construction
  Circuit subgrad;    // n + k inputs (own aux allowed), n outputs
  Rational R;         // box radius, > 0
  Rational C;         // bound on |c|_inf, > 0

  void validate() const;
};

// Feasibility program with conditional constraints:
//     h_i(y) > 0  =>  a_i^T x <= b_i,   x in [-R, R]^n.
// `input_bound` bounds |b_i| and |y_j| in the intended use; it sizes the
// internal gadgets and is part of the guarantee's precondition.
struct FeasibilitySpec {
  std::size_t n = 0;
  std::size_t m = 0;
  RatMat A;                     // m x n
  std::vector<Circuit> conds;   // m circuits over the same y inputs, 1 output each
  Rational R;
  Rational input_bound = Rational(1);

  std::size_t y_arity() const;
  void validate() const;
};

// Program Q_app over w in R^m: conditionals w_k <= rho * w_{k'} activated by
// h_k(y) - h_{k'}(y) > 0, plus sum w = 1 and w_i >= rho^m / m.
struct QAppSpec {
  std::size_t m = 0;
  Rational rho;                // in (0, 1]
  std::vector<Circuit> h;      // m condition circuits over the same y inputs
  void validate() const;
};

struct GammaOptions {
  enum class Mode { Exact, BitBound };
  Mode mode = Mode::Exact;
  std::size_t exact_cap = 12;  // max m + 2n for exact enumeration
  bool fallback_to_bitbound = true;
};

// K >= max |subgrad(x, c, beta)|_2 over x in [-R,R]^n, c in [-C,C]^k,
// beta in [0,1]^l, via interval propagation and |.|_2 <= sqrt(n') |.|_inf.
Rational compute_K(const LinOptGateSpec& spec);

// gamma* > 0 strictly below the optimal value of every feasible program of
// the gate analysis over the augmented matrix [A; I; -I]. Exact mode
// enumerates constraint subsets and solves the per-coordinate LP
// decomposition; bit-bound mode returns a Hadamard-based lower bound.
// Results are memoized per matrix.
Rational compute_gamma_star(const RatMat& A, std::size_t n_cols, const Rational& R,
                            const GammaOptions& options = {});

// Wiring metadata of an expanded gate inside its enclosing circuit. Aux
// layout: alpha (n), then the subgradient's own ports (l), then the m
// Heaviside multipliers.
struct LinOptWiring {
  std::size_t n = 0, m = 0, k = 0, l_sub = 0;
  std::size_t aux_alpha_first = 0;
  std::size_t aux_sub_first = 0;
  std::size_t aux_mu_first = 0;
  Rational epsilon, K, gamma_star, R;
  std::vector<GateRef> x_refs;     // scaled inputs x = 2R alpha - R
  std::vector<GateRef> v_refs;     // subgradient values
  std::vector<GateRef> xbar_refs;  // gate outputs (projected step)
};

// Emits the gate gadget into `b`, reading right-hand sides and objective
// parameters from existing wires. Returns the output refs (= wiring.xbar_refs).
std::vector<GateRef> emit_linopt(CircuitBuilder& b, const LinOptGateSpec& spec,
                                 const std::vector<GateRef>& b_refs,
                                 const std::vector<GateRef>& c_refs,
                                 const GammaOptions& options = {},
                                 LinOptWiring* wiring = nullptr);

// Standalone gadget circuit with inputs (b, c) and outputs x.
Circuit expand_linopt(const LinOptGateSpec& spec, const GammaOptions& options = {},
                      LinOptWiring* wiring = nullptr);

// v in H(s) * w at fixed points, for a wire w known nonnegative
// (one LP gadget: max v*s s.t. 0 <= v <= w).
GateRef emit_h_times_nonneg(CircuitBuilder& b, GateRef s_ref, GateRef w_ref,
                            const GammaOptions& options = {});

// H(x) * y as H(x)max{0,y} - H(x)max{0,-y}; signs resolved by wire ranges.
GateRef emit_h_times(CircuitBuilder& b, GateRef x_ref, GateRef y_ref,
                     const GammaOptions& options = {});

// Standalone pseudo-circuit on (x, y) computing H(x) * y at fixed points,
// valid for |x|, |y| <= input_bound.
Circuit mult_by_heaviside(const Rational& input_bound = Rational(8),
                          const GammaOptions& options = {});

std::vector<GateRef> emit_feasibility(CircuitBuilder& b, const FeasibilitySpec& spec,
                                      const std::vector<GateRef>& b_refs,
                                      const std::vector<GateRef>& y_refs,
                                      const GammaOptions& options = {});

// Standalone feasibility gadget with inputs (b, y) and outputs x.
Circuit build_feasibility(const FeasibilitySpec& spec, const GammaOptions& options = {});

// The rho-powers witness of program Q_app at gate input y: w_k proportional
// to rho^{d_k} with d_k the longest path to a sink in the feasibility graph.
// Throws ContractError if the graph has a cycle.
RatVec qapp_witness(const QAppSpec& spec, const RatVec& y);

// Text format: `linopt-spec v1` header with A, R, C and the embedded
// subgradient circuit.
std::string linopt_spec_to_text(const LinOptGateSpec& spec);
LinOptGateSpec linopt_spec_from_text(const std::string& text);

}  // namespace plopt
