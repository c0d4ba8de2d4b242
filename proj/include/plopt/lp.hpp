#pragma once

#include <optional>
#include <vector>

#include "plopt/rational.hpp"

namespace plopt {

enum class LPStatus { Optimal, Infeasible, Unbounded };

// min / max c^T x subject to A x <= b, eq_A x = eq_b, lo <= x <= hi.
// Missing bound entries mean free in that direction.
struct LPProblem {
  enum class Sense { Min, Max };
  Sense sense = Sense::Min;
  RatVec c;
  RatMat A;
  RatVec b;
  RatMat eq_A;
  RatVec eq_b;
  std::vector<std::optional<Rational>> lo, hi;

  std::size_t num_vars() const { return c.size(); }
  void check_consistent() const;
};

struct LPResult {
  LPStatus status = LPStatus::Infeasible;
  RatVec x;
  Rational value;
};

// Exact primal simplex, two phases, Bland's entering rule with a
// minimum-ratio / least-index leaving rule. Deterministic given the input.
LPResult lp_solve_exact(const LPProblem& p);

// Bounded-variable tableau simplex, exposed for callers that need
// incremental use (feasibility probes and sequential lexicographic
// minimization share one instance).
class Simplex {
 public:
  explicit Simplex(std::size_t n_structural);

  void set_bounds(std::size_t var, std::optional<Rational> lo, std::optional<Rational> hi);
  // coeffs is dense over the structural variables.
  void add_le_row(const RatVec& coeffs, const Rational& rhs);
  void add_eq_row(const RatVec& coeffs, const Rational& rhs);

  // Builds the initial basis and drives out infeasibility. Must be called
  // once, before optimize(). Returns Optimal (meaning: feasible) or
  // Infeasible.
  LPStatus phase1();

  // Minimizes c^T x from the current feasible basis. Returns Optimal or
  // Unbounded. May be called repeatedly with different objectives.
  LPStatus minimize(const RatVec& c);

  // Pins a structural variable to its value in the current solution
  // (tightens both bounds). Keeps the basis feasible.
  void fix_at_current(std::size_t var);

  Rational value_of(std::size_t var) const;
  RatVec structural_values() const;

  // After phase1() returned Infeasible: indices of the rows carrying a
  // nonzero multiplier in the infeasibility certificate (a sound cover of an
  // infeasible subsystem together with the variable bounds).
  std::vector<std::size_t> infeasibility_rows() const;
  // Structural variables whose bounds carry a nonzero multiplier there.
  std::vector<std::size_t> infeasibility_bound_vars() const;

 private:
  enum class VStat : unsigned char { Basic, AtLower, AtUpper, Free };
  struct Bound {
    bool has = false;
    Rational v;
  };

  std::size_t add_column(Bound lo, Bound hi);
  void ensure_setup_done() const;
  Rational nonbasic_value(std::size_t var) const;
  void compute_reduced_costs(const RatVec& full_cost);
  LPStatus run(const RatVec& full_cost);
  void pivot(std::size_t row, std::size_t col);

  std::size_t n_structural_;
  std::size_t n_cols_ = 0;
  std::vector<Bound> lo_, hi_;
  std::vector<VStat> stat_;
  RatMat rows_;           // constraint coefficients over all columns
  RatVec rhs_;
  std::vector<bool> row_is_eq_;
  std::vector<std::size_t> basis_;
  RatVec basic_val_;
  RatVec dcost_;
  bool setup_done_ = false;
  std::vector<std::size_t> artificials_;
  std::vector<std::size_t> slack_cols_;
  std::vector<bool> is_artificial_;
};

}  // namespace plopt
