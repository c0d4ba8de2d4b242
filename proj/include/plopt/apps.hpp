#pragma once

#include <string>
#include <variant>
#include <vector>

#include "plopt/circuit.hpp"
#include "plopt/gates.hpp"
#include "plopt/solver.hpp"

namespace plopt::apps {

struct BimatrixGame {
  std::size_t m1 = 0, m2 = 0;
  RatMat a1, a2;  // m1 x m2 payoff matrices
  void validate() const;
};

struct ThresholdGame {
  std::size_t n = 0;
  std::vector<std::vector<std::size_t>> in_neighbors;
  Rational t;  // threshold in (0,1)
  void validate() const;
};

struct EpsProperInstance {
  BimatrixGame game;
  Rational eps;
  void validate() const;
};

struct ExchangeMarket {
  std::size_t n = 0, m = 0;  // consumers, goods
  RatMat endowments;         // n x m, column sums 1
  RatMat utilities;          // n x m, >= 0
  void validate() const;
  // Largest 1/2^k below both the bang-per-buck separation threshold and
  // min positive w_ij / m.
  Rational market_epsilon() const;
};

struct PacingGame {
  std::size_t n = 0, m = 0;  // buyers, items
  RatMat values;             // n x m
  RatVec budgets;            // n, positive
  void validate() const;
  RatVec alpha_floors() const;  // l_i = min(1, B_i / sum_j v_ij)
  Rational second_highest_bid(const RatVec& alpha, std::size_t item) const;
  Rational highest_bid(const RatVec& alpha, std::size_t item) const;
};

// Cake divisions and rent divisions share the data shape: per agent and
// piece/room a valuation circuit over the division simplex.
struct DivisionInstance {
  std::size_t n = 0;
  std::vector<std::vector<Circuit>> valuations;  // n x n, each n inputs -> 1 output
  void validate() const;
};
struct CakeInstance : DivisionInstance {};
struct RentalInstance : DivisionInstance {};

using Instance = std::variant<BimatrixGame, ThresholdGame, EpsProperInstance, ExchangeMarket,
                              PacingGame, CakeInstance, RentalInstance>;

// Compiled form: the pseudo-circuit self-map, its solve box, and the wire /
// aux bookkeeping needed to interpret solutions.
struct CompiledApp {
  Circuit circuit;
  Box domain;
  // Aux slices of spliced valuation circuits (cake/rental), row-major by
  // (agent, piece): offset into the aux vector and length.
  std::vector<std::pair<std::size_t, std::size_t>> valuation_aux;
  Rational epsilon;  // market / eps-proper epsilon where applicable
};

CompiledApp compile(const Instance& instance, const GammaOptions& options = {});

// Spec-surface compilers returning the bare circuit.
Circuit compile_bimatrix(const BimatrixGame& g, const GammaOptions& options = {});
Circuit compile_threshold(const ThresholdGame& g, const GammaOptions& options = {});
Circuit compile_eps_proper(const EpsProperInstance& inst, const GammaOptions& options = {});
Circuit compile_exchange_market(const ExchangeMarket& mkt, const GammaOptions& options = {});
Circuit compile_pacing(const PacingGame& g, const GammaOptions& options = {});
Circuit compile_cake(const CakeInstance& inst, const GammaOptions& options = {});
Circuit compile_rental(const RentalInstance& inst, const GammaOptions& options = {});

// Product map of best-response oracles over box domains; fixed points are
// profiles where every oracle reproduces its player's strategy.
Circuit compile_plbro(const std::vector<Circuit>& oracles, const std::vector<Box>& domains);
Box plbro_domain(const std::vector<Box>& domains);

// Domain solution: the fixed point of the compiled circuit, interpreted per
// kind through the instance.
struct Solution {
  FixedPointSolution fp;
};

Solution solve(const Instance& instance, const GammaOptions& gamma = {},
               const SolveOptions& solve_options = {});

struct VerifyReport {
  bool ok = true;
  std::vector<std::string> violations;
  void fail(const std::string& what) {
    ok = false;
    violations.push_back(what);
  }
};

// Exact rational check of the domain's equilibrium conditions at the
// delivered solution; lists every violated condition.
VerifyReport verify_solution(const Instance& instance, const Solution& sol);

// Interpretation helpers (views into Solution.fp.inputs).
struct BimatrixView {
  RatVec x1, x2;
};
BimatrixView bimatrix_view(const BimatrixGame& g, const RatVec& inputs);

struct MarketView {
  RatVec prices;
  RatMat spend;        // n x m
  RatMat allocations;  // x_ij = q_ij / p_j
};
MarketView market_view(const ExchangeMarket& mkt, const RatVec& inputs);

struct PacingView {
  RatVec alpha;
  RatMat spend;        // n x m
  RatMat allocations;  // x_ij = q_ij / p_j, first winner when p_j = 0
  RatVec prices;
};
PacingView pacing_view(const PacingGame& g, const RatVec& inputs);

struct DivisionView {
  RatVec x;       // the division
  RatMat caps;    // c_ij
  RatMat flow;    // y_ij
};
DivisionView division_view(const DivisionInstance& inst, const RatVec& inputs);

// Instance JSON: {"kind": ..., ...} with all rationals as "num/den" strings
// and circuits embedded in the shared text format. Floats are rejected.
Instance instance_from_json(const std::string& text);
std::string instance_to_json(const Instance& instance);
Instance read_instance_file(const std::string& path);

}  // namespace plopt::apps
