#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "plopt/errors.hpp"
#include "plopt/solver.hpp"
#include "test_util.hpp"

using namespace plopt;

namespace {

Circuit one_minus_x() {
  CircuitBuilder b;
  GateRef x = b.input(Interval(rat(0), rat(1)));
  b.mark_primary_output(b.sub(b.constant(rat(1)), x));
  return b.finish();
}

Circuit clamp01_of_x() {
  CircuitBuilder b;
  GateRef x = b.input(Interval(rat(0), rat(1)));
  b.mark_primary_output(b.min(b.constant(rat(1)), b.max(b.constant(rat(0)), x)));
  return b.finish();
}

// a self-map with a planted fixed point: x_i -> clamp01(plant_i + slope * (x_{i-1} - plant_{i-1}))
Circuit planted_circuit(TestRng& rng, std::size_t n, RatVec& plant) {
  CircuitBuilder b;
  plant.clear();
  std::vector<GateRef> x;
  for (std::size_t i = 0; i < n; ++i) {
    plant.push_back(rat(rng.range(1, 7), 8));
    x.push_back(b.input(Interval(rat(0), rat(1))));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t prev = (i + n - 1) % n;
    Rational slope = rat(rng.range(-1, 1), 2);
    GateRef lin = b.affine(plant[i] - slope * plant[prev], {slope}, {x[prev]});
    b.mark_primary_output(b.min(b.constant(rat(1)), b.max(b.constant(rat(0)), lin)));
  }
  return b.finish();
}

}  // namespace

TEST_CASE("unique fixed point of 1 - x") {
  Circuit c = one_minus_x();
  FixedPointSolution sol = find_fixed_point(c, Box::uniform(1, rat(0), rat(1)));
  CHECK(sol.inputs[0] == rat(1, 2));
  CHECK(verify_fixed_point(c, sol));
}

TEST_CASE("identity-like map picks the canonical smallest point") {
  FixedPointSolution sol = find_fixed_point(clamp01_of_x(), Box::uniform(1, rat(0), rat(1)));
  CHECK(sol.inputs[0] == rat(0));
}

TEST_CASE("verify_fixed_point distinguishes fixed from non-fixed points") {
  Circuit c = one_minus_x();
  CHECK(verify_fixed_point(c, {{rat(1, 2)}, {}, {}}));
  CHECK_FALSE(verify_fixed_point(c, {{rat(1, 3)}, {}, {}}));
}

TEST_CASE("heaviside block interior fixed point verifies") {
  Circuit h = heaviside();
  EvalResult r = eval(h, {rat(0)}, {rat(1, 4)});
  CHECK(r.aux_out[0] == rat(1, 4));
  CHECK(r.primary[0] == rat(1, 4));
}

TEST_CASE("branch cap is enforced") {
  SolveOptions opts;
  opts.branch_cap = 1;  // the clamp has 2 branching gates
  CHECK_THROWS_AS(find_fixed_point(clamp01_of_x(), Box::uniform(1, rat(0), rat(1)), opts),
                  CapError);
}

TEST_CASE("planted fixed points are found and verify") {
  TestRng rng(31);
  for (int t = 0; t < 40; ++t) {
    RatVec plant;
    const std::size_t n = 1 + rng.below(4);
    Circuit c = planted_circuit(rng, n, plant);
    FixedPointSolution sol = find_fixed_point(c, Box::uniform(n, rat(0), rat(1)));
    CHECK(verify_fixed_point(c, sol));
  }
}

TEST_CASE("determinism across repeated runs") {
  TestRng rng(37);
  RatVec plant;
  Circuit c = planted_circuit(rng, 3, plant);
  std::string first = solution_to_text(find_fixed_point(c, Box::uniform(3, rat(0), rat(1))));
  for (int t = 0; t < 5; ++t)
    CHECK(solution_to_text(find_fixed_point(c, Box::uniform(3, rat(0), rat(1)))) == first);
}

TEST_CASE("solution text round trip") {
  FixedPointSolution sol;
  sol.inputs = {rat(1, 2), rat(-3, 7)};
  sol.aux = {rat(1)};
  sol.pattern.decisions = "LRL";
  FixedPointSolution back = solution_from_text(solution_to_text(sol));
  CHECK(back.inputs == sol.inputs);
  CHECK(back.aux == sol.aux);
  CHECK(back.pattern.decisions == sol.pattern.decisions);
}

TEST_CASE("solve_pseudo_at drives heaviside to its correspondence") {
  Circuit h = heaviside();
  CHECK(solve_pseudo_at(h, {rat(1)}).outputs[0] == rat(1));
  CHECK(solve_pseudo_at(h, {rat(-1)}).outputs[0] == rat(0));
  Rational mid = solve_pseudo_at(h, {rat(0)}).outputs[0];
  CHECK(mid >= 0);
  CHECK(mid <= 1);
}
