#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gamma_oracle.hpp"
#include "plopt/errors.hpp"
#include "plopt/gates.hpp"
#include "plopt/lp.hpp"
#include "plopt/solver.hpp"
#include "test_util.hpp"

using namespace plopt;

namespace {

Circuit identity_subgrad(std::size_t n, const Rational& R, const Rational& C) {
  CircuitBuilder sg;
  for (std::size_t j = 0; j < n; ++j) sg.input(Interval(-R, R));
  std::vector<GateRef> params;
  for (std::size_t j = 0; j < n; ++j) params.push_back(sg.input(Interval(-C, C)));
  for (GateRef r : params) sg.mark_primary_output(r);
  return sg.finish();
}

Circuit const_subgrad(std::size_t n, const RatVec& values, const Rational& R) {
  CircuitBuilder sg;
  for (std::size_t j = 0; j < n; ++j) sg.input(Interval(-R, R));
  for (const Rational& v : values) sg.mark_primary_output(sg.constant(v));
  return sg.finish();
}

LinOptGateSpec linear_spec(std::size_t n, const RatMat& A, const Rational& R, const Rational& C) {
  LinOptGateSpec spec;
  spec.n = n;
  spec.m = A.size();
  spec.k = n;
  spec.A = A;
  spec.R = R;
  spec.C = C;
  spec.subgrad = identity_subgrad(n, R, C);
  return spec;
}

// drive a standalone gadget at fixed (b, c)
RatVec gate_output(const Circuit& gadget, const RatVec& b, const RatVec& c) {
  RatVec in = b;
  in.insert(in.end(), c.begin(), c.end());
  SolveOptions opts;
  opts.branch_cap = 4096;
  return solve_pseudo_at(gadget, in, opts).outputs;
}

}  // namespace

TEST_CASE("compute_K examples") {
  {
    LinOptGateSpec spec = linear_spec(1, {}, rat(1), rat(1));
    spec.k = 0;
    spec.subgrad = const_subgrad(1, {rat(3)}, rat(1));
    CHECK(compute_K(spec) == rat(3));
  }
  {
    // subgrad = identity on x itself: one input, one output, K = R = 1
    LinOptGateSpec spec;
    spec.n = 1;
    spec.m = 0;
    spec.k = 0;
    spec.R = 1;
    spec.C = 1;
    CircuitBuilder sg;
    GateRef x = sg.input(Interval(rat(-1), rat(1)));
    sg.mark_primary_output(x);
    spec.subgrad = sg.finish();
    CHECK(compute_K(spec) == rat(1));
  }
  {
    // outputs (x1+x2, x1-x2) on R=1: any bound >= 2*sqrt(2) is accepted
    LinOptGateSpec spec;
    spec.n = 2;
    spec.m = 0;
    spec.k = 0;
    spec.R = 1;
    spec.C = 1;
    CircuitBuilder sg;
    GateRef x1 = sg.input(Interval(rat(-1), rat(1)));
    GateRef x2 = sg.input(Interval(rat(-1), rat(1)));
    sg.mark_primary_output(sg.add(x1, x2));
    sg.mark_primary_output(sg.sub(x1, x2));
    spec.subgrad = sg.finish();
    Rational K = compute_K(spec);
    CHECK(K * K >= rat(8));  // K >= 2 sqrt(2)
  }
}

TEST_CASE("gamma* on the 1x1 matrix is exactly 1/2") {
  CHECK(compute_gamma_star({{rat(1)}}, 1, rat(1)) == rat(1, 2));
}

TEST_CASE("gamma* exact mode sits strictly below every enumerated optimum") {
  TestRng rng(41);
  for (int t = 0; t < 12; ++t) {
    const std::size_t n = 1 + rng.below(2);
    const std::size_t m = 1 + rng.below(2);
    RatMat A;
    for (std::size_t i = 0; i < m; ++i) {
      RatVec row;
      for (std::size_t j = 0; j < n; ++j) row.push_back(rat(rng.range(-2, 2)));
      A.push_back(row);
    }
    Rational gamma = compute_gamma_star(A, n, rat(1));
    CHECK(gamma > 0);
    auto min_opt = gamma_oracle::full_minimum(A, n);
    REQUIRE(min_opt.has_value());
    // every feasible 2-norm optimum is >= (per-coordinate optimum)/sqrt(n)
    CHECK(gamma * sqrt_upper_bound(static_cast<unsigned long>(n)) < *min_opt);
    GammaOptions bitopts;
    bitopts.mode = GammaOptions::Mode::BitBound;
    CHECK(compute_gamma_star(A, n, rat(1), bitopts) <= gamma);
  }
}

TEST_CASE("gamma* exact cap falls back or errors") {
  RatMat A(5, RatVec(5, rat(1)));  // m + 2n = 15 > 12
  GammaOptions opts;
  opts.fallback_to_bitbound = false;
  CHECK_THROWS_AS(compute_gamma_star(A, 5, rat(1), opts), CapError);
  CHECK(compute_gamma_star(A, 5, rat(1)) > 0);  // default falls back
}

TEST_CASE("expand_linopt: boundary optimum at x = 0") {
  // min x s.t. -x <= 0, x in [-1, 1]
  LinOptGateSpec spec = linear_spec(1, {{rat(-1)}}, rat(1), rat(1));
  Circuit gadget = expand_linopt(spec);
  RatVec x = gate_output(gadget, {rat(0)}, {rat(1)});
  CHECK(x[0] == rat(0));
}

TEST_CASE("expand_linopt: interior constraint binds at b") {
  // min -x s.t. x <= 1/2, x in [-1, 1]
  LinOptGateSpec spec = linear_spec(1, {{rat(1)}}, rat(1), rat(1));
  Circuit gadget = expand_linopt(spec);
  RatVec x = gate_output(gadget, {rat(1, 2)}, {rat(-1)});
  CHECK(x[0] == rat(1, 2));
}

TEST_CASE("expand_linopt: optimal face accepted by value") {
  // min x1 + x2 s.t. -x1 - x2 <= -1, box [-1,1]^2: optimal value 1
  LinOptGateSpec spec = linear_spec(2, {{rat(-1), rat(-1)}}, rat(1), rat(1));
  Circuit gadget = expand_linopt(spec);
  RatVec x = gate_output(gadget, {rat(-1)}, {rat(1), rat(1)});
  CHECK(x[0] + x[1] == rat(1));
}

TEST_CASE("gate optimality and KKT certificate on random linear programs") {
  TestRng rng(43);
  for (int t = 0; t < 25; ++t) {
    const std::size_t n = 1 + rng.below(3);
    const std::size_t m = 1 + rng.below(4);
    const Rational R = rat(2);
    RatMat A;
    RatVec x0(n), b(m), c(n);
    for (std::size_t j = 0; j < n; ++j) x0[j] = rat(rng.range(-1, 1));
    for (std::size_t i = 0; i < m; ++i) {
      RatVec row(n);
      for (std::size_t j = 0; j < n; ++j) row[j] = rat(rng.range(-3, 3));
      Rational ax(0);
      for (std::size_t j = 0; j < n; ++j) ax += row[j] * x0[j];
      A.push_back(row);
      b[i] = ax + rat(rng.range(0, 3));  // feasible by construction
    }
    for (std::size_t j = 0; j < n; ++j) c[j] = rat(rng.range(-3, 3));
    LinOptGateSpec spec = linear_spec(n, A, R, rat(3));
    LinOptWiring wiring;
    Circuit gadget = expand_linopt(spec, {}, &wiring);
    RatVec in = b;
    in.insert(in.end(), c.begin(), c.end());
    SolveOptions sopts;
    sopts.branch_cap = 4096;
    PseudoOutput out = solve_pseudo_at(gadget, in, sopts);
    RatVec x = out.outputs;

    // objective equality with the oracle
    REQUIRE(verify_gate_optimality(spec, b, c, x));

    // KKT: eps v + Atilde^T mutilde = 0 with complementary slackness
    RatVec mu(m);
    for (std::size_t i = 0; i < m; ++i) mu[i] = out.aux[wiring.aux_mu_first + i];
    RatVec w(n);  // unprojected step
    for (std::size_t j = 0; j < n; ++j) {
      Rational atmu(0);
      for (std::size_t i = 0; i < m; ++i) atmu += A[i][j] * mu[i];
      w[j] = x[j] - wiring.epsilon * c[j] - atmu;
    }
    for (std::size_t j = 0; j < n; ++j) {
      Rational lam_plus(0), lam_minus(0);
      if (x[j] == R && w[j] >= x[j]) lam_plus = w[j] - x[j];
      if (x[j] == -R && w[j] <= x[j]) lam_minus = x[j] - w[j];
      // stationarity per coordinate
      Rational atmu(0);
      for (std::size_t i = 0; i < m; ++i) atmu += A[i][j] * mu[i];
      REQUIRE(wiring.epsilon * c[j] + atmu + lam_plus - lam_minus == 0);
      if (lam_plus > 0) REQUIRE(x[j] == R);
      if (lam_minus > 0) REQUIRE(x[j] == -R);
    }
    for (std::size_t i = 0; i < m; ++i) {
      REQUIRE(mu[i] >= 0);
      if (mu[i] > 0) {
        Rational ax(0);
        for (std::size_t j = 0; j < n; ++j) ax += A[i][j] * x[j];
        REQUIRE(ax == b[i]);  // complementary slackness (x is feasible here)
      }
    }
  }
}

TEST_CASE("mult_by_heaviside realizes H(x) * y") {
  Circuit c = mult_by_heaviside();
  SolveOptions opts;
  opts.branch_cap = 4096;
  CHECK(solve_pseudo_at(c, {rat(2), rat(5)}, opts).outputs[0] == rat(5));
  CHECK(solve_pseudo_at(c, {rat(-1), rat(5)}, opts).outputs[0] == rat(0));
  Rational v = solve_pseudo_at(c, {rat(0), rat(5)}, opts).outputs[0];
  CHECK(v >= 0);
  CHECK(v <= 5);
  CHECK(solve_pseudo_at(c, {rat(3), rat(-4)}, opts).outputs[0] == rat(-4));
}

TEST_CASE("build_feasibility honours active and inactive conditionals") {
  // one conditional h(y) = y - 1 guarding x <= 0 on the box [-1, 1]
  FeasibilitySpec spec;
  spec.n = 1;
  spec.m = 1;
  spec.A = {{rat(1)}};
  {
    CircuitBuilder h;
    GateRef y = h.input(Interval(rat(-4), rat(4)));
    h.mark_primary_output(h.sub(y, h.constant(rat(1))));
    spec.conds.push_back(h.finish());
  }
  spec.R = 1;
  spec.input_bound = 4;
  Circuit gadget = build_feasibility(spec);
  SolveOptions opts;
  opts.branch_cap = 4096;
  // antecedent active at y = 2
  Rational x_active = solve_pseudo_at(gadget, {rat(0), rat(2)}, opts).outputs[0];
  CHECK(x_active <= 0);
  CHECK(rat_abs(x_active) <= 1);
  // antecedent inactive at y = 0: any box point valid
  Rational x_idle = solve_pseudo_at(gadget, {rat(0), rat(0)}, opts).outputs[0];
  CHECK(rat_abs(x_idle) <= 1);
}

TEST_CASE("contradictory constraints deactivated by the gate input stay solvable") {
  // x <= -1 when y > 0, and -x <= -1 (x >= 1) when -y > 0: both off at y = 0
  FeasibilitySpec spec;
  spec.n = 1;
  spec.m = 2;
  spec.A = {{rat(1)}, {rat(-1)}};
  {
    CircuitBuilder h;
    GateRef y = h.input(Interval(rat(-4), rat(4)));
    h.mark_primary_output(y);
    spec.conds.push_back(h.finish());
  }
  {
    CircuitBuilder h;
    GateRef y = h.input(Interval(rat(-4), rat(4)));
    h.mark_primary_output(h.scale(rat(-1), y));
    spec.conds.push_back(h.finish());
  }
  spec.R = 1;
  spec.input_bound = 4;
  Circuit gadget = build_feasibility(spec);
  SolveOptions opts;
  opts.branch_cap = 4096;
  Rational x = solve_pseudo_at(gadget, {rat(-1), rat(-1), rat(0)}, opts).outputs[0];
  CHECK(rat_abs(x) <= 1);  // feasible output exists with both antecedents off
}

TEST_CASE("qapp_witness follows the longest-path formula") {
  auto constant_cond = [](const Rational& v) {
    CircuitBuilder b;
    b.input(Interval(rat(0), rat(1)));
    b.mark_primary_output(b.constant(v));
    return b.finish();
  };
  {
    QAppSpec spec;
    spec.m = 2;
    spec.rho = rat(1, 2);
    spec.h = {constant_cond(rat(1)), constant_cond(rat(0))};  // edge (1 -> 2)
    RatVec w = qapp_witness(spec, {rat(0)});
    CHECK(w == RatVec{rat(1, 3), rat(2, 3)});
  }
  {
    QAppSpec spec;
    spec.m = 3;
    spec.rho = rat(1, 7);
    spec.h = {constant_cond(rat(1)), constant_cond(rat(1)), constant_cond(rat(1))};
    RatVec w = qapp_witness(spec, {rat(0)});
    CHECK(w == RatVec{rat(1, 3), rat(1, 3), rat(1, 3)});
  }
}

TEST_CASE("qapp_witness rejects cyclic feasibility graphs") {
  // h values drawn from the gate input create a 2-cycle via h0 > h1 > h0:
  // impossible with plain values, so wire a cycle through distinct outputs.
  QAppSpec spec;
  spec.m = 2;
  spec.rho = rat(1, 2);
  {
    CircuitBuilder b;
    GateRef y = b.input(Interval(rat(0), rat(1)));
    b.mark_primary_output(y);
    spec.h.push_back(b.finish());
  }
  {
    CircuitBuilder b;
    GateRef y = b.input(Interval(rat(0), rat(1)));
    b.mark_primary_output(b.add(y, b.constant(rat(1))));
    spec.h.push_back(b.finish());
  }
  // h0 = y, h1 = y + 1: acyclic (edge 1 -> 0 only); no throw
  CHECK(qapp_witness(spec, {rat(0)}).size() == 2);
  // a genuine cycle cannot arise from real-valued h, so check the guard on
  // properties instead: witness satisfies all three constraint families
  RatVec w = qapp_witness(spec, {rat(1, 2)});
  Rational sum(0);
  for (const Rational& q : w) sum += q;
  CHECK(sum == 1);
  CHECK(w[1] <= spec.rho * w[0]);
  for (const Rational& q : w) CHECK(q >= spec.rho * spec.rho / 2);
}

TEST_CASE("feasibility gadget soundness on random specs") {
  TestRng rng(47);
  SolveOptions opts;
  opts.branch_cap = 1u << 14;
  for (int t = 0; t < 8; ++t) {
    const std::size_t n = 1 + rng.below(2);
    const std::size_t m = 1 + rng.below(2);
    FeasibilitySpec spec;
    spec.n = n;
    spec.m = m;
    spec.R = 2;
    spec.input_bound = 4;
    RatVec y_val{rng.rational(2, 2)};
    for (std::size_t i = 0; i < m; ++i) {
      RatVec row;
      for (std::size_t j = 0; j < n; ++j) row.push_back(rat(rng.range(-1, 1)));
      spec.A.push_back(row);
      CircuitBuilder h;
      GateRef y = h.input(Interval(rat(-4), rat(4)));
      h.mark_primary_output(h.affine(rng.rational(1, 2), {rat(rng.range(-1, 1))}, {y}));
      spec.conds.push_back(h.finish());
    }
    // choose b large enough that active constraints stay satisfiable
    RatVec in;
    for (std::size_t i = 0; i < m; ++i) in.push_back(rat(rng.range(0, 2)));
    in.push_back(y_val[0]);
    Circuit gadget = build_feasibility(spec);
    RatVec x = solve_pseudo_at(gadget, in, opts).outputs;
    for (std::size_t i = 0; i < m; ++i) {
      Rational h = eval(spec.conds[i], y_val, {}).primary[0];
      if (h <= 0) continue;
      Rational ax(0);
      for (std::size_t j = 0; j < n; ++j) ax += spec.A[i][j] * x[j];
      REQUIRE(ax <= in[i]);
    }
  }
}

TEST_CASE("linopt spec text round trip") {
  LinOptGateSpec spec = linear_spec(2, {{rat(1), rat(-1, 2)}}, rat(3), rat(2));
  std::string text = linopt_spec_to_text(spec);
  LinOptGateSpec back = linopt_spec_from_text(text);
  CHECK(linopt_spec_to_text(back) == text);
}
