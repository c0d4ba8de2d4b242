#include "plopt/apps.hpp"

#include <algorithm>
#include <functional>

#include "plopt/errors.hpp"

namespace plopt::apps {

namespace {

// subgradient that just forwards the k = n objective parameters
Circuit identity_subgrad(std::size_t n) {
  CircuitBuilder sg;
  for (std::size_t j = 0; j < n; ++j) sg.input(Interval(Rational(-1), Rational(1)));
  std::vector<GateRef> params;
  for (std::size_t j = 0; j < n; ++j) params.push_back(sg.input(Interval(Rational(-1), Rational(1))));
  for (GateRef r : params) sg.mark_primary_output(r);
  return sg.finish();
}

// constant subgradient (objective independent of gate inputs)
Circuit const_subgrad(std::size_t n, const Rational& value) {
  CircuitBuilder sg;
  for (std::size_t j = 0; j < n; ++j) sg.input(Interval(Rational(-1), Rational(1)));
  for (std::size_t j = 0; j < n; ++j) sg.mark_primary_output(sg.constant(value));
  return sg.finish();
}

// rows of { sum x = 1 (as a pair), x >= 0 } over n variables
void simplex_rows(std::size_t n, RatMat& A, std::vector<Rational>& b_consts) {
  A.emplace_back(n, Rational(1));
  b_consts.emplace_back(1);
  A.emplace_back(n, Rational(-1));
  b_consts.emplace_back(-1);
  for (std::size_t j = 0; j < n; ++j) {
    RatVec row(n, Rational(0));
    row[j] = -1;
    A.push_back(std::move(row));
    b_consts.emplace_back(0);
  }
}

// best-response LP over the simplex: min c^T y, y in simplex; c given by wires
std::vector<GateRef> emit_simplex_lp(CircuitBuilder& b, const std::vector<GateRef>& c_wires,
                                     const GammaOptions& options) {
  const std::size_t n = c_wires.size();
  LinOptGateSpec spec;
  spec.n = n;
  spec.k = n;
  std::vector<Rational> b_consts;
  simplex_rows(n, spec.A, b_consts);
  spec.m = spec.A.size();
  spec.R = 1;
  Rational c_bound(1);
  for (GateRef r : c_wires) c_bound = rat_max(c_bound, b.range_of(r).abs_bound());
  spec.C = c_bound;
  spec.subgrad = identity_subgrad(n);
  std::vector<GateRef> b_refs;
  for (const Rational& q : b_consts) b_refs.push_back(b.constant(q));
  return emit_linopt(b, spec, b_refs, c_wires, options);
}

Circuit tiny_affine_circuit(std::size_t arity, const Rational& constant,
                            const std::vector<Rational>& coeffs) {
  CircuitBuilder cb;
  std::vector<GateRef> in;
  for (std::size_t i = 0; i < arity; ++i)
    in.push_back(cb.input(Interval(Rational(-1024), Rational(1024))));
  cb.mark_primary_output(cb.affine(constant, coeffs, in));
  return cb.finish();
}

Rational pow_rational(const Rational& base, std::size_t e) {
  Rational r(1);
  for (std::size_t i = 0; i < e; ++i) r *= base;
  return r;
}

}  // namespace

// ---------- validation ----------

void BimatrixGame::validate() const {
  if (m1 == 0 || m2 == 0) throw ContractError("bimatrix: empty action set");
  if (a1.size() != m1 || a2.size() != m1) throw ContractError("bimatrix: matrix row count");
  for (const auto& row : a1)
    if (row.size() != m2) throw ContractError("bimatrix: a1 width");
  for (const auto& row : a2)
    if (row.size() != m2) throw ContractError("bimatrix: a2 width");
}

void ThresholdGame::validate() const {
  if (t <= 0 || t >= 1) throw ContractError("threshold: t must be in (0,1)");
  if (in_neighbors.size() != n) throw ContractError("threshold: neighborhood count");
  for (const auto& nb : in_neighbors)
    for (std::size_t j : nb)
      if (j >= n) throw ContractError("threshold: neighbor index out of range");
}

void EpsProperInstance::validate() const {
  game.validate();
  if (eps <= 0) throw ContractError("eps-proper: eps must be positive");
}

void ExchangeMarket::validate() const {
  if (n == 0 || m == 0) throw ContractError("market: empty");
  if (endowments.size() != n || utilities.size() != n) throw ContractError("market: row count");
  for (const auto& row : endowments)
    if (row.size() != m) throw ContractError("market: endowment width");
  for (const auto& row : utilities)
    if (row.size() != m) throw ContractError("market: utility width");
  for (std::size_t j = 0; j < m; ++j) {
    Rational colsum(0);
    bool valued = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (endowments[i][j] < 0 || utilities[i][j] < 0)
        throw ContractError("market: negative entry");
      colsum += endowments[i][j];
      valued = valued || utilities[i][j] > 0;
    }
    if (colsum != 1) throw ContractError("market: endowments of good " + std::to_string(j) +
                                         " must sum to 1");
    if (!valued) throw ContractError("market: zero-utility good " + std::to_string(j));
  }
  for (std::size_t i = 0; i < n; ++i) {
    bool endows = false, values = false;
    for (std::size_t j = 0; j < m; ++j) {
      endows = endows || endowments[i][j] > 0;
      values = values || utilities[i][j] > 0;
    }
    if (!endows)
      throw ContractError("market: consumer " + std::to_string(i) + " has empty endowment");
    if (!values) throw ContractError("market: reducible (consumer " + std::to_string(i) +
                                     " values no good)");
  }
  // Non-reducibility == strong connectivity of the consumer digraph with an
  // edge i -> i' when i values a good partly endowed by i'.
  std::vector<std::vector<std::size_t>> adj(n), radj(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t i2 = 0; i2 < n; ++i2) {
      if (i == i2) continue;
      for (std::size_t j = 0; j < m; ++j)
        if (utilities[i][j] > 0 && endowments[i2][j] > 0) {
          adj[i].push_back(i2);
          radj[i2].push_back(i);
          break;
        }
    }
  auto reaches_all = [&](const std::vector<std::vector<std::size_t>>& g) {
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    std::size_t count = 1;
    while (!stack.empty()) {
      std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v : g[u])
        if (!seen[v]) {
          seen[v] = true;
          ++count;
          stack.push_back(v);
        }
    }
    return count == n;
  };
  if (n > 1 && (!reaches_all(adj) || !reaches_all(radj)))
    throw ContractError("market: reducible (economy graph not strongly connected)");
}

Rational ExchangeMarket::market_epsilon() const {
  Rational limit(1);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      if (endowments[i][j] > 0)
        limit = rat_min(limit, endowments[i][j] / Rational(static_cast<unsigned long>(m)));
      if (utilities[i][j] == 0) continue;
      for (std::size_t j2 = 0; j2 < m; ++j2)
        if (j2 != j && utilities[i][j2] > 0)
          limit = rat_min(limit, utilities[i][j] / utilities[i][j2]);
    }
  return largest_inverse_power_of_two_below(limit);
}

void PacingGame::validate() const {
  if (n == 0 || m == 0) throw ContractError("pacing: empty");
  if (values.size() != n || budgets.size() != n) throw ContractError("pacing: row count");
  for (const auto& row : values) {
    if (row.size() != m) throw ContractError("pacing: value width");
    for (const Rational& v : row)
      if (v < 0) throw ContractError("pacing: negative value");
  }
  for (const Rational& b : budgets)
    if (b <= 0) throw ContractError("pacing: budgets must be positive");
  for (std::size_t j = 0; j < m; ++j) {
    bool valued = false;
    for (std::size_t i = 0; i < n; ++i) valued = valued || values[i][j] > 0;
    if (!valued) throw ContractError("pacing: item " + std::to_string(j) + " valued by no buyer");
  }
}

RatVec PacingGame::alpha_floors() const {
  RatVec l(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rational total(0);
    for (std::size_t j = 0; j < m; ++j) total += values[i][j];
    l[i] = total == 0 ? Rational(1) : rat_min(Rational(1), budgets[i] / total);
  }
  return l;
}

Rational PacingGame::highest_bid(const RatVec& alpha, std::size_t item) const {
  Rational h(0);
  for (std::size_t i = 0; i < n; ++i) h = rat_max(h, alpha[i] * values[i][item]);
  return h;
}

Rational PacingGame::second_highest_bid(const RatVec& alpha, std::size_t item) const {
  // min_i max_{i' != i} alpha_{i'} v_{i'j}; the empty inner max is 0.
  Rational best;
  bool have = false;
  for (std::size_t i = 0; i < n; ++i) {
    Rational inner(0);
    for (std::size_t i2 = 0; i2 < n; ++i2)
      if (i2 != i) inner = rat_max(inner, alpha[i2] * values[i2][item]);
    if (!have || inner < best) {
      best = inner;
      have = true;
    }
  }
  return have ? best : Rational(0);
}

void DivisionInstance::validate() const {
  if (n == 0) throw ContractError("division: empty");
  if (valuations.size() != n) throw ContractError("division: valuation rows");
  for (const auto& row : valuations) {
    if (row.size() != n) throw ContractError("division: valuation row width");
    for (const Circuit& u : row) {
      u.check_well_formed();
      if (u.n_inputs != n || u.primary_outputs.size() != 1)
        throw ContractError("division: valuations must map the division to one value");
    }
  }
}

// ---------- compilers ----------

Circuit compile_bimatrix(const BimatrixGame& g, const GammaOptions& options) {
  g.validate();
  CircuitBuilder b;
  std::vector<GateRef> x1, x2;
  for (std::size_t j = 0; j < g.m1; ++j) x1.push_back(b.input(Interval(Rational(0), Rational(1))));
  for (std::size_t j = 0; j < g.m2; ++j) x2.push_back(b.input(Interval(Rational(0), Rational(1))));
  // player 1 maximizes y^T A1 x2: objective wires -(A1 x2)
  std::vector<GateRef> c1(g.m1), c2(g.m2);
  for (std::size_t j = 0; j < g.m1; ++j) {
    std::vector<Rational> coeffs;
    for (std::size_t j2 = 0; j2 < g.m2; ++j2) coeffs.push_back(-g.a1[j][j2]);
    c1[j] = b.affine(Rational(0), coeffs, x2);
  }
  for (std::size_t j2 = 0; j2 < g.m2; ++j2) {
    std::vector<Rational> coeffs;
    for (std::size_t j = 0; j < g.m1; ++j) coeffs.push_back(-g.a2[j][j2]);
    c2[j2] = b.affine(Rational(0), coeffs, x1);
  }
  std::vector<GateRef> out1 = emit_simplex_lp(b, c1, options);
  std::vector<GateRef> out2 = emit_simplex_lp(b, c2, options);
  for (GateRef r : out1) b.mark_primary_output(r);
  for (GateRef r : out2) b.mark_primary_output(r);
  return b.finish();
}

Circuit compile_threshold(const ThresholdGame& g, const GammaOptions& options) {
  g.validate();
  CircuitBuilder b;
  std::vector<GateRef> x;
  for (std::size_t i = 0; i < g.n; ++i) x.push_back(b.input(Interval(Rational(0), Rational(1))));
  std::vector<GateRef> outs(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    std::vector<GateRef> nbrs;
    for (std::size_t j : g.in_neighbors[i]) nbrs.push_back(x[j]);
    GateRef sum = b.affine(Rational(0), std::vector<Rational>(nbrs.size(), Rational(1)), nbrs);
    FeasibilitySpec spec;
    spec.n = 1;
    // sum > t => y = 0 (pair), sum < t => y = 1 (pair), 0 <= y <= 1
    spec.A = {{Rational(1)}, {Rational(-1)}, {Rational(1)},
              {Rational(-1)}, {Rational(1)}, {Rational(-1)}};
    spec.m = 6;
    spec.conds.push_back(tiny_affine_circuit(1, -g.t, {Rational(1)}));   // y - t
    spec.conds.push_back(tiny_affine_circuit(1, -g.t, {Rational(1)}));
    spec.conds.push_back(tiny_affine_circuit(1, g.t, {Rational(-1)}));   // t - y
    spec.conds.push_back(tiny_affine_circuit(1, g.t, {Rational(-1)}));
    spec.conds.push_back(tiny_affine_circuit(1, Rational(1), {Rational(0)}));
    spec.conds.push_back(tiny_affine_circuit(1, Rational(1), {Rational(0)}));
    spec.R = 1;
    spec.input_bound = rat_max(Rational(1), Rational(static_cast<unsigned long>(g.n)));
    std::vector<GateRef> b_refs = {b.constant(Rational(0)), b.constant(Rational(0)),
                                   b.constant(Rational(1)), b.constant(Rational(-1)),
                                   b.constant(Rational(1)), b.constant(Rational(0))};
    outs[i] = emit_feasibility(b, spec, b_refs, {sum}, options)[0];
  }
  for (GateRef r : outs) b.mark_primary_output(r);
  return b.finish();
}

namespace {

// feasibility gadget for one player's eps-proper best response
std::vector<GateRef> emit_eps_proper_player(CircuitBuilder& b, std::size_t mi,
                                            const Rational& eps,
                                            const std::vector<GateRef>& payoff_wires,
                                            const GammaOptions& options) {
  FeasibilitySpec spec;
  spec.n = mi;
  const Rational floor = pow_rational(eps, mi) / Rational(static_cast<unsigned long>(mi));
  std::vector<GateRef> b_refs;
  // (A x)_j < (A x)_{j'} => x_j <= eps x_{j'}
  for (std::size_t j = 0; j < mi; ++j)
    for (std::size_t j2 = 0; j2 < mi; ++j2) {
      if (j == j2) continue;
      RatVec row(mi, Rational(0));
      row[j] = 1;
      row[j2] = -eps;
      spec.A.push_back(std::move(row));
      std::vector<Rational> coeffs(mi, Rational(0));
      coeffs[j2] = 1;
      coeffs[j] = -1;
      spec.conds.push_back(tiny_affine_circuit(mi, Rational(0), coeffs));
      b_refs.push_back(b.constant(Rational(0)));
    }
  // sum = 1 pair and floors
  spec.A.emplace_back(mi, Rational(1));
  spec.conds.push_back(tiny_affine_circuit(mi, Rational(1), std::vector<Rational>(mi, Rational(0))));
  b_refs.push_back(b.constant(Rational(1)));
  spec.A.emplace_back(mi, Rational(-1));
  spec.conds.push_back(tiny_affine_circuit(mi, Rational(1), std::vector<Rational>(mi, Rational(0))));
  b_refs.push_back(b.constant(Rational(-1)));
  for (std::size_t j = 0; j < mi; ++j) {
    RatVec row(mi, Rational(0));
    row[j] = -1;
    spec.A.push_back(std::move(row));
    spec.conds.push_back(tiny_affine_circuit(mi, Rational(1), std::vector<Rational>(mi, Rational(0))));
    b_refs.push_back(b.constant(-floor));
  }
  spec.m = spec.A.size();
  spec.R = 1;
  Rational bound(1);
  for (GateRef r : payoff_wires) bound = rat_max(bound, b.range_of(r).abs_bound());
  spec.input_bound = bound;
  return emit_feasibility(b, spec, b_refs, payoff_wires, options);
}

}  // namespace

Circuit compile_eps_proper(const EpsProperInstance& inst, const GammaOptions& options) {
  inst.validate();
  const BimatrixGame& g = inst.game;
  CircuitBuilder b;
  std::vector<GateRef> x1, x2;
  for (std::size_t j = 0; j < g.m1; ++j) x1.push_back(b.input(Interval(Rational(0), Rational(1))));
  for (std::size_t j = 0; j < g.m2; ++j) x2.push_back(b.input(Interval(Rational(0), Rational(1))));
  std::vector<GateRef> u1(g.m1), u2(g.m2);
  for (std::size_t j = 0; j < g.m1; ++j) u1[j] = b.affine(Rational(0), g.a1[j], x2);
  for (std::size_t j2 = 0; j2 < g.m2; ++j2) {
    std::vector<Rational> coeffs;
    for (std::size_t j = 0; j < g.m1; ++j) coeffs.push_back(g.a2[j][j2]);
    u2[j2] = b.affine(Rational(0), coeffs, x1);
  }
  std::vector<GateRef> out1 = emit_eps_proper_player(b, g.m1, inst.eps, u1, options);
  std::vector<GateRef> out2 = emit_eps_proper_player(b, g.m2, inst.eps, u2, options);
  for (GateRef r : out1) b.mark_primary_output(r);
  for (GateRef r : out2) b.mark_primary_output(r);
  return b.finish();
}

Circuit compile_exchange_market(const ExchangeMarket& mkt, const GammaOptions& options) {
  mkt.validate();
  const Rational eps = mkt.market_epsilon();
  const Rational floor = pow_rational(eps, mkt.m) / Rational(static_cast<unsigned long>(mkt.m));
  CircuitBuilder b;
  std::vector<GateRef> p(mkt.m);
  for (std::size_t j = 0; j < mkt.m; ++j) p[j] = b.input(Interval(floor, Rational(1)));
  std::vector<std::vector<GateRef>> q(mkt.n, std::vector<GateRef>(mkt.m));
  for (std::size_t i = 0; i < mkt.n; ++i)
    for (std::size_t j = 0; j < mkt.m; ++j)
      q[i][j] = b.input(Interval(Rational(0), Rational(1)));





  // Consumer LPs over expenditures on positively valued goods.
  std::vector<std::vector<GateRef>> q_out(mkt.n, std::vector<GateRef>(mkt.m));
  for (std::size_t i = 0; i < mkt.n; ++i) {
    std::vector<std::size_t> valued;
    for (std::size_t j = 0; j < mkt.m; ++j)
      if (mkt.utilities[i][j] > 0) valued.push_back(j);
    GateRef budget = b.affine(Rational(0), mkt.endowments[i], p);
    LinOptGateSpec spec;
    spec.n = valued.size();
    spec.k = valued.size();
    spec.A.emplace_back(spec.n, Rational(1));
    spec.A.emplace_back(spec.n, Rational(-1));
    for (std::size_t t = 0; t < spec.n; ++t) {
      RatVec row(spec.n, Rational(0));
      row[t] = -1;
      spec.A.push_back(std::move(row));
    }
    spec.m = spec.A.size();
    spec.R = 1;
    Rational cb(1);
    std::vector<GateRef> c_wires;
    for (std::size_t j : valued) {
      c_wires.push_back(b.scale(1 / mkt.utilities[i][j], p[j]));
      cb = rat_max(cb, b.range_of(c_wires.back()).abs_bound());
    }
    spec.C = cb;
    spec.subgrad = identity_subgrad(spec.n);
    std::vector<GateRef> b_refs = {budget, b.scale(Rational(-1), budget)};
    for (std::size_t t = 0; t < spec.n; ++t) b_refs.push_back(b.constant(Rational(0)));
    std::vector<GateRef> outs = emit_linopt(b, spec, b_refs, c_wires, options);
    GateRef zero = b.constant(Rational(0));
    for (std::size_t j = 0; j < mkt.m; ++j) q_out[i][j] = zero;
    for (std::size_t t = 0; t < valued.size(); ++t) q_out[i][valued[t]] = outs[t];
  }

  // Price feasibility program over excess expenditures.
  std::vector<GateRef> e(mkt.m);
  for (std::size_t j = 0; j < mkt.m; ++j) {
    std::vector<Rational> coeffs(mkt.n, Rational(1));
    std::vector<GateRef> refs;
    for (std::size_t i = 0; i < mkt.n; ++i) refs.push_back(q[i][j]);
    coeffs.push_back(Rational(-1));
    refs.push_back(p[j]);
    e[j] = b.affine(Rational(0), coeffs, refs);
  }
  FeasibilitySpec qspec;
  qspec.n = mkt.m;
  std::vector<GateRef> qb_refs;
  qspec.A.emplace_back(mkt.m, Rational(1));
  qspec.conds.push_back(
      tiny_affine_circuit(mkt.m, Rational(1), std::vector<Rational>(mkt.m, Rational(0))));
  qb_refs.push_back(b.constant(Rational(1)));
  qspec.A.emplace_back(mkt.m, Rational(-1));
  qspec.conds.push_back(
      tiny_affine_circuit(mkt.m, Rational(1), std::vector<Rational>(mkt.m, Rational(0))));
  qb_refs.push_back(b.constant(Rational(-1)));
  for (std::size_t j = 0; j < mkt.m; ++j) {
    RatVec row(mkt.m, Rational(0));
    row[j] = -1;
    qspec.A.push_back(std::move(row));
    qspec.conds.push_back(
        tiny_affine_circuit(mkt.m, Rational(1), std::vector<Rational>(mkt.m, Rational(0))));
    qb_refs.push_back(b.constant(-floor));
  }
  for (std::size_t j = 0; j < mkt.m; ++j)
    for (std::size_t j2 = 0; j2 < mkt.m; ++j2) {
      if (j == j2) continue;
      RatVec row(mkt.m, Rational(0));
      row[j] = 1;
      row[j2] = -eps;
      qspec.A.push_back(std::move(row));
      std::vector<Rational> coeffs(mkt.m, Rational(0));
      coeffs[j2] = 1;
      coeffs[j] = -1;  // e_{j'} - e_j > 0  <=>  e_j < e_{j'}
      qspec.conds.push_back(tiny_affine_circuit(mkt.m, Rational(0), coeffs));
      qb_refs.push_back(b.constant(Rational(0)));
    }
  qspec.m = qspec.A.size();
  qspec.R = 1;
  qspec.input_bound = Rational(static_cast<unsigned long>(mkt.n)) + 1;
  std::vector<GateRef> p_out = emit_feasibility(b, qspec, qb_refs, e, options);





  for (GateRef r : p_out) b.mark_primary_output(r);
  for (std::size_t i = 0; i < mkt.n; ++i)
    for (std::size_t j = 0; j < mkt.m; ++j) b.mark_primary_output(q_out[i][j]);
  return b.finish();
}

Circuit compile_pacing(const PacingGame& g, const GammaOptions& options) {
  g.validate();
  const RatVec floors = g.alpha_floors();
  CircuitBuilder b;
  std::vector<GateRef> alpha(g.n);
  for (std::size_t i = 0; i < g.n; ++i) alpha[i] = b.input(Interval(floors[i], Rational(1)));
  std::vector<std::vector<GateRef>> q(g.n, std::vector<GateRef>(g.m));
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t j = 0; j < g.m; ++j)
      q[i][j] = b.input(Interval(Rational(0), g.values[i][j]));

  // bids and second-highest prices
  std::vector<std::vector<GateRef>> bid(g.n, std::vector<GateRef>(g.m));
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t j = 0; j < g.m; ++j)
      bid[i][j] = g.values[i][j] == 0 ? b.constant(Rational(0))
                                      : b.scale(g.values[i][j], alpha[i]);
  std::vector<GateRef> price(g.m);
  for (std::size_t j = 0; j < g.m; ++j) {
    GateRef acc_min = 0;
    bool have_min = false;
    for (std::size_t i = 0; i < g.n; ++i) {
      GateRef inner = b.constant(Rational(0));
      for (std::size_t i2 = 0; i2 < g.n; ++i2)
        if (i2 != i) inner = b.max(inner, bid[i2][j]);
      acc_min = have_min ? b.min(acc_min, inner) : inner;
      have_min = true;
    }
    price[j] = acc_min;
  }

  // per-item expenditure LPs
  std::vector<std::vector<GateRef>> q_out(g.n, std::vector<GateRef>(g.m));
  for (std::size_t j = 0; j < g.m; ++j) {
    LinOptGateSpec spec;
    spec.n = g.n;
    spec.k = g.n;
    spec.A.emplace_back(g.n, Rational(1));
    for (std::size_t i = 0; i < g.n; ++i) {
      RatVec row(g.n, Rational(0));
      row[i] = -1;
      spec.A.push_back(std::move(row));
    }
    spec.m = spec.A.size();
    Rational vmax(1);
    for (std::size_t i = 0; i < g.n; ++i) vmax = rat_max(vmax, g.values[i][j]);
    spec.R = vmax;
    spec.C = vmax;
    spec.subgrad = identity_subgrad(g.n);
    std::vector<GateRef> b_refs = {price[j]};
    for (std::size_t i = 0; i < g.n; ++i) b_refs.push_back(b.constant(Rational(0)));
    std::vector<GateRef> c_wires;
    for (std::size_t i = 0; i < g.n; ++i)
      c_wires.push_back(g.values[i][j] == 0 ? b.constant(Rational(0))
                                            : b.scale(-g.values[i][j], alpha[i]));
    std::vector<GateRef> outs = emit_linopt(b, spec, b_refs, c_wires, options);
    for (std::size_t i = 0; i < g.n; ++i) q_out[i][j] = outs[i];
  }

  // pacing-multiplier update
  std::vector<GateRef> alpha_out(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    Rational total(0);
    for (std::size_t j = 0; j < g.m; ++j) total += g.values[i][j];
    if (total == 0) {
      alpha_out[i] = b.constant(Rational(1));
      continue;
    }
    std::vector<Rational> coeffs{Rational(1)};
    std::vector<GateRef> refs{alpha[i]};
    for (std::size_t j = 0; j < g.m; ++j) {
      coeffs.push_back(Rational(-1));
      refs.push_back(q[i][j]);
    }
    GateRef drift = b.affine(g.budgets[i], coeffs, refs);
    alpha_out[i] = b.max(b.constant(floors[i]), b.min(b.constant(Rational(1)), drift));
  }

  for (GateRef r : alpha_out) b.mark_primary_output(r);
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t j = 0; j < g.m; ++j) b.mark_primary_output(q_out[i][j]);
  return b.finish();
}

namespace {

CompiledApp compile_division(const DivisionInstance& inst, bool minimize_excess,
                             const GammaOptions& options) {
  inst.validate();
  const std::size_t n = inst.n;
  CircuitBuilder b;
  std::vector<GateRef> x(n);
  for (std::size_t j = 0; j < n; ++j) x[j] = b.input(Interval(Rational(0), Rational(1)));
  std::vector<std::vector<GateRef>> c(n, std::vector<GateRef>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) c[i][j] = b.input(Interval(Rational(0), Rational(1)));
  std::vector<std::vector<GateRef>> y(n, std::vector<GateRef>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) y[i][j] = b.input(Interval(Rational(0), Rational(1)));

  // valuations (pseudo-circuits allowed; record their aux slices)
  std::vector<std::pair<std::size_t, std::size_t>> val_aux;
  std::vector<std::vector<GateRef>> u(n, std::vector<GateRef>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t aux_before = b.num_aux();
      u[i][j] = b.splice(inst.valuations[i][j], x)[0];
      val_aux.emplace_back(aux_before, b.num_aux() - aux_before);
    }

  // flow: max sum y_ij s.t. y_ij <= c_ij + 1/n^3, y >= 0, row/col sums <= 1
  const Rational slack = Rational(1) / Rational(static_cast<unsigned long>(n * n * n));
  LinOptGateSpec p2;
  p2.n = n * n;
  p2.k = 0;
  std::vector<GateRef> p2_b;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      RatVec row(p2.n, Rational(0));
      row[i * n + j] = 1;
      p2.A.push_back(std::move(row));
      p2_b.push_back(b.add(c[i][j], b.constant(slack)));
    }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      RatVec row(p2.n, Rational(0));
      row[i * n + j] = -1;
      p2.A.push_back(std::move(row));
      p2_b.push_back(b.constant(Rational(0)));
    }
  for (std::size_t j = 0; j < n; ++j) {  // piece capacity
    RatVec row(p2.n, Rational(0));
    for (std::size_t i = 0; i < n; ++i) row[i * n + j] = 1;
    p2.A.push_back(std::move(row));
    p2_b.push_back(b.constant(Rational(1)));
  }
  for (std::size_t i = 0; i < n; ++i) {  // agent capacity
    RatVec row(p2.n, Rational(0));
    for (std::size_t j = 0; j < n; ++j) row[i * n + j] = 1;
    p2.A.push_back(std::move(row));
    p2_b.push_back(b.constant(Rational(1)));
  }
  p2.m = p2.A.size();
  p2.R = 1;
  p2.C = 1;
  p2.subgrad = const_subgrad(p2.n, Rational(-1));
  std::vector<GateRef> y_out = emit_linopt(b, p2, p2_b, {}, options);

  // flow excess r_k = max{0, 1 - sum_i y_ik}
  std::vector<GateRef> r(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<GateRef> col;
    for (std::size_t i = 0; i < n; ++i) col.push_back(y[i][k]);
    GateRef sum = b.affine(Rational(0), std::vector<Rational>(n, Rational(1)), col);
    r[k] = b.max(b.constant(Rational(0)), b.sub(b.constant(Rational(1)), sum));
  }

  // division program: max (cake) / min (rental) of sum r_k x_k over the simplex
  std::vector<GateRef> c0_wires(n);
  for (std::size_t k = 0; k < n; ++k)
    c0_wires[k] = minimize_excess ? r[k] : b.scale(Rational(-1), r[k]);
  std::vector<GateRef> x_out = emit_simplex_lp(b, c0_wires, options);

  // capacities: max sum_j c_ij u_ij(x) over the simplex, per agent
  std::vector<std::vector<GateRef>> c_out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<GateRef> ci(n);
    for (std::size_t j = 0; j < n; ++j) ci[j] = b.scale(Rational(-1), u[i][j]);
    c_out[i] = emit_simplex_lp(b, ci, options);
  }

  for (GateRef rr : x_out) b.mark_primary_output(rr);
  for (std::size_t i = 0; i < n; ++i)
    for (GateRef rr : c_out[i]) b.mark_primary_output(rr);
  for (GateRef rr : y_out) b.mark_primary_output(rr);

  CompiledApp app;
  app.circuit = b.finish();
  app.domain = Box::uniform(n + 2 * n * n, Rational(0), Rational(1));
  app.valuation_aux = std::move(val_aux);
  return app;
}

}  // namespace

Circuit compile_cake(const CakeInstance& inst, const GammaOptions& options) {
  return compile_division(inst, false, options).circuit;
}

Circuit compile_rental(const RentalInstance& inst, const GammaOptions& options) {
  return compile_division(inst, true, options).circuit;
}

Box plbro_domain(const std::vector<Box>& domains) {
  Box all;
  for (const Box& d : domains) {
    all.lo.insert(all.lo.end(), d.lo.begin(), d.lo.end());
    all.hi.insert(all.hi.end(), d.hi.begin(), d.hi.end());
  }
  return all;
}

Circuit compile_plbro(const std::vector<Circuit>& oracles, const std::vector<Box>& domains) {
  if (oracles.size() != domains.size()) throw ContractError("plbro: oracle/domain count");
  const Box all = plbro_domain(domains);
  std::size_t total = all.size();
  CircuitBuilder b;
  std::vector<GateRef> profile;
  for (std::size_t v = 0; v < total; ++v) profile.push_back(b.input(Interval(all.lo[v], all.hi[v])));
  std::vector<GateRef> outs;
  for (std::size_t i = 0; i < oracles.size(); ++i) {
    if (oracles[i].n_inputs != total)
      throw ContractError("plbro: oracle " + std::to_string(i) + " must take the full profile");
    if (oracles[i].primary_outputs.size() != domains[i].size())
      throw ContractError("plbro: oracle " + std::to_string(i) + " output arity mismatch");
    std::vector<GateRef> oi = b.splice(oracles[i], profile);
    outs.insert(outs.end(), oi.begin(), oi.end());
  }
  for (GateRef r : outs) b.mark_primary_output(r);
  return b.finish();
}

// ---------- compile/solve dispatch ----------

CompiledApp compile(const Instance& instance, const GammaOptions& options) {
  CompiledApp app;
  if (const auto* g = std::get_if<BimatrixGame>(&instance)) {
    app.circuit = compile_bimatrix(*g, options);
    app.domain = Box::uniform(g->m1 + g->m2, Rational(0), Rational(1));
  } else if (const auto* g = std::get_if<ThresholdGame>(&instance)) {
    app.circuit = compile_threshold(*g, options);
    app.domain = Box::uniform(g->n, Rational(0), Rational(1));
  } else if (const auto* g = std::get_if<EpsProperInstance>(&instance)) {
    app.circuit = compile_eps_proper(*g, options);
    app.domain = Box::uniform(g->game.m1 + g->game.m2, Rational(0), Rational(1));
    app.epsilon = g->eps;
  } else if (const auto* g = std::get_if<ExchangeMarket>(&instance)) {
    app.circuit = compile_exchange_market(*g, options);
    app.epsilon = g->market_epsilon();
    const Rational floor =
        pow_rational(app.epsilon, g->m) / Rational(static_cast<unsigned long>(g->m));
    Box d;
    for (std::size_t j = 0; j < g->m; ++j) {
      d.lo.push_back(floor);
      d.hi.push_back(Rational(1));
    }
    for (std::size_t i = 0; i < g->n * g->m; ++i) {
      d.lo.push_back(Rational(0));
      d.hi.push_back(Rational(1));
    }
    app.domain = std::move(d);
  } else if (const auto* g = std::get_if<PacingGame>(&instance)) {
    app.circuit = compile_pacing(*g, options);
    Box d;
    const RatVec floors = g->alpha_floors();
    for (std::size_t i = 0; i < g->n; ++i) {
      d.lo.push_back(floors[i]);
      d.hi.push_back(Rational(1));
    }
    for (std::size_t i = 0; i < g->n; ++i)
      for (std::size_t j = 0; j < g->m; ++j) {
        d.lo.push_back(Rational(0));
        d.hi.push_back(g->values[i][j]);
      }
    app.domain = std::move(d);
  } else if (const auto* g = std::get_if<CakeInstance>(&instance)) {
    app = compile_division(*g, false, options);
  } else if (const auto* g = std::get_if<RentalInstance>(&instance)) {
    app = compile_division(*g, true, options);
  } else {
    throw ContractError("compile: unknown instance kind");
  }
  return app;
}

Solution solve(const Instance& instance, const GammaOptions& gamma,
               const SolveOptions& solve_options) {
  CompiledApp app = compile(instance, gamma);
  Solution sol;
  sol.fp = find_fixed_point(app.circuit, app.domain, solve_options);
  return sol;
}

// ---------- views ----------

BimatrixView bimatrix_view(const BimatrixGame& g, const RatVec& inputs) {
  if (inputs.size() != g.m1 + g.m2) throw ContractError("bimatrix view: size mismatch");
  BimatrixView v;
  v.x1.assign(inputs.begin(), inputs.begin() + g.m1);
  v.x2.assign(inputs.begin() + g.m1, inputs.end());
  return v;
}

MarketView market_view(const ExchangeMarket& mkt, const RatVec& inputs) {
  if (inputs.size() != mkt.m + mkt.n * mkt.m) throw ContractError("market view: size mismatch");
  MarketView v;
  v.prices.assign(inputs.begin(), inputs.begin() + mkt.m);
  v.spend.assign(mkt.n, RatVec(mkt.m));
  v.allocations.assign(mkt.n, RatVec(mkt.m));
  for (std::size_t i = 0; i < mkt.n; ++i)
    for (std::size_t j = 0; j < mkt.m; ++j) {
      v.spend[i][j] = inputs[mkt.m + i * mkt.m + j];
      if (v.prices[j] == 0) throw ContractError("market view: zero price");
      v.allocations[i][j] = v.spend[i][j] / v.prices[j];
    }
  return v;
}

PacingView pacing_view(const PacingGame& g, const RatVec& inputs) {
  if (inputs.size() != g.n + g.n * g.m) throw ContractError("pacing view: size mismatch");
  PacingView v;
  v.alpha.assign(inputs.begin(), inputs.begin() + g.n);
  v.spend.assign(g.n, RatVec(g.m));
  v.allocations.assign(g.n, RatVec(g.m, Rational(0)));
  v.prices.resize(g.m);
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t j = 0; j < g.m; ++j) v.spend[i][j] = inputs[g.n + i * g.m + j];
  for (std::size_t j = 0; j < g.m; ++j) {
    v.prices[j] = g.second_highest_bid(v.alpha, j);
    if (v.prices[j] > 0) {
      for (std::size_t i = 0; i < g.n; ++i) v.allocations[i][j] = v.spend[i][j] / v.prices[j];
    } else {
      // free item: hand it whole to the first highest bidder
      const Rational h = g.highest_bid(v.alpha, j);
      for (std::size_t i = 0; i < g.n; ++i)
        if (v.alpha[i] * g.values[i][j] == h) {
          v.allocations[i][j] = 1;
          break;
        }
    }
  }
  return v;
}

DivisionView division_view(const DivisionInstance& inst, const RatVec& inputs) {
  const std::size_t n = inst.n;
  if (inputs.size() != n + 2 * n * n) throw ContractError("division view: size mismatch");
  DivisionView v;
  v.x.assign(inputs.begin(), inputs.begin() + n);
  v.caps.assign(n, RatVec(n));
  v.flow.assign(n, RatVec(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      v.caps[i][j] = inputs[n + i * n + j];
      v.flow[i][j] = inputs[n + n * n + i * n + j];
    }
  return v;
}

// ---------- verifiers ----------

namespace {

void check_simplex(VerifyReport& rep, const RatVec& x, const std::string& who) {
  Rational sum(0);
  for (const Rational& q : x) {
    if (q < 0) rep.fail(who + ": negative coordinate");
    sum += q;
  }
  if (sum != 1) rep.fail(who + ": coordinates must sum to 1");
}

// evaluate a valuation (pseudo-)circuit at x with its witness aux slice
Rational valuation_value(VerifyReport& rep, const Circuit& u, const RatVec& x,
                         const RatVec& aux_slice, const std::string& who) {
  EvalResult r = eval(u, x, aux_slice);
  if (r.aux_out != aux_slice) rep.fail(who + ": valuation aux witness is not a fixed point");
  return r.primary[0];
}

VerifyReport verify_bimatrix(const BimatrixGame& g, const RatVec& inputs) {
  VerifyReport rep;
  BimatrixView v = bimatrix_view(g, inputs);
  check_simplex(rep, v.x1, "player 1 strategy");
  check_simplex(rep, v.x2, "player 2 strategy");
  RatVec payoff1(g.m1, Rational(0)), payoff2(g.m2, Rational(0));
  for (std::size_t j = 0; j < g.m1; ++j)
    for (std::size_t j2 = 0; j2 < g.m2; ++j2) payoff1[j] += g.a1[j][j2] * v.x2[j2];
  for (std::size_t j2 = 0; j2 < g.m2; ++j2)
    for (std::size_t j = 0; j < g.m1; ++j) payoff2[j2] += g.a2[j][j2] * v.x1[j];
  Rational u1(0), u2(0);
  for (std::size_t j = 0; j < g.m1; ++j) u1 += v.x1[j] * payoff1[j];
  for (std::size_t j2 = 0; j2 < g.m2; ++j2) u2 += v.x2[j2] * payoff2[j2];
  for (std::size_t j = 0; j < g.m1; ++j)
    if (payoff1[j] > u1) rep.fail("player 1 best response: pure strategy " + std::to_string(j) +
                                  " improves the payoff");
  for (std::size_t j2 = 0; j2 < g.m2; ++j2)
    if (payoff2[j2] > u2) rep.fail("player 2 best response: pure strategy " +
                                   std::to_string(j2) + " improves the payoff");
  return rep;
}

VerifyReport verify_threshold(const ThresholdGame& g, const RatVec& x) {
  VerifyReport rep;
  if (x.size() != g.n) throw ContractError("threshold verify: size mismatch");
  for (std::size_t i = 0; i < g.n; ++i) {
    if (x[i] < 0 || x[i] > 1) rep.fail("strategy " + std::to_string(i) + " outside [0,1]");
    Rational sum(0);
    for (std::size_t j : g.in_neighbors[i]) sum += x[j];
    if (sum > g.t && x[i] != 0)
      rep.fail("node " + std::to_string(i) + ": neighbor sum above threshold requires 0");
    if (sum < g.t && x[i] != 1)
      rep.fail("node " + std::to_string(i) + ": neighbor sum below threshold requires 1");
  }
  return rep;
}

VerifyReport verify_eps_proper(const EpsProperInstance& inst, const RatVec& inputs) {
  VerifyReport rep;
  const BimatrixGame& g = inst.game;
  BimatrixView v = bimatrix_view(g, inputs);
  check_simplex(rep, v.x1, "player 1 strategy");
  check_simplex(rep, v.x2, "player 2 strategy");
  for (const Rational& q : v.x1)
    if (q <= 0) rep.fail("player 1 strategy not fully mixed");
  for (const Rational& q : v.x2)
    if (q <= 0) rep.fail("player 2 strategy not fully mixed");
  RatVec payoff1(g.m1, Rational(0)), payoff2(g.m2, Rational(0));
  for (std::size_t j = 0; j < g.m1; ++j)
    for (std::size_t j2 = 0; j2 < g.m2; ++j2) payoff1[j] += g.a1[j][j2] * v.x2[j2];
  for (std::size_t j2 = 0; j2 < g.m2; ++j2)
    for (std::size_t j = 0; j < g.m1; ++j) payoff2[j2] += g.a2[j][j2] * v.x1[j];
  for (std::size_t j = 0; j < g.m1; ++j)
    for (std::size_t j2 = 0; j2 < g.m1; ++j2)
      if (payoff1[j] < payoff1[j2] && v.x1[j] > inst.eps * v.x1[j2])
        rep.fail("player 1: strategy " + std::to_string(j) + " must be eps-dominated by " +
                 std::to_string(j2));
  for (std::size_t j = 0; j < g.m2; ++j)
    for (std::size_t j2 = 0; j2 < g.m2; ++j2)
      if (payoff2[j] < payoff2[j2] && v.x2[j] > inst.eps * v.x2[j2])
        rep.fail("player 2: strategy " + std::to_string(j) + " must be eps-dominated by " +
                 std::to_string(j2));
  return rep;
}

VerifyReport verify_market(const ExchangeMarket& mkt, const RatVec& inputs) {
  VerifyReport rep;
  for (std::size_t j = 0; j < mkt.m; ++j)
    if (inputs[j] <= 0) {
      rep.fail("price of good " + std::to_string(j) + " must be positive");
      return rep;
    }
  MarketView v = market_view(mkt, inputs);
  // market clearing
  for (std::size_t j = 0; j < mkt.m; ++j) {
    Rational total(0);
    for (std::size_t i = 0; i < mkt.n; ++i) total += v.allocations[i][j];
    if (total != 1) rep.fail("market clearing: good " + std::to_string(j));
  }
  // bundle optimality: full budget on maximum bang-per-buck goods only
  for (std::size_t i = 0; i < mkt.n; ++i) {
    Rational budget(0), spent(0);
    for (std::size_t j = 0; j < mkt.m; ++j) {
      budget += mkt.endowments[i][j] * v.prices[j];
      spent += v.spend[i][j];
    }
    if (spent != budget) rep.fail("bundle optimality: consumer " + std::to_string(i) +
                                  " does not spend the whole budget");
    Rational best_bpb(0);
    for (std::size_t j = 0; j < mkt.m; ++j)
      best_bpb = rat_max(best_bpb, mkt.utilities[i][j] / v.prices[j]);
    for (std::size_t j = 0; j < mkt.m; ++j)
      if (v.spend[i][j] > 0 && mkt.utilities[i][j] / v.prices[j] != best_bpb)
        rep.fail("bundle optimality: consumer " + std::to_string(i) + " buys good " +
                 std::to_string(j) + " below maximum bang-per-buck");
  }
  return rep;
}

VerifyReport verify_pacing(const PacingGame& g, const RatVec& inputs) {
  VerifyReport rep;
  PacingView v = pacing_view(g, inputs);
  for (std::size_t i = 0; i < g.n; ++i)
    if (v.alpha[i] < 0 || v.alpha[i] > 1) rep.fail("pacing multiplier outside [0,1]");
  for (std::size_t j = 0; j < g.m; ++j) {
    const Rational h = g.highest_bid(v.alpha, j);
    Rational total(0);
    for (std::size_t i = 0; i < g.n; ++i) {
      if (v.allocations[i][j] < 0) rep.fail("negative allocation");
      total += v.allocations[i][j];
      if (v.allocations[i][j] > 0 && v.alpha[i] * g.values[i][j] != h)
        rep.fail("only highest bids win: buyer " + std::to_string(i) + ", item " +
                 std::to_string(j));
    }
    if (total > 1) rep.fail("feasible allocation: item " + std::to_string(j));
    if (h > 0 && total != 1) rep.fail("full allocation: item " + std::to_string(j));
  }
  for (std::size_t i = 0; i < g.n; ++i) {
    Rational spend(0);
    for (std::size_t j = 0; j < g.m; ++j) spend += v.allocations[i][j] * v.prices[j];
    if (spend > g.budgets[i]) rep.fail("budget constraint: buyer " + std::to_string(i));
    if (spend < g.budgets[i] && v.alpha[i] != 1)
      rep.fail("maximum pacing: buyer " + std::to_string(i));
  }
  return rep;
}

// deterministic augmenting-path bipartite matching
bool has_perfect_matching(const std::vector<std::vector<bool>>& pref) {
  const std::size_t n = pref.size();
  std::vector<long> match_piece(n, -1);
  std::function<bool(std::size_t, std::vector<bool>&)> try_agent =
      [&](std::size_t i, std::vector<bool>& used) -> bool {
    for (std::size_t j = 0; j < n; ++j) {
      if (!pref[i][j] || used[j]) continue;
      used[j] = true;
      if (match_piece[j] < 0 || try_agent(static_cast<std::size_t>(match_piece[j]), used)) {
        match_piece[j] = static_cast<long>(i);
        return true;
      }
    }
    return false;
  };
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<bool> used(n, false);
    if (!try_agent(i, used)) return false;
  }
  return true;
}

VerifyReport verify_division(const DivisionInstance& inst, const RatVec& inputs,
                             const RatVec& aux,
                             const std::vector<std::pair<std::size_t, std::size_t>>& val_aux,
                             bool miserly) {
  VerifyReport rep;
  const std::size_t n = inst.n;
  DivisionView v = division_view(inst, inputs);
  check_simplex(rep, v.x, "division");
  RatMat u(n, RatVec(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const auto [off, len] = val_aux[i * n + j];
      RatVec slice(aux.begin() + static_cast<long>(off),
                   aux.begin() + static_cast<long>(off + len));
      u[i][j] = valuation_value(rep, inst.valuations[i][j], v.x, slice,
                                "agent " + std::to_string(i) + " piece " + std::to_string(j));
    }
  std::vector<std::vector<bool>> pref(n, std::vector<bool>(n, true));
  for (std::size_t i = 0; i < n; ++i) {
    Rational best = u[i][0];
    for (std::size_t j = 1; j < n; ++j) best = rat_max(best, u[i][j]);
    for (std::size_t j = 0; j < n; ++j) pref[i][j] = u[i][j] == best;
  }
  if (!has_perfect_matching(pref))
    rep.fail("envy-freeness: the preference graph admits no perfect matching");
  // sufficiency-condition witness at the delivered division
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t j2 = 0; j2 < n; ++j2) {
        if (v.x[j] != 0 || v.x[j2] == 0) continue;  // j empty, j2 non-empty
        if (!miserly && u[i][j] >= u[i][j2])
          rep.fail("hungriness witness: agent " + std::to_string(i) +
                   " weakly prefers empty piece " + std::to_string(j));
        if (miserly && u[i][j] <= u[i][j2])
          rep.fail("miserly witness: agent " + std::to_string(i) +
                   " weakly prefers non-empty piece " + std::to_string(j2));
      }
  return rep;
}

}  // namespace

VerifyReport verify_solution(const Instance& instance, const Solution& sol) {
  if (const auto* g = std::get_if<BimatrixGame>(&instance))
    return verify_bimatrix(*g, sol.fp.inputs);
  if (const auto* g = std::get_if<ThresholdGame>(&instance))
    return verify_threshold(*g, sol.fp.inputs);
  if (const auto* g = std::get_if<EpsProperInstance>(&instance))
    return verify_eps_proper(*g, sol.fp.inputs);
  if (const auto* g = std::get_if<ExchangeMarket>(&instance))
    return verify_market(*g, sol.fp.inputs);
  if (const auto* g = std::get_if<PacingGame>(&instance))
    return verify_pacing(*g, sol.fp.inputs);
  if (const auto* g = std::get_if<CakeInstance>(&instance)) {
    CompiledApp app = compile(instance);
    return verify_division(*g, sol.fp.inputs, sol.fp.aux, app.valuation_aux, false);
  }
  if (const auto* g = std::get_if<RentalInstance>(&instance)) {
    CompiledApp app = compile(instance);
    return verify_division(*g, sol.fp.inputs, sol.fp.aux, app.valuation_aux, true);
  }
  throw ContractError("verify_solution: unknown instance kind");
}

}  // namespace plopt::apps
