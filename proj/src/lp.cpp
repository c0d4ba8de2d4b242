#include "plopt/lp.hpp"

#include "plopt/errors.hpp"

namespace plopt {

unsigned long g_lp_pivots = 0;
unsigned long g_lp_solves = 0;

void LPProblem::check_consistent() const {
  const std::size_t n = c.size();
  if (A.size() != b.size() || eq_A.size() != eq_b.size())
    throw ContractError("lp: row count mismatch");
  for (const auto& row : A)
    if (row.size() != n) throw ContractError("lp: A row width mismatch");
  for (const auto& row : eq_A)
    if (row.size() != n) throw ContractError("lp: eq row width mismatch");
  if (lo.size() != n || hi.size() != n) throw ContractError("lp: bound count mismatch");
  for (std::size_t j = 0; j < n; ++j)
    if (lo[j] && hi[j] && *lo[j] > *hi[j]) throw ContractError("lp: lo > hi");
}

Simplex::Simplex(std::size_t n_structural) : n_structural_(n_structural) {
  for (std::size_t j = 0; j < n_structural; ++j) add_column({}, {});
}

std::size_t Simplex::add_column(Bound lo, Bound hi) {
  lo_.push_back(std::move(lo));
  hi_.push_back(std::move(hi));
  stat_.push_back(VStat::Free);
  is_artificial_.push_back(false);
  for (auto& row : rows_) row.emplace_back(0);
  return n_cols_++;
}

void Simplex::set_bounds(std::size_t var, std::optional<Rational> lo, std::optional<Rational> hi) {
  if (setup_done_) throw ContractError("simplex: bounds fixed after phase1");
  lo_[var] = lo ? Bound{true, *lo} : Bound{};
  hi_[var] = hi ? Bound{true, *hi} : Bound{};
}

void Simplex::add_le_row(const RatVec& coeffs, const Rational& rhs) {
  if (setup_done_) throw ContractError("simplex: rows fixed after phase1");
  if (coeffs.size() != n_structural_) throw ContractError("simplex: row width mismatch");
  RatVec row(n_cols_, Rational(0));
  for (std::size_t j = 0; j < n_structural_; ++j) row[j] = coeffs[j];
  rows_.push_back(std::move(row));
  rhs_.push_back(rhs);
  row_is_eq_.push_back(false);
}

void Simplex::add_eq_row(const RatVec& coeffs, const Rational& rhs) {
  add_le_row(coeffs, rhs);
  row_is_eq_.back() = true;
}

Rational Simplex::nonbasic_value(std::size_t var) const {
  switch (stat_[var]) {
    case VStat::AtLower: return lo_[var].v;
    case VStat::AtUpper: return hi_[var].v;
    default: return Rational(0);
  }
}

LPStatus Simplex::phase1() {
  ++g_lp_solves;
  if (setup_done_) throw ContractError("simplex: phase1 called twice");
  const std::size_t m = rows_.size();
  // Slack per row: [0, inf) for <=, fixed [0,0] for equalities.
  std::vector<std::size_t>& slack = slack_cols_;
  slack.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    Bound up = row_is_eq_[i] ? Bound{true, Rational(0)} : Bound{};
    slack[i] = add_column(Bound{true, Rational(0)}, up);
    rows_[i][slack[i]] = 1;
  }
  // Start nonbasic structurals at a finite bound (lower preferred).
  for (std::size_t j = 0; j < n_structural_; ++j) {
    if (lo_[j].has)
      stat_[j] = VStat::AtLower;
    else if (hi_[j].has)
      stat_[j] = VStat::AtUpper;
    else
      stat_[j] = VStat::Free;
  }
  basis_.assign(m, 0);
  basic_val_.assign(m, Rational(0));
  for (std::size_t i = 0; i < m; ++i) {
    Rational v = rhs_[i];
    for (std::size_t j = 0; j < n_structural_; ++j)
      if (rows_[i][j] != 0) v -= rows_[i][j] * nonbasic_value(j);
    const bool feasible = v >= 0 && (!row_is_eq_[i] || v == 0);
    if (feasible) {
      basis_[i] = slack[i];
      stat_[slack[i]] = VStat::Basic;
      basic_val_[i] = v;
    } else {
      // Artificial carrying the violation. Negate the row when the violation
      // is negative so the artificial's column is a unit basis column.
      std::size_t art = add_column(Bound{true, Rational(0)}, Bound{});
      if (v < 0) {
        for (Rational& q : rows_[i]) q = -q;
        rhs_[i] = -rhs_[i];
      }
      rows_[i][art] = 1;
      stat_[slack[i]] = VStat::AtLower;
      basis_[i] = art;
      stat_[art] = VStat::Basic;
      basic_val_[i] = rat_abs(v);
      is_artificial_[art] = true;
      artificials_.push_back(art);
    }
  }
  setup_done_ = true;
  if (!artificials_.empty()) {
    RatVec cost(n_cols_, Rational(0));
    for (std::size_t a : artificials_) cost[a] = 1;
    LPStatus st = run(cost);
    if (st != LPStatus::Optimal) throw InternalCheckError("simplex: phase1 cannot be unbounded");
    Rational infeas(0);
    for (std::size_t i = 0; i < rows_.size(); ++i)
      if (cost[basis_[i]] == 1) infeas += basic_val_[i];
    if (infeas > 0) return LPStatus::Infeasible;
    // Drive basic artificials (at value 0) out of the basis where possible.
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (cost[basis_[i]] != 1) continue;
      for (std::size_t j = 0; j < n_cols_; ++j) {
        if (cost[j] == 1 || rows_[i][j] == 0 || stat_[j] == VStat::Basic) continue;
        const std::size_t leaving = basis_[i];
        const Rational enter_val = nonbasic_value(j);
        pivot(i, j);
        stat_[j] = VStat::Basic;
        stat_[leaving] = VStat::AtLower;
        basic_val_[i] = enter_val;
        break;
      }
    }
    // Freeze artificials so they never re-enter.
    for (std::size_t a : artificials_) {
      lo_[a] = Bound{true, Rational(0)};
      hi_[a] = Bound{true, Rational(0)};
      if (stat_[a] != VStat::Basic) stat_[a] = VStat::AtLower;
    }
  }
  return LPStatus::Optimal;
}

LPStatus Simplex::minimize(const RatVec& c) {
  ensure_setup_done();
  if (c.size() != n_structural_) throw ContractError("simplex: objective width mismatch");
  RatVec cost(n_cols_, Rational(0));
  for (std::size_t j = 0; j < n_structural_; ++j) cost[j] = c[j];
  return run(cost);
}

void Simplex::ensure_setup_done() const {
  if (!setup_done_) throw ContractError("simplex: phase1 must run first");
}

void Simplex::compute_reduced_costs(const RatVec& full_cost) {
  dcost_ = full_cost;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const Rational& cb = full_cost[basis_[i]];
    if (cb == 0) continue;
    for (std::size_t j = 0; j < n_cols_; ++j)
      if (rows_[i][j] != 0) dcost_[j] -= cb * rows_[i][j];
  }
  for (std::size_t i = 0; i < rows_.size(); ++i) dcost_[basis_[i]] = 0;
}

void Simplex::pivot(std::size_t r, std::size_t col) {
  ++g_lp_pivots;
  RatVec& prow = rows_[r];
  Rational inv = 1 / prow[col];
  if (inv != 1)
    for (std::size_t k = 0; k < n_cols_; ++k)
      if (prow[k] != 0) prow[k] *= inv;
  mpq_t tmp;
  mpq_init(tmp);
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (i == r) continue;
    RatVec& row = rows_[i];
    const Rational factor = row[col];
    if (factor == 0) continue;
    for (std::size_t k = 0; k < n_cols_; ++k) {
      if (prow[k] == 0) continue;
      mpq_mul(tmp, factor.get_mpq_t(), prow[k].get_mpq_t());
      mpq_sub(row[k].get_mpq_t(), row[k].get_mpq_t(), tmp);
    }
  }
  {
    const Rational factor = dcost_[col];
    if (factor != 0)
      for (std::size_t k = 0; k < n_cols_; ++k) {
        if (prow[k] == 0) continue;
        mpq_mul(tmp, factor.get_mpq_t(), prow[k].get_mpq_t());
        mpq_sub(dcost_[k].get_mpq_t(), dcost_[k].get_mpq_t(), tmp);
      }
  }
  mpq_clear(tmp);
  basis_[r] = col;
}

LPStatus Simplex::run(const RatVec& full_cost) {
  compute_reduced_costs(full_cost);
  const std::size_t m = rows_.size();
  while (true) {
    // Entering: Bland, smallest eligible index.
    std::size_t enter = n_cols_;
    int dir = 0;
    for (std::size_t j = 0; j < n_cols_; ++j) {
      if (stat_[j] == VStat::Basic) continue;
      if (lo_[j].has && hi_[j].has && lo_[j].v == hi_[j].v) continue;  // fixed
      const Rational& d = dcost_[j];
      if (d == 0) continue;
      if (stat_[j] == VStat::AtLower && d < 0) { enter = j, dir = 1; break; }
      if (stat_[j] == VStat::AtUpper && d > 0) { enter = j, dir = -1; break; }
      if (stat_[j] == VStat::Free) { enter = j, dir = d < 0 ? 1 : -1; break; }
    }
    if (enter == n_cols_) return LPStatus::Optimal;

    // Ratio test: smallest step, ties by smallest blocking-variable index.
    bool have_limit = false, own_bound = false;
    Rational best_t;
    std::size_t best_row = 0, best_var = 0;
    bool leave_at_lower = false;
    if (lo_[enter].has && hi_[enter].has) {
      best_t = hi_[enter].v - lo_[enter].v;
      best_var = enter;
      own_bound = true;
      have_limit = true;
    }
    for (std::size_t i = 0; i < m; ++i) {
      const Rational& a = rows_[i][enter];
      if (a == 0) continue;
      const std::size_t bv = basis_[i];
      // basic value moves by -dir * t * a
      const bool decreasing = (dir > 0) == (a > 0);
      Rational t;
      bool at_lower;
      if (decreasing) {
        if (!lo_[bv].has) continue;
        t = (basic_val_[i] - lo_[bv].v) / rat_abs(a);
        at_lower = true;
      } else {
        if (!hi_[bv].has) continue;
        t = (hi_[bv].v - basic_val_[i]) / rat_abs(a);
        at_lower = false;
      }
      if (!have_limit || t < best_t || (t == best_t && bv < best_var)) {
        have_limit = true;
        best_t = t;
        best_row = i;
        best_var = bv;
        own_bound = false;
        leave_at_lower = at_lower;
      }
    }
    if (!have_limit) return LPStatus::Unbounded;

    // Apply the step to the basic values.
    if (best_t != 0)
      for (std::size_t i = 0; i < m; ++i) {
        const Rational& a = rows_[i][enter];
        if (a != 0) basic_val_[i] -= Rational(dir) * best_t * a;
      }
    if (own_bound) {
      stat_[enter] = dir > 0 ? VStat::AtUpper : VStat::AtLower;
      continue;
    }
    const Rational enter_val = nonbasic_value(enter) + Rational(dir) * best_t;
    const std::size_t leaving = basis_[best_row];
    pivot(best_row, enter);
    stat_[enter] = VStat::Basic;
    stat_[leaving] = leave_at_lower ? VStat::AtLower : VStat::AtUpper;
    basic_val_[best_row] = enter_val;
  }
}

void Simplex::fix_at_current(std::size_t var) {
  ensure_setup_done();
  const Rational v = value_of(var);
  lo_[var] = Bound{true, v};
  hi_[var] = Bound{true, v};
  if (stat_[var] == VStat::AtUpper || stat_[var] == VStat::Free) stat_[var] = VStat::AtLower;
}

Rational Simplex::value_of(std::size_t var) const {
  ensure_setup_done();
  if (stat_[var] == VStat::Basic) {
    for (std::size_t i = 0; i < rows_.size(); ++i)
      if (basis_[i] == var) return basic_val_[i];
    throw InternalCheckError("simplex: basic var without row");
  }
  return nonbasic_value(var);
}

std::vector<std::size_t> Simplex::infeasibility_rows() const {
  ensure_setup_done();
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const bool dual_active = dcost_[slack_cols_[i]] != 0;
    const bool art_positive = is_artificial_[basis_[i]] && basic_val_[i] > 0;
    if (dual_active || art_positive) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> Simplex::infeasibility_bound_vars() const {
  ensure_setup_done();
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < n_structural_; ++j)
    if (dcost_[j] != 0) out.push_back(j);
  return out;
}

RatVec Simplex::structural_values() const {
  ensure_setup_done();
  RatVec x(n_structural_, Rational(0));
  for (std::size_t j = 0; j < n_structural_; ++j)
    if (stat_[j] != VStat::Basic) x[j] = nonbasic_value(j);
  for (std::size_t i = 0; i < rows_.size(); ++i)
    if (basis_[i] < n_structural_) x[basis_[i]] = basic_val_[i];
  return x;
}

LPResult lp_solve_exact(const LPProblem& p) {
  p.check_consistent();
  const std::size_t n = p.num_vars();
  Simplex s(n);
  for (std::size_t j = 0; j < n; ++j) s.set_bounds(j, p.lo[j], p.hi[j]);
  for (std::size_t i = 0; i < p.A.size(); ++i) s.add_le_row(p.A[i], p.b[i]);
  for (std::size_t i = 0; i < p.eq_A.size(); ++i) s.add_eq_row(p.eq_A[i], p.eq_b[i]);
  LPResult res;
  if (s.phase1() == LPStatus::Infeasible) {
    res.status = LPStatus::Infeasible;
    return res;
  }
  RatVec c = p.c;
  if (p.sense == LPProblem::Sense::Max)
    for (Rational& q : c) q = -q;
  if (s.minimize(c) == LPStatus::Unbounded) {
    res.status = LPStatus::Unbounded;
    return res;
  }
  res.status = LPStatus::Optimal;
  res.x = s.structural_values();
  res.value = 0;
  for (std::size_t j = 0; j < n; ++j)
    if (p.c[j] != 0) res.value += p.c[j] * res.x[j];
  return res;
}

}  // namespace plopt
