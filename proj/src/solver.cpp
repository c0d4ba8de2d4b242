#include "plopt/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "plopt/errors.hpp"
#include "plopt/gates.hpp"
#include "plopt/lp.hpp"

namespace plopt {

Box Box::uniform(std::size_t n, const Rational& l, const Rational& h) {
  Box b;
  b.lo.assign(n, l);
  b.hi.assign(n, h);
  return b;
}

unsigned long g_fps_lp_calls = 0;
double g_fps_lp_ms = 0, g_fps_contract_ms = 0, g_fps_analyze_ms = 0;

namespace {

// Sparse affine expression over the solve variables (inputs then aux ports):
// sum coeff_i * w_i + constant. Terms sorted by variable index.
struct Sp {
  std::vector<std::pair<std::size_t, Rational>> terms;
  Rational constant;
  bool is_const() const { return terms.empty(); }
};

Sp sp_var(std::size_t v) {
  Sp e;
  e.terms.emplace_back(v, Rational(1));
  return e;
}

Sp sp_const(const Rational& q) {
  Sp e;
  e.constant = q;
  return e;
}

Sp sp_combine(const Sp& a, const Sp& b, int sign) {
  Sp r;
  r.constant = sign > 0 ? Rational(a.constant + b.constant) : Rational(a.constant - b.constant);
  r.terms.reserve(a.terms.size() + b.terms.size());
  std::size_t i = 0, j = 0;
  while (i < a.terms.size() || j < b.terms.size()) {
    if (j == b.terms.size() || (i < a.terms.size() && a.terms[i].first < b.terms[j].first)) {
      r.terms.push_back(a.terms[i++]);
    } else if (i == a.terms.size() || b.terms[j].first < a.terms[i].first) {
      Rational c = sign > 0 ? b.terms[j].second : Rational(-b.terms[j].second);
      if (c != 0) r.terms.emplace_back(b.terms[j].first, std::move(c));
      ++j;
    } else {
      Rational c = sign > 0 ? Rational(a.terms[i].second + b.terms[j].second)
                            : Rational(a.terms[i].second - b.terms[j].second);
      if (c != 0) r.terms.emplace_back(a.terms[i].first, std::move(c));
      ++i, ++j;
    }
  }
  return r;
}

Sp sp_scale(const Rational& zeta, const Sp& a) {
  Sp r;
  if (zeta == 0) return r;
  r.constant = zeta * a.constant;
  r.terms.reserve(a.terms.size());
  for (const auto& [v, c] : a.terms) r.terms.emplace_back(v, zeta * c);
  return r;
}

Rational sp_eval(const Sp& e, const RatVec& w) {
  Rational r = e.constant;
  for (const auto& [v, c] : e.terms) r += c * w[v];
  return r;
}

struct OutputTarget {
  GateRef ref;
  std::size_t var;
};

constexpr std::size_t kNoJump = static_cast<std::size_t>(-1);

// Branch-pattern search with an incremental exact triangularization of the
// accumulating equality system (so LP probes only see the residual free
// variables) and conflict-driven backjumping: every expression, pivot and
// row carries the deepest decision level its content depends on, and an
// infeasibility certificate jumps straight back to the deepest involved
// level.
class FixedPointSearch {
 public:
  FixedPointSearch(const Circuit& c, const Box& d, const SolveOptions& opt)
      : circ_(c), box_(d), opt_(opt), n_vars_(c.n_inputs + c.n_aux) {
    if (c.primary_outputs.size() != c.n_inputs)
      throw ContractError("find_fixed_point: outputs must match inputs in count");
    if (d.lo.size() != c.n_inputs || d.hi.size() != c.n_inputs)
      throw ContractError("find_fixed_point: box size mismatch");
    for (std::size_t i = 0; i < d.lo.size(); ++i)
      if (d.lo[i] > d.hi[i]) throw ContractError("find_fixed_point: empty box");
    if (c.num_branching_gates() > opt.branch_cap)
      throw CapError("branch cap exceeded: circuit has " +
                     std::to_string(c.num_branching_gates()) + " branching gates, cap is " +
                     std::to_string(opt.branch_cap));
  }

  FixedPointSolution run();

 private:
  enum class Forced : unsigned char { No, Left, Right };
  struct GateExpr {
    Sp e;
    std::size_t eff = 0;  // deepest decision level the expression depends on
  };
  struct Pivot {
    std::size_t var;
    Sp expr;
    std::size_t eff;
    std::size_t id;  // global creation counter; guards reduction caches
  };
  struct Row {
    Sp orig;                   // reduced against the pivots alive at creation
    std::size_t eff_base = 0;  // content dependency level at creation
    Sp cached;
    std::size_t cache_marks = 0;     // reduced against pivots [0, cache_marks)
    std::size_t cache_guard_id = 0;  // id of pivot cache_marks-1 at caching time
    std::size_t eff_cached = 0;
  };

  void analyze();
  // contracted node bounds: sound within the subtree, used for decision
  // forcing and witness clamping only
  const Rational& var_lo(std::size_t v) const { return var_int_[v].lo; }
  const Rational& var_hi(std::size_t v) const { return var_int_[v].hi; }
  // global box: decision-independent, safe for conflict certificates
  const Rational& global_lo(std::size_t v) const {
    return v < circ_.n_inputs ? box_.lo[v] : zero_;
  }
  const Rational& global_hi(std::size_t v) const {
    return v < circ_.n_inputs ? box_.hi[v] : one_;
  }
  std::size_t level() const { return stack_.size(); }

  Sp reduce(Sp e, std::size_t& eff) const;
  Interval aff_interval(const Sp& e) const;
  bool contract();      // forward interval narrowing; false when a branch dies
  bool probe_suffix();  // LP relaxation of the unprocessed remainder
  const Row& reduced_row(std::size_t row_id);
  bool refresh_witness_and_recheck();
  // single-variable witness adjustment to satisfy one violated row without
  // a full LP; returns false when no cheap move exists
  bool try_cheap_repair(const Sp& violated);
  bool add_eq(Sp e, std::size_t eff);
  bool add_ineq(Sp e, std::size_t eff);
  bool solve_current_lp(const Sp* objective, Rational* value_out);
  bool advance();
  bool backtrack();
  bool process_gate(GateRef i, bool take_right, bool add_decision_row);
  bool flush_outputs();
  FixedPointSolution make_solution();

  const Circuit& circ_;
  const Box& box_;
  const SolveOptions& opt_;
  std::size_t n_vars_;
  const Rational zero_{0}, one_{1};

  std::vector<Forced> forced_;
  std::vector<OutputTarget> outputs_;
  std::vector<Interval> ranges_;

  std::vector<GateExpr> exprs_;
  std::vector<Interval> var_int_;    // per-node variable bounds
  std::vector<std::size_t> var_eff_;  // level whose decisions narrowed them
  std::vector<Interval> gate_int_;    // scratch for contraction passes
  std::vector<Pivot> pivots_;
  std::vector<long> pivot_of_;
  std::vector<Row> rows_;
  std::vector<std::vector<std::size_t>> rows_of_var_;  // may contain stale ids
  RatVec witness_;
  std::size_t frontier_ = 0;
  std::size_t out_ptr_ = 0;
  std::size_t nodes_ = 0;
  std::size_t pivot_id_counter_ = 0;
  std::size_t pending_jump_ = kNoJump;

  struct Frame {
    GateRef gate;
    bool taking_right;
    std::size_t frontier, out_ptr, n_pivots, n_rows;
    RatVec witness;
    std::vector<Interval> var_int;
    std::vector<std::size_t> var_eff;
  };
  std::vector<Frame> stack_;
  std::vector<char> decision_;
  bool trace_ = std::getenv("PLOPT_TRACE") != nullptr;
  bool contract_enabled_ = true;
  bool probing_ = true;
};

void FixedPointSearch::analyze() {
  std::vector<Interval> in(circ_.n_inputs);
  for (std::size_t i = 0; i < circ_.n_inputs; ++i) in[i] = Interval(box_.lo[i], box_.hi[i]);
  ranges_ = propagate_intervals(circ_, in);
  forced_.assign(circ_.gates.size(), Forced::No);
  for (std::size_t i = 0; i < circ_.gates.size(); ++i) {
    const Gate& g = circ_.gates[i];
    if (g.kind == GateKind::Max) {
      if (g.a == g.b || ranges_[g.a].lo >= ranges_[g.b].hi)
        forced_[i] = Forced::Left;
      else if (ranges_[g.b].lo > ranges_[g.a].hi)
        forced_[i] = Forced::Right;
    } else if (g.kind == GateKind::Min) {
      if (g.a == g.b || ranges_[g.a].hi <= ranges_[g.b].lo)
        forced_[i] = Forced::Left;
      else if (ranges_[g.b].hi < ranges_[g.a].lo)
        forced_[i] = Forced::Right;
    }
  }
  for (std::size_t j = 0; j < circ_.primary_outputs.size(); ++j)
    outputs_.push_back({circ_.primary_outputs[j], j});
  for (std::size_t k = 0; k < circ_.aux_outputs.size(); ++k)
    outputs_.push_back({circ_.aux_outputs[k], circ_.n_inputs + k});
  std::stable_sort(outputs_.begin(), outputs_.end(),
                   [](const OutputTarget& a, const OutputTarget& b) { return a.ref < b.ref; });
  var_int_.resize(n_vars_);
  for (std::size_t v = 0; v < n_vars_; ++v)
    var_int_[v] = v < circ_.n_inputs ? Interval(box_.lo[v], box_.hi[v]) : Interval(zero_, one_);
  var_eff_.assign(n_vars_, 0);
  witness_.resize(n_vars_);
  for (std::size_t v = 0; v < n_vars_; ++v) witness_[v] = (var_lo(v) + var_hi(v)) / 2;
  exprs_.resize(circ_.gates.size());
  gate_int_.resize(circ_.gates.size());
  decision_.assign(circ_.gates.size(), 0);
  pivot_of_.assign(n_vars_, -1);
  rows_of_var_.resize(n_vars_);
  // The suffix probe pays off on tightly coupled gadget circuits; on very
  // wide circuits its LPs outgrow their pruning value.
  probing_ = std::getenv("PLOPT_PROBE") != nullptr && circ_.num_branching_gates() <= 200;
}

Sp FixedPointSearch::reduce(Sp e, std::size_t& eff) const {
  // variables beyond n_vars_ are probe-local and never pivoted
  while (true) {
    bool any = false;
    for (const auto& [v, c] : e.terms)
      if (v < n_vars_ && pivot_of_[v] >= 0) {
        any = true;
        break;
      }
    if (!any) return e;
    Sp r;
    r.constant = e.constant;
    for (const auto& [v, c] : e.terms) {
      const long p = v < n_vars_ ? pivot_of_[v] : -1;
      if (p < 0) {
        Sp t;
        t.terms.emplace_back(v, c);
        r = sp_combine(r, t, +1);
      } else {
        const Pivot& piv = pivots_[static_cast<std::size_t>(p)];
        eff = std::max(eff, piv.eff);
        r = sp_combine(r, sp_scale(c, piv.expr), +1);
      }
    }
    e = std::move(r);
  }
}

Interval FixedPointSearch::aff_interval(const Sp& e) const {
  Interval r(e.constant, e.constant);
  for (const auto& [v, c] : e.terms) {
    if (c > 0) {
      r.lo += c * var_int_[v].lo;
      r.hi += c * var_int_[v].hi;
    } else {
      r.lo += c * var_int_[v].hi;
      r.hi += c * var_int_[v].lo;
    }
  }
  return r;
}

// Forward interval pass over the whole circuit with the current node bounds,
// intersecting every output's range with its target variable and every
// pivot's range with its expression. Narrows var_int_; empty means the
// branch holds no fixed point.
bool FixedPointSearch::contract() {
  if (!contract_enabled_) return true;
  auto t0 = std::chrono::steady_clock::now();
  struct Timer {
    std::chrono::steady_clock::time_point t0;
    ~Timer() { g_fps_contract_ms += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count(); }
  } timer{t0};
  for (int round = 0; round < 2; ++round) {
    bool changed = false;
    for (std::size_t i = 0; i < circ_.gates.size(); ++i) {
      const Gate& g = circ_.gates[i];
      if (i < frontier_ && (g.kind == GateKind::Max || g.kind == GateKind::Min)) {
        // decided: value is the chosen child, clipped by the decision
        const bool right = decision_[i] == 'R';
        const Gate& gg = circ_.gates[i];
        Interval chosen = gate_int_[right ? gg.b : gg.a];
        const Interval& other = gate_int_[right ? gg.a : gg.b];
        if (gg.kind == GateKind::Max)
          chosen.lo = rat_max(chosen.lo, other.lo);
        else
          chosen.hi = rat_min(chosen.hi, other.hi);
        if (chosen.lo > chosen.hi) return false;
        gate_int_[i] = std::move(chosen);
        continue;
      }
      switch (g.kind) {
        case GateKind::Input: gate_int_[i] = var_int_[g.index]; break;
        case GateKind::Aux: gate_int_[i] = var_int_[circ_.n_inputs + g.index]; break;
        case GateKind::Const: gate_int_[i] = Interval(g.value, g.value); break;
        case GateKind::Add: gate_int_[i] = interval_add(gate_int_[g.a], gate_int_[g.b]); break;
        case GateKind::Sub: gate_int_[i] = interval_sub(gate_int_[g.a], gate_int_[g.b]); break;
        case GateKind::Max: gate_int_[i] = interval_max(gate_int_[g.a], gate_int_[g.b]); break;
        case GateKind::Min: gate_int_[i] = interval_min(gate_int_[g.a], gate_int_[g.b]); break;
        case GateKind::Scale: gate_int_[i] = interval_scale(g.value, gate_int_[g.a]); break;
      }
    }
    // outputs pin their target variables (also the not-yet-flushed ones)
    for (const OutputTarget& t : outputs_) {
      Interval& vi = var_int_[t.var];
      const Interval& oi = gate_int_[t.ref];
      if (oi.lo > vi.lo) {
        vi.lo = oi.lo;
        var_eff_[t.var] = level();
        changed = true;
      }
      if (oi.hi < vi.hi) {
        vi.hi = oi.hi;
        var_eff_[t.var] = level();
        changed = true;
      }
      if (vi.lo > vi.hi) return false;
    }
    // pivots pin their variables
    for (const Pivot& p : pivots_) {
      Interval pi = aff_interval(p.expr);
      Interval& vi = var_int_[p.var];
      if (pi.lo > vi.lo) {
        vi.lo = pi.lo;
        var_eff_[p.var] = level();
        changed = true;
      }
      if (pi.hi < vi.hi) {
        vi.hi = pi.hi;
        var_eff_[p.var] = level();
        changed = true;
      }
      if (vi.lo > vi.hi) return false;
    }
    if (!changed) break;
  }
  // keep the witness inside the narrowed bounds and recheck affected rows
  bool moved = false;
  for (std::size_t v = 0; v < n_vars_; ++v) {
    if (witness_[v] < var_int_[v].lo) {
      witness_[v] = var_int_[v].lo;
      moved = true;
    } else if (witness_[v] > var_int_[v].hi) {
      witness_[v] = var_int_[v].hi;
      moved = true;
    }
  }
  if (moved) return refresh_witness_and_recheck();
  return true;
}

// Feasibility of the current system extended with an LP relaxation of every
// unprocessed gate: undecided max/min gates become fresh variables bounded
// by their static ranges and below/above both arguments, and all outputs not
// yet flushed contribute their fixed-point equations. A completion of the
// current prefix can only exist if this relaxation is feasible.
bool FixedPointSearch::probe_suffix() {
  const std::size_t total = n_vars_ + circ_.gates.size();
  std::vector<Sp> suffix(circ_.gates.size() - frontier_);
  auto expr_of = [&](GateRef r) -> const Sp& {
    return r < frontier_ ? exprs_[r].e : suffix[r - frontier_];
  };
  std::vector<std::size_t> t_vars;  // gate ids acting as LP variables
  for (std::size_t i = frontier_; i < circ_.gates.size(); ++i) {
    const Gate& g = circ_.gates[i];
    Sp& e = suffix[i - frontier_];
    switch (g.kind) {
      case GateKind::Input: e = sp_var(g.index); break;
      case GateKind::Aux: e = sp_var(circ_.n_inputs + g.index); break;
      case GateKind::Const: e = sp_const(g.value); break;
      case GateKind::Add: e = sp_combine(expr_of(g.a), expr_of(g.b), +1); break;
      case GateKind::Sub: e = sp_combine(expr_of(g.a), expr_of(g.b), -1); break;
      case GateKind::Scale: e = sp_scale(g.value, expr_of(g.a)); break;
      case GateKind::Max:
      case GateKind::Min:
        e = sp_var(n_vars_ + i);
        t_vars.push_back(i);
        break;
    }
  }
  // collect rows: live prefix rows, suffix relaxation, unflushed outputs
  std::vector<Sp> rows;
  std::vector<std::size_t> live;
  for (std::size_t id = 0; id < rows_.size(); ++id) {
    const Row& r = reduced_row(id);
    if (r.cached.is_const()) {
      if (r.cached.constant > 0) {
        pending_jump_ = std::min(r.eff_cached, level());
        return false;
      }
      continue;
    }
    rows.push_back(r.cached);
  }
  std::size_t scratch_eff = 0;
  for (std::size_t i : t_vars) {
    const Gate& g = circ_.gates[i];
    // Max: t >= a and t >= b; Min: t <= a and t <= b.
    const int sign = g.kind == GateKind::Max ? -1 : +1;
    Sp ra = sp_combine(expr_of(g.a), suffix[i - frontier_], sign);
    Sp rb = sp_combine(expr_of(g.b), suffix[i - frontier_], sign);
    if (sign > 0) {
      ra = sp_scale(Rational(-1), ra);
      rb = sp_scale(Rational(-1), rb);
    }
    rows.push_back(reduce(std::move(ra), scratch_eff));
    rows.push_back(reduce(std::move(rb), scratch_eff));
  }
  std::vector<Sp> eqs;
  for (std::size_t p = out_ptr_; p < outputs_.size(); ++p) {
    const OutputTarget& t = outputs_[p];
    eqs.push_back(reduce(sp_combine(expr_of(t.ref), sp_var(t.var), -1), scratch_eff));
  }
  // assemble the LP
  std::vector<std::size_t> vars;
  auto note = [&](const Sp& e) {
    for (const auto& [v, c] : e.terms) vars.push_back(v);
  };
  for (const Sp& e : rows) note(e);
  for (const Sp& e : eqs) note(e);
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  std::vector<long> col_of(total, -1);
  for (std::size_t t = 0; t < vars.size(); ++t) col_of[vars[t]] = static_cast<long>(t);
  Simplex s(vars.size());
  for (std::size_t t = 0; t < vars.size(); ++t) {
    if (vars[t] < n_vars_) {
      s.set_bounds(t, var_lo(vars[t]), var_hi(vars[t]));
    } else {
      const Interval& r = ranges_[vars[t] - n_vars_];
      s.set_bounds(t, r.lo, r.hi);
    }
  }
  auto add = [&](const Sp& e, bool eq) {
    RatVec coeffs(vars.size(), Rational(0));
    for (const auto& [v, c] : e.terms) coeffs[static_cast<std::size_t>(col_of[v])] = c;
    if (eq)
      s.add_eq_row(coeffs, -e.constant);
    else
      s.add_le_row(coeffs, -e.constant);
  };
  for (const Sp& e : rows)
    if (!e.is_const()) add(e, false);
  for (const Sp& e : eqs) {
    if (e.is_const()) {
      if (e.constant != 0) return false;
      continue;
    }
    add(e, true);
  }
  return s.phase1() != LPStatus::Infeasible;
}

const FixedPointSearch::Row& FixedPointSearch::reduced_row(std::size_t row_id) {
  Row& row = rows_[row_id];
  // The cache is valid iff the pivot prefix it was reduced against is still
  // in place; pivot ids are globally unique so checking the last one suffices.
  const bool prefix_alive =
      row.cache_marks <= pivots_.size() &&
      (row.cache_marks == 0 || pivots_[row.cache_marks - 1].id == row.cache_guard_id);
  if (!prefix_alive) {
    row.cached = row.orig;
    row.cache_marks = 0;
    row.eff_cached = row.eff_base;
  }
  if (row.cache_marks < pivots_.size()) {
    std::size_t eff = row.eff_cached;
    row.cached = reduce(std::move(row.cached), eff);
    row.eff_cached = eff;
    row.cache_marks = pivots_.size();
    row.cache_guard_id = row.cache_marks == 0 ? 0 : pivots_[row.cache_marks - 1].id;
  }
  return row;
}

// Moves one free variable so `violated` holds with equality (clamped to its
// box); succeeds when the row then holds and no dependent row breaks.
bool FixedPointSearch::try_cheap_repair(const Sp& violated) {
  std::size_t best = n_vars_;
  const Rational* best_coeff = nullptr;
  for (const auto& [v, c] : violated.terms) {
    if (v >= n_vars_ || pivot_of_[v] >= 0) continue;
    if (best == n_vars_) {
      best = v;
      best_coeff = &c;
    }
  }
  if (best == n_vars_) return false;
  Rational rest = violated.constant;
  for (const auto& [v, c] : violated.terms)
    if (v != best) rest += c * witness_[v];
  Rational target = -rest / *best_coeff;
  if (target < var_lo(best)) target = var_lo(best);
  if (target > var_hi(best)) target = var_hi(best);
  const Rational saved = witness_[best];
  witness_[best] = target;
  if (sp_eval(violated, witness_) > 0) {
    witness_[best] = saved;
    return false;
  }
  // ripple: dependent pivots and rows must stay satisfied
  for (std::size_t p = pivots_.size(); p-- > 0;)
    witness_[pivots_[p].var] = sp_eval(pivots_[p].expr, witness_);
  for (std::size_t id : rows_of_var_[best])
    if (id < rows_.size() && sp_eval(rows_[id].orig, witness_) > 0) return false;
  return true;
}

// After a pivot changed witness entries, re-evaluate dependent pivots and
// recheck rows touching any changed variable.
bool FixedPointSearch::refresh_witness_and_recheck() {
  std::vector<std::size_t> changed;
  for (std::size_t p = pivots_.size(); p-- > 0;) {
    Rational v = sp_eval(pivots_[p].expr, witness_);
    if (v != witness_[pivots_[p].var]) {
      witness_[pivots_[p].var] = std::move(v);
      changed.push_back(pivots_[p].var);
    }
  }
  for (std::size_t v : changed) {
    for (std::size_t id : rows_of_var_[v]) {
      if (id >= rows_.size()) continue;
      if (sp_eval(rows_[id].orig, witness_) > 0) {
        if (try_cheap_repair(rows_[id].orig) &&
            sp_eval(rows_[id].orig, witness_) <= 0)
          continue;
        return solve_current_lp(nullptr, nullptr);
      }
    }
  }
  return true;
}

bool FixedPointSearch::solve_current_lp(const Sp* objective, Rational* value_out) {
  ++g_fps_lp_calls;
  auto t0 = std::chrono::steady_clock::now();
  struct Timer {
    std::chrono::steady_clock::time_point t0;
    ~Timer() { g_fps_lp_ms += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count(); }
  } timer{t0};
  std::vector<std::size_t> live;
  std::vector<std::size_t> vars;
  for (std::size_t id = 0; id < rows_.size(); ++id) {
    const Row& r = reduced_row(id);
    if (r.cached.is_const()) {
      if (r.cached.constant > 0) {
        pending_jump_ = std::min(r.eff_cached, level());
        return false;
      }
      continue;
    }
    for (const auto& [v, c] : r.cached.terms) vars.push_back(v);
    live.push_back(id);
  }
  Sp obj;
  if (objective) {
    std::size_t eff = 0;
    obj = reduce(*objective, eff);
    for (const auto& [v, c] : obj.terms) vars.push_back(v);
  }
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  std::vector<long> col_of(n_vars_, -1);
  for (std::size_t t = 0; t < vars.size(); ++t) col_of[vars[t]] = static_cast<long>(t);

  Simplex s(vars.size());
  for (std::size_t t = 0; t < vars.size(); ++t)
    s.set_bounds(t, var_lo(vars[t]), var_hi(vars[t]));
  for (std::size_t id : live) {
    const Sp& r = rows_[id].cached;
    RatVec coeffs(vars.size(), Rational(0));
    for (const auto& [v, c] : r.terms) coeffs[static_cast<std::size_t>(col_of[v])] = c;
    s.add_le_row(coeffs, -r.constant);
  }
  if (s.phase1() == LPStatus::Infeasible) {
    // Greedily minimize the conflict core so the backjump lands as shallow
    // as possible: drop involved rows (deepest first) whose removal keeps
    // the remaining core infeasible.
    std::size_t bound_eff = 0;
    for (std::size_t j : s.infeasibility_bound_vars())
      bound_eff = std::max(bound_eff, var_eff_[vars[j]]);
    std::vector<std::size_t> core;
    for (std::size_t lp_row : s.infeasibility_rows()) core.push_back(live[lp_row]);
    std::sort(core.begin(), core.end(), [&](std::size_t a, std::size_t b) {
      return rows_[a].eff_cached > rows_[b].eff_cached;
    });
    auto core_infeasible = [&](const std::vector<std::size_t>& ids) {
      std::vector<std::size_t> cvars;
      for (std::size_t id : ids)
        for (const auto& [v, c] : rows_[id].cached.terms) cvars.push_back(v);
      std::sort(cvars.begin(), cvars.end());
      cvars.erase(std::unique(cvars.begin(), cvars.end()), cvars.end());
      std::vector<long> ccol(n_vars_, -1);
      for (std::size_t t = 0; t < cvars.size(); ++t) ccol[cvars[t]] = static_cast<long>(t);
      Simplex cs(cvars.size());
      for (std::size_t t = 0; t < cvars.size(); ++t)
        cs.set_bounds(t, var_lo(cvars[t]), var_hi(cvars[t]));
      for (std::size_t id : ids) {
        RatVec coeffs(cvars.size(), Rational(0));
        for (const auto& [v, c] : rows_[id].cached.terms)
          coeffs[static_cast<std::size_t>(ccol[v])] = c;
        cs.add_le_row(coeffs, -rows_[id].cached.constant);
      }
      if (cs.phase1() != LPStatus::Infeasible) return false;
      for (std::size_t j : cs.infeasibility_bound_vars())
        bound_eff = std::max(bound_eff, var_eff_[cvars[j]]);
      return true;
    };
    if (core.size() > 1 && core.size() <= 24 && (bound_eff = 0, core_infeasible(core))) {
      for (std::size_t k = 0; k < core.size() && core.size() > 1;) {
        std::vector<std::size_t> trial = core;
        trial.erase(trial.begin() + static_cast<long>(k));
        if (core_infeasible(trial))
          core = std::move(trial);
        else
          ++k;
      }
    }
    std::size_t deepest = bound_eff;
    for (std::size_t id : core) deepest = std::max(deepest, rows_[id].eff_cached);
    pending_jump_ = std::min(deepest, level());
    return false;
  }
  if (objective) {
    RatVec coeffs(vars.size(), Rational(0));
    for (const auto& [v, c] : obj.terms) coeffs[static_cast<std::size_t>(col_of[v])] = c;
    if (s.minimize(coeffs) != LPStatus::Optimal)
      throw InternalCheckError("lexicographic step unbounded on a bounded box");
  }
  RatVec x = s.structural_values();
  for (std::size_t t = 0; t < vars.size(); ++t) witness_[vars[t]] = x[t];
  for (std::size_t p = pivots_.size(); p-- > 0;)
    witness_[pivots_[p].var] = sp_eval(pivots_[p].expr, witness_);
  if (objective && value_out) *value_out = sp_eval(obj, witness_);
  return true;
}

bool FixedPointSearch::add_eq(Sp e, std::size_t eff) {
  e = reduce(std::move(e), eff);
  if (e.is_const()) {
    if (e.constant == 0) return true;
    pending_jump_ = std::min(eff, level());
    return false;
  }
  const std::size_t var = e.terms.back().first;
  const Rational coeff = e.terms.back().second;
  e.terms.pop_back();
  Sp expr = sp_scale(Rational(-1) / coeff, e);
  pivots_.push_back({var, std::move(expr), eff, ++pivot_id_counter_});
  pivot_of_[var] = static_cast<long>(pivots_.size() - 1);
  if (!refresh_witness_and_recheck()) return false;
  // The eliminated variable keeps its box: lo <= expr <= hi.
  Sp upper = pivots_.back().expr;
  upper.constant -= var_hi(var);
  Sp lower = sp_scale(Rational(-1), pivots_.back().expr);
  lower.constant += var_lo(var);
  if (!add_ineq(std::move(upper), eff)) return false;
  return add_ineq(std::move(lower), eff);
}

bool FixedPointSearch::add_ineq(Sp e, std::size_t eff) {
  e = reduce(std::move(e), eff);
  if (e.is_const()) {
    if (e.constant <= 0) return true;
    pending_jump_ = std::min(eff, level());
    return false;
  }
  // Interval filter against the node bounds; the verdict's dependency level
  // includes the narrowing levels of the variables it reads.
  Rational lo = e.constant, hi = e.constant;
  std::size_t bound_eff = 0;
  for (const auto& [v, c] : e.terms) {
    bound_eff = std::max(bound_eff, var_eff_[v]);
    if (c > 0) {
      lo += c * var_lo(v);
      hi += c * var_hi(v);
    } else {
      lo += c * var_hi(v);
      hi += c * var_lo(v);
    }
  }
  if (lo > 0) {
    pending_jump_ = std::min(std::max(eff, bound_eff), level());
    return false;  // can never hold
  }
  if (hi <= 0) return true;  // can never bind
  bool ok = sp_eval(e, witness_) <= 0;
  const std::size_t id = rows_.size();
  Row row;
  row.orig = std::move(e);
  row.eff_base = eff;
  row.cached = row.orig;
  row.cache_marks = pivots_.size();
  row.cache_guard_id = pivots_.empty() ? 0 : pivots_.back().id;
  row.eff_cached = eff;
  for (const auto& [v, c] : row.orig.terms) rows_of_var_[v].push_back(id);
  rows_.push_back(std::move(row));
  if (!ok) ok = try_cheap_repair(rows_.back().orig);
  if (ok) return true;
  return solve_current_lp(nullptr, nullptr);
}

bool FixedPointSearch::process_gate(GateRef i, bool take_right, bool add_decision_row) {
  const Gate& g = circ_.gates[i];
  decision_[i] = take_right ? 'R' : 'L';
  const GateRef chosen = take_right ? g.b : g.a;
  const GateRef other = take_right ? g.a : g.b;
  exprs_[i].e = exprs_[chosen].e;
  exprs_[i].eff = add_decision_row
                      ? std::max({exprs_[g.a].eff, exprs_[g.b].eff, level()})
                      : std::max(exprs_[g.a].eff, exprs_[g.b].eff);
  if (!add_decision_row) return true;
  // chosen wins: Max needs other - chosen <= 0, Min the reverse.
  Sp row = g.kind == GateKind::Max ? sp_combine(exprs_[other].e, exprs_[chosen].e, -1)
                                   : sp_combine(exprs_[chosen].e, exprs_[other].e, -1);
  return add_ineq(std::move(row), exprs_[i].eff);
}

bool FixedPointSearch::flush_outputs() {
  while (out_ptr_ < outputs_.size() && outputs_[out_ptr_].ref < frontier_) {
    const OutputTarget& t = outputs_[out_ptr_++];
    if (!add_eq(sp_combine(exprs_[t.ref].e, sp_var(t.var), -1), exprs_[t.ref].eff)) return false;
  }
  return true;
}

bool FixedPointSearch::advance() {
  while (frontier_ < circ_.gates.size()) {
    const GateRef i = frontier_;
    const Gate& g = circ_.gates[i];
    switch (g.kind) {
      case GateKind::Input:
        exprs_[i] = {sp_var(g.index), 0};
        break;
      case GateKind::Aux:
        exprs_[i] = {sp_var(circ_.n_inputs + g.index), 0};
        break;
      case GateKind::Const:
        exprs_[i] = {sp_const(g.value), 0};
        break;
      case GateKind::Add:
        exprs_[i] = {sp_combine(exprs_[g.a].e, exprs_[g.b].e, +1),
                     std::max(exprs_[g.a].eff, exprs_[g.b].eff)};
        break;
      case GateKind::Sub:
        exprs_[i] = {sp_combine(exprs_[g.a].e, exprs_[g.b].e, -1),
                     std::max(exprs_[g.a].eff, exprs_[g.b].eff)};
        break;
      case GateKind::Scale:
        exprs_[i] = {sp_scale(g.value, exprs_[g.a].e), exprs_[g.a].eff};
        break;
      case GateKind::Max:
      case GateKind::Min: {
        Forced forced = forced_[i];
        if (forced == Forced::No) {
          // node bounds plus the pivot substitutions may decide the gate
          // without branching (constant inputs cascade through here)
          std::size_t dep = 0;
          Interval ia = aff_interval(reduce(exprs_[g.a].e, dep));
          Interval ib = aff_interval(reduce(exprs_[g.b].e, dep));
          if (g.kind == GateKind::Max) {
            if (ia.lo >= ib.hi)
              forced = Forced::Left;
            else if (ib.lo > ia.hi)
              forced = Forced::Right;
          } else {
            if (ia.hi <= ib.lo)
              forced = Forced::Left;
            else if (ib.hi < ia.lo)
              forced = Forced::Right;
          }
          if (forced != Forced::No) {
            process_gate(i, forced == Forced::Right, false);
            exprs_[i].eff = std::max(exprs_[i].eff, level());
            break;
          }
        } else {
          process_gate(i, forced == Forced::Right, false);
          break;
        }
        if (++nodes_ > opt_.node_budget)
          throw CapError("fixed-point search node budget exceeded");
        if (trace_ && (nodes_ < 400 || nodes_ % 10000 == 0))
          std::fprintf(stderr, "[fps] nodes=%zu frontier=%zu/%zu depth=%zu rows=%zu pivots=%zu\n",
                       nodes_, frontier_, circ_.gates.size(), stack_.size(), rows_.size(),
                       pivots_.size());
        stack_.push_back({i, false, frontier_, out_ptr_, pivots_.size(), rows_.size(), witness_,
                          var_int_, var_eff_});
        if (!process_gate(i, false, true)) return false;
        ++frontier_;
        if (!flush_outputs()) return false;
        --frontier_;  // the shared epilogue below re-increments
        if (!contract()) {
          pending_jump_ = kNoJump;
          return false;
        }
        if (probing_) {
          ++frontier_;
          bool ok = probe_suffix();
          --frontier_;
          if (!ok) return false;
        }
        break;
      }
    }
    ++frontier_;
    if (!flush_outputs()) return false;
  }
  // confirm the completed piece is feasible under the narrowed bounds
  return solve_current_lp(nullptr, nullptr);
}

bool FixedPointSearch::backtrack() {
  while (!stack_.empty()) {
    if (pending_jump_ != kNoJump) {
      // Frames deeper than the conflict level cannot remove any involved
      // row; skip their right branches entirely.
      if (stack_.size() > pending_jump_) {
        stack_.pop_back();
        continue;
      }
      pending_jump_ = kNoJump;
    }
    if (stack_.back().taking_right) {
      stack_.pop_back();
      continue;
    }
    Frame f = stack_.back();
    stack_.back().taking_right = true;
    frontier_ = f.frontier;
    out_ptr_ = f.out_ptr;
    for (std::size_t p = pivots_.size(); p-- > f.n_pivots;) pivot_of_[pivots_[p].var] = -1;
    pivots_.resize(f.n_pivots);
    rows_.resize(f.n_rows);
    witness_ = f.witness;
    var_int_ = f.var_int;
    var_eff_ = f.var_eff;
    if (++nodes_ > opt_.node_budget) throw CapError("fixed-point search node budget exceeded");
    if (trace_ && (nodes_ < 400 || nodes_ % 5000 == 0))
      std::fprintf(stderr, "[fps-bt] nodes=%zu flip-gate=%zu depth=%zu frontier=%zu\n", nodes_,
                   f.gate, stack_.size(), frontier_);
    bool ok = process_gate(f.gate, true, true);
    ++frontier_;
    if (ok) ok = flush_outputs();
    if (ok) ok = contract();
    if (ok && probing_) ok = probe_suffix();
    if (!ok) continue;
    if (advance()) return true;
  }
  return false;
}

FixedPointSolution FixedPointSearch::make_solution() {
  // Lexicographically smallest point of the consistent piece: minimize the
  // coordinates in index order, pinning each as it resolves. Coordinates
  // whose reduced expression is constant are already determined.
  for (std::size_t v = 0; v < n_vars_; ++v) {
    std::size_t eff = 0;
    Sp coord = reduce(sp_var(v), eff);
    if (coord.is_const()) continue;
    Rational value;
    if (!solve_current_lp(&coord, &value))
      throw InternalCheckError("fixed-point leaf unexpectedly infeasible");
    coord.constant -= value;
    if (!add_eq(std::move(coord), eff))
      throw InternalCheckError("pinning a minimized coordinate cannot fail");
  }
  for (std::size_t p = pivots_.size(); p-- > 0;)
    witness_[pivots_[p].var] = sp_eval(pivots_[p].expr, witness_);
  FixedPointSolution sol;
  sol.inputs.assign(witness_.begin(), witness_.begin() + circ_.n_inputs);
  sol.aux.assign(witness_.begin() + circ_.n_inputs, witness_.end());
  for (std::size_t i = 0; i < circ_.gates.size(); ++i)
    if (circ_.gates[i].kind == GateKind::Max || circ_.gates[i].kind == GateKind::Min)
      sol.pattern.decisions.push_back(decision_[i]);
  return sol;
}

FixedPointSolution FixedPointSearch::run() {
  auto t0 = std::chrono::steady_clock::now();
  analyze();
  g_fps_analyze_ms += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  if (trace_) {
    std::size_t unforced = 0;
    for (std::size_t i = 0; i < circ_.gates.size(); ++i)
      if ((circ_.gates[i].kind == GateKind::Max || circ_.gates[i].kind == GateKind::Min) &&
          forced_[i] == Forced::No)
        ++unforced;
    std::fprintf(stderr, "[fps-start] branch=%zu unforced=%zu\n", circ_.num_branching_gates(),
                 unforced);
  }
  if (advance()) return make_solution();
  if (backtrack()) return make_solution();
  throw InternalCheckError(
      "no fixed point found; the circuit is not a well-formed self-map of the box");
}

}  // namespace

FixedPointSolution find_fixed_point(const Circuit& circuit, const Box& domain,
                                    const SolveOptions& options) {
  FixedPointSearch search(circuit, domain, options);
  return search.run();
}

bool verify_fixed_point(const Circuit& circuit, const FixedPointSolution& sol) {
  if (sol.inputs.size() != circuit.n_inputs || sol.aux.size() != circuit.n_aux)
    throw ContractError("verify_fixed_point: dimension mismatch");
  EvalResult r = eval(circuit, sol.inputs, sol.aux);
  return r.primary == sol.inputs && r.aux_out == sol.aux;
}

PseudoOutput solve_pseudo_at(const Circuit& circuit, const RatVec& inputs,
                             const SolveOptions& options) {
  if (inputs.size() != circuit.n_inputs) throw ContractError("solve_pseudo_at: input mismatch");
  CircuitBuilder b;
  Box box;
  std::vector<Interval> in;
  in.reserve(inputs.size());
  for (const Rational& q : inputs) in.emplace_back(q, q);
  std::vector<Interval> ranges = propagate_intervals(circuit, in);
  for (GateRef r : circuit.primary_outputs) {
    box.lo.push_back(ranges[r].lo);
    box.hi.push_back(ranges[r].hi);
    b.input(ranges[r]);
  }
  std::vector<GateRef> const_refs;
  const_refs.reserve(inputs.size());
  for (const Rational& q : inputs) const_refs.push_back(b.constant(q));
  std::vector<GateRef> outs = b.splice(circuit, const_refs);
  for (GateRef r : outs) b.mark_primary_output(r);
  Circuit wrapper = b.finish();
  FixedPointSolution sol = find_fixed_point(wrapper, box, options);
  PseudoOutput out;
  out.outputs = sol.inputs;
  out.aux = sol.aux;
  out.pattern = sol.pattern;
  return out;
}

std::string solution_to_text(const FixedPointSolution& sol) {
  std::ostringstream out;
  out << "solution v1\n";
  for (std::size_t i = 0; i < sol.inputs.size(); ++i)
    out << "x" << i << " = " << rational_to_string(sol.inputs[i]) << "\n";
  for (std::size_t i = 0; i < sol.aux.size(); ++i)
    out << "aux" << i << " = " << rational_to_string(sol.aux[i]) << "\n";
  out << "pattern " << sol.pattern.decisions << "\n";
  return out.str();
}

bool verify_gate_optimality(const LinOptGateSpec& spec, const RatVec& b, const RatVec& c,
                            const RatVec& x) {
  spec.validate();
  if (b.size() != spec.m || c.size() != spec.k || x.size() != spec.n)
    throw ContractError("verify_gate_optimality: dimension mismatch");
  // The oracle comparison needs a linear objective: the subgradient must not
  // depend on x. Evaluate it at the candidate to obtain the coefficient
  // vector (for identity/constant subgradients this is exact).
  RatVec sub_in = x;
  sub_in.insert(sub_in.end(), c.begin(), c.end());
  RatVec cost = eval(spec.subgrad, sub_in, RatVec(spec.subgrad.n_aux, Rational(0))).primary;

  bool feasible = true;
  for (std::size_t j = 0; j < spec.n; ++j)
    if (rat_abs(x[j]) > spec.R) feasible = false;
  for (std::size_t i = 0; i < spec.m && feasible; ++i) {
    Rational ax(0);
    for (std::size_t j = 0; j < spec.n; ++j) ax += spec.A[i][j] * x[j];
    if (ax > b[i]) feasible = false;
  }

  LPProblem p;
  p.c = cost;
  p.A = spec.A;
  p.b = b;
  p.lo.assign(spec.n, -spec.R);
  p.hi.assign(spec.n, spec.R);
  LPResult oracle = lp_solve_exact(p);
  if (oracle.status != LPStatus::Optimal) {
    if (feasible)
      throw InternalCheckError("verify_gate_optimality: oracle infeasible at a feasible point");
    return false;
  }
  if (!feasible) return false;
  Rational value(0);
  for (std::size_t j = 0; j < spec.n; ++j) value += cost[j] * x[j];
  return value == oracle.value;
}

FixedPointSolution solution_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool header = false;
  FixedPointSolution sol;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tok;
    if (!(ss >> tok)) continue;
    if (!header) {
      std::string ver;
      if (tok != "solution" || !(ss >> ver) || ver != "v1")
        throw ParseError("expected 'solution v1' header", line_no);
      header = true;
      continue;
    }
    if (tok == "pattern") {
      std::string pat;
      if (ss >> pat) sol.pattern.decisions = pat;
      continue;
    }
    std::string eq, val;
    if (!(ss >> eq >> val) || eq != "=")
      throw ParseError("expected '<name> = <rational>'", line_no);
    if (tok.rfind("x", 0) == 0 && tok.size() > 1)
      sol.inputs.push_back(parse_rational(val));
    else if (tok.rfind("aux", 0) == 0 && tok.size() > 3)
      sol.aux.push_back(parse_rational(val));
    else
      throw ParseError("unknown assignment '" + tok + "'", line_no);
  }
  if (!header) throw ParseError("missing solution header");
  return sol;
}

}  // namespace plopt
