#include "plopt/gates.hpp"

#include <functional>
#include <map>
#include <mutex>
#include <sstream>

#include "plopt/errors.hpp"
#include "plopt/lp.hpp"

namespace plopt {

void LinOptGateSpec::validate() const {
  if (R <= 0 || C <= 0) throw ContractError("linopt spec: R and C must be positive");
  if (A.size() != m) throw ContractError("linopt spec: A must have m rows");
  for (const auto& row : A)
    if (row.size() != n) throw ContractError("linopt spec: A row width mismatch");
  if (subgrad.n_inputs != n + k) throw ContractError("linopt spec: subgrad must take n+k inputs");
  if (subgrad.primary_outputs.size() != n)
    throw ContractError("linopt spec: subgrad must have n outputs");
  subgrad.check_well_formed();
}

std::size_t FeasibilitySpec::y_arity() const { return conds.empty() ? 0 : conds[0].n_inputs; }

void FeasibilitySpec::validate() const {
  if (R <= 0) throw ContractError("feasibility spec: R must be positive");
  if (input_bound <= 0) throw ContractError("feasibility spec: input_bound must be positive");
  if (A.size() != m || conds.size() != m)
    throw ContractError("feasibility spec: need one row and one condition per constraint");
  for (const auto& row : A)
    if (row.size() != n) throw ContractError("feasibility spec: A row width mismatch");
  for (const Circuit& h : conds) {
    if (h.primary_outputs.size() != 1)
      throw ContractError("feasibility spec: conditions must have one output");
    if (h.n_inputs != y_arity())
      throw ContractError("feasibility spec: conditions must share the y arity");
  }
}

void QAppSpec::validate() const {
  if (rho <= 0 || rho > 1) throw ContractError("qapp spec: rho must be in (0,1]");
  if (h.size() != m) throw ContractError("qapp spec: need one condition per node");
  for (const Circuit& c : h)
    if (c.primary_outputs.size() != 1) throw ContractError("qapp spec: conditions need one output");
}

Rational compute_K(const LinOptGateSpec& spec) {
  spec.validate();
  std::vector<Interval> in;
  in.reserve(spec.n + spec.k);
  for (std::size_t j = 0; j < spec.n; ++j) in.emplace_back(-spec.R, spec.R);
  for (std::size_t j = 0; j < spec.k; ++j) in.emplace_back(-spec.C, spec.C);
  std::vector<Interval> ranges = propagate_intervals(spec.subgrad, in);
  Rational inf_bound(0);
  for (GateRef r : spec.subgrad.primary_outputs)
    inf_bound = rat_max(inf_bound, ranges[r].abs_bound());
  Rational K = sqrt_upper_bound(static_cast<unsigned long>(spec.n)) * inf_bound;
  if (K == 0) K = 1;  // zero subgradient: any positive bound is valid
  return K;
}

namespace {

// Rows of [A; I; -I] (the box rows carry coefficient 1 regardless of R).
RatMat augmented_rows(const RatMat& A, std::size_t n) {
  RatMat rows = A;
  for (std::size_t j = 0; j < n; ++j) {
    RatVec e(n, Rational(0));
    e[j] = 1;
    rows.push_back(e);
  }
  for (std::size_t j = 0; j < n; ++j) {
    RatVec e(n, Rational(0));
    e[j] = -1;
    rows.push_back(e);
  }
  return rows;
}

// Optimal value of
//   min sum_{i in I} a_i^T u   s.t. a_i^T u >= 0 (i in I), u = sum_I lambda_i a_i,
//   lambda >= 0, -1 <= u <= 1, u_k = s
// or nullopt when infeasible. Variables: u (n) then lambda (|I|).
std::optional<Rational> subset_program_value(const RatMat& rows, const std::vector<std::size_t>& I,
                                             std::size_t n, std::size_t k, int s) {
  const std::size_t nv = n + I.size();
  LPProblem p;
  p.c.assign(nv, Rational(0));
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t idx : I) p.c[j] += rows[idx][j];
  p.lo.assign(nv, std::nullopt);
  p.hi.assign(nv, std::nullopt);
  for (std::size_t j = 0; j < n; ++j) {
    p.lo[j] = Rational(-1);
    p.hi[j] = Rational(1);
  }
  p.lo[k] = p.hi[k] = Rational(s);
  for (std::size_t t = 0; t < I.size(); ++t) p.lo[n + t] = Rational(0);
  // -a_i^T u <= 0 for i in I
  for (std::size_t idx : I) {
    RatVec row(nv, Rational(0));
    for (std::size_t j = 0; j < n; ++j) row[j] = -rows[idx][j];
    p.A.push_back(std::move(row));
    p.b.emplace_back(0);
  }
  // u_j - sum_t lambda_t a_{I[t], j} = 0
  for (std::size_t j = 0; j < n; ++j) {
    RatVec row(nv, Rational(0));
    row[j] = 1;
    for (std::size_t t = 0; t < I.size(); ++t) row[n + t] = -rows[I[t]][j];
    p.eq_A.push_back(std::move(row));
    p.eq_b.emplace_back(0);
  }
  LPResult res = lp_solve_exact(p);
  if (res.status != LPStatus::Optimal) return std::nullopt;
  return res.value;
}

Rational gamma_star_exact(const RatMat& rows, std::size_t n) {
  // Every partition (I0, I1) of a subset I is dominated by (empty, I): the
  // same point stays feasible and the objective value is unchanged, so the
  // minimum over all partitions equals the minimum over I1 = I alone.
  const std::size_t M = rows.size();
  std::optional<Rational> best;
  std::vector<std::size_t> I;
  for (std::size_t mask = 1; mask < (std::size_t(1) << M); ++mask) {
    I.clear();
    for (std::size_t i = 0; i < M; ++i)
      if (mask & (std::size_t(1) << i)) I.push_back(i);
    for (std::size_t k = 0; k < n; ++k)
      for (int s : {+1, -1}) {
        std::optional<Rational> v = subset_program_value(rows, I, n, k, s);
        if (!v) continue;
        if (*v <= 0)
          throw InternalCheckError("gamma* enumeration found a nonpositive feasible optimum");
        if (!best || *v < *best) best = *v;
      }
  }
  if (!best) throw InternalCheckError("gamma* enumeration found no feasible program");
  return *best / (2 * sqrt_upper_bound(static_cast<unsigned long>(n)));
}

Rational gamma_star_bitbound(const RatMat& rows, std::size_t n) {
  const std::size_t M = rows.size();
  // Scale the augmented matrix to integers; bound any optimal LP value of the
  // enumeration family away from zero via a Hadamard determinant bound.
  mpz_class denom_lcm = 1;
  mpz_class num_max = 1;
  for (const RatVec& row : rows)
    for (const Rational& q : row) {
      mpz_class d = q.get_den();
      mpz_lcm(denom_lcm.get_mpz_t(), denom_lcm.get_mpz_t(), d.get_mpz_t());
      mpz_class a = abs(q.get_num());
      if (a > num_max) num_max = a;
    }
  const unsigned long d = 2 * static_cast<unsigned long>(n + M) + 2;
  mpz_class entry = denom_lcm * num_max * d;
  if (entry < 2) entry = 2;
  mpz_class had;
  mpz_pow_ui(had.get_mpz_t(), entry.get_mpz_t(), d);
  Rational lower = Rational(1) / Rational(had * denom_lcm);
  return lower / (2 * sqrt_upper_bound(static_cast<unsigned long>(n)));
}

struct GammaCache {
  std::mutex mu;
  std::map<std::string, Rational> values;
};
GammaCache& gamma_cache() {
  static GammaCache cache;
  return cache;
}

std::string gamma_key(const RatMat& rows, std::size_t n, GammaOptions::Mode mode) {
  std::ostringstream key;
  key << (mode == GammaOptions::Mode::Exact ? "e" : "b") << '|' << n;
  for (const RatVec& row : rows)
    for (const Rational& q : row) key << '|' << rational_to_string(q);
  return key.str();
}

}  // namespace

Rational compute_gamma_star(const RatMat& A, std::size_t n_cols, const Rational& R,
                            const GammaOptions& options) {
  if (R <= 0) throw ContractError("gamma*: R must be positive");
  for (const auto& row : A)
    if (row.size() != n_cols) throw ContractError("gamma*: row width mismatch");
  RatMat rows = augmented_rows(A, n_cols);
  GammaOptions::Mode mode = options.mode;
  if (mode == GammaOptions::Mode::Exact && rows.size() > options.exact_cap) {
    if (!options.fallback_to_bitbound)
      throw CapError("gamma* exact enumeration cap exceeded: m+2n = " +
                     std::to_string(rows.size()) + " > " + std::to_string(options.exact_cap));
    mode = GammaOptions::Mode::BitBound;
  }
  const std::string key = gamma_key(rows, n_cols, mode);
  {
    std::lock_guard<std::mutex> lock(gamma_cache().mu);
    auto it = gamma_cache().values.find(key);
    if (it != gamma_cache().values.end()) return it->second;
  }
  Rational value = mode == GammaOptions::Mode::Exact ? gamma_star_exact(rows, n_cols)
                                                     : gamma_star_bitbound(rows, n_cols);
  std::lock_guard<std::mutex> lock(gamma_cache().mu);
  gamma_cache().values.emplace(key, value);
  return value;
}

std::vector<GateRef> emit_linopt(CircuitBuilder& b, const LinOptGateSpec& spec,
                                 const std::vector<GateRef>& b_refs,
                                 const std::vector<GateRef>& c_refs, const GammaOptions& options,
                                 LinOptWiring* wiring) {
  spec.validate();
  if (b_refs.size() != spec.m || c_refs.size() != spec.k)
    throw ContractError("emit_linopt: b/c wire count mismatch");
  const Rational K = compute_K(spec);
  const Rational gamma = compute_gamma_star(spec.A, spec.n, spec.R, options);
  const Rational eps = gamma / K;

  LinOptWiring w;
  w.n = spec.n, w.m = spec.m, w.k = spec.k, w.l_sub = spec.subgrad.n_aux;
  w.K = K, w.gamma_star = gamma, w.epsilon = eps, w.R = spec.R;

  // Step 1: x = 2R*alpha - R.
  w.aux_alpha_first = b.num_aux();
  std::vector<GateRef> alpha(spec.n);
  for (std::size_t j = 0; j < spec.n; ++j) alpha[j] = b.aux();
  std::vector<GateRef> alpha_bar(spec.n);
  for (std::size_t j = 0; j < spec.n; ++j) {
    GateRef scaled = b.scale(2 * spec.R, alpha[j]);
    w.x_refs.push_back(b.sub(scaled, b.constant(spec.R)));
  }

  // Step 2: v = subgrad(x, c), splicing the subgradient's own aux ports.
  w.aux_sub_first = b.num_aux();
  std::vector<GateRef> sub_in = w.x_refs;
  sub_in.insert(sub_in.end(), c_refs.begin(), c_refs.end());
  w.v_refs = b.splice(spec.subgrad, sub_in);

  // Step 3: mu_i in H(a_i^T x - b_i) via one Heaviside block per row.
  w.aux_mu_first = b.num_aux();
  std::vector<GateRef> mu(spec.m);
  for (std::size_t i = 0; i < spec.m; ++i) {
    GateRef ax = b.affine(Rational(0), spec.A[i], w.x_refs);
    GateRef s = b.sub(ax, b_refs[i]);
    mu[i] = b.heaviside_of(s);
  }

  // Steps 4-5: xbar = projection of x - eps*v - A^T mu, alpha_bar rescaled.
  for (std::size_t j = 0; j < spec.n; ++j) {
    std::vector<Rational> coeffs;
    std::vector<GateRef> refs;
    coeffs.push_back(Rational(1));
    refs.push_back(w.x_refs[j]);
    coeffs.push_back(-eps);
    refs.push_back(w.v_refs[j]);
    for (std::size_t i = 0; i < spec.m; ++i) {
      if (spec.A[i][j] == 0) continue;
      coeffs.push_back(-spec.A[i][j]);
      refs.push_back(mu[i]);
    }
    GateRef step = b.affine(Rational(0), coeffs, refs);
    GateRef xbar = b.clamp(step, -spec.R, spec.R);
    w.xbar_refs.push_back(xbar);
    alpha_bar[j] = b.scale(1 / (2 * spec.R), b.add(xbar, b.constant(spec.R)));
  }
  for (std::size_t j = 0; j < spec.n; ++j) {
    // alpha's aux output is the rescaled projected step.
    // (heaviside_of and splice manage their own aux outputs.)
    b.set_aux_output(w.aux_alpha_first + j, alpha_bar[j]);
  }
  if (wiring) *wiring = w;
  return w.xbar_refs;
}

Circuit expand_linopt(const LinOptGateSpec& spec, const GammaOptions& options,
                      LinOptWiring* wiring) {
  spec.validate();
  CircuitBuilder b;
  // Wide declared ranges for the standalone gadget's free inputs.
  Rational row_norm(1);
  for (const auto& row : spec.A) {
    Rational s(0);
    for (const Rational& q : row) s += rat_abs(q);
    row_norm = rat_max(row_norm, s);
  }
  const Rational bb = spec.R * row_norm + spec.C + 1;
  std::vector<GateRef> b_refs, c_refs;
  for (std::size_t i = 0; i < spec.m; ++i) b_refs.push_back(b.input(Interval(-bb, bb)));
  for (std::size_t j = 0; j < spec.k; ++j) c_refs.push_back(b.input(Interval(-spec.C, spec.C)));
  std::vector<GateRef> outs = emit_linopt(b, spec, b_refs, c_refs, options, wiring);
  for (GateRef r : outs) b.mark_primary_output(r);
  return b.finish();
}

GateRef emit_h_times_nonneg(CircuitBuilder& b, GateRef s_ref, GateRef w_ref,
                            const GammaOptions& options) {
  if (b.range_of(w_ref).lo < 0)
    throw ContractError("emit_h_times_nonneg: w must be nonnegative by range");
  // Constant w needs no optimization gadget: H(s) * c is a scaled Heaviside.
  // (Copy the range: adding gates may reallocate the builder's tables.)
  const Interval rw = b.range_of(w_ref);
  if (rw.lo == rw.hi) {
    if (rw.lo == 0) return b.constant(Rational(0));
    return b.scale(rw.lo, b.heaviside_of(s_ref));
  }
  // LP in v: min (-s) v  s.t.  v <= w, -v <= 0, v in [-R, R].
  LinOptGateSpec spec;
  spec.n = 1;
  spec.m = 2;
  spec.k = 1;
  spec.A = {{Rational(1)}, {Rational(-1)}};
  spec.R = rat_max(b.range_of(w_ref).hi, Rational(1));
  spec.C = rat_max(b.range_of(s_ref).abs_bound(), Rational(1));
  {
    CircuitBuilder sg;
    sg.input(Interval(-spec.R, spec.R));                 // v, unused
    GateRef c = sg.input(Interval(-spec.C, spec.C));     // parameter = -s
    sg.mark_primary_output(c);
    spec.subgrad = sg.finish();
  }
  GateRef minus_s = b.scale(Rational(-1), s_ref);
  GateRef zero = b.constant(Rational(0));
  std::vector<GateRef> out = emit_linopt(b, spec, {w_ref, zero}, {minus_s}, options);
  return out[0];
}

GateRef emit_h_times(CircuitBuilder& b, GateRef x_ref, GateRef y_ref,
                     const GammaOptions& options) {
  const Interval ry = b.range_of(y_ref);
  if (ry.lo >= 0) return emit_h_times_nonneg(b, x_ref, y_ref, options);
  if (ry.hi <= 0) {
    GateRef neg = emit_h_times_nonneg(b, x_ref, b.scale(Rational(-1), y_ref), options);
    return b.scale(Rational(-1), neg);
  }
  GateRef wp = b.max(b.constant(Rational(0)), y_ref);
  GateRef wn = b.max(b.constant(Rational(0)), b.scale(Rational(-1), y_ref));
  GateRef vp = emit_h_times_nonneg(b, x_ref, wp, options);
  GateRef vn = emit_h_times_nonneg(b, x_ref, wn, options);
  return b.sub(vp, vn);
}

Circuit mult_by_heaviside(const Rational& input_bound, const GammaOptions& options) {
  if (input_bound <= 0) throw ContractError("mult_by_heaviside: bound must be positive");
  CircuitBuilder b;
  GateRef x = b.input(Interval(-input_bound, input_bound));
  GateRef y = b.input(Interval(-input_bound, input_bound));
  GateRef wp = b.max(b.constant(Rational(0)), y);
  GateRef wn = b.max(b.constant(Rational(0)), b.scale(Rational(-1), y));
  GateRef vp = emit_h_times_nonneg(b, x, wp, options);
  GateRef vn = emit_h_times_nonneg(b, x, wn, options);
  b.mark_primary_output(b.sub(vp, vn));
  return b.finish();
}

std::vector<GateRef> emit_feasibility(CircuitBuilder& b, const FeasibilitySpec& spec,
                                      const std::vector<GateRef>& b_refs,
                                      const std::vector<GateRef>& y_refs,
                                      const GammaOptions& options) {
  spec.validate();
  if (b_refs.size() != spec.m || y_refs.size() != spec.y_arity())
    throw ContractError("emit_feasibility: wire count mismatch");

  // w_i = max{0, h_i(y)} in the enclosing circuit.
  std::vector<GateRef> w_refs(spec.m);
  Rational w_max(1);
  for (std::size_t i = 0; i < spec.m; ++i) {
    GateRef h = b.splice(spec.conds[i], y_refs)[0];
    w_refs[i] = b.max(b.constant(Rational(0)), h);
    w_max = rat_max(w_max, b.range_of(w_refs[i]).hi);
  }
  Rational b_max(1);
  for (GateRef r : b_refs) b_max = rat_max(b_max, b.range_of(r).abs_bound());

  // Subgradient pseudo-circuit of sum_i w_i * max{0, a_i^T x - b_i}:
  // inputs (x; b, w), outputs sum_i w_i H(a_i^T x - b_i) a_i.
  // Per-wire ranges carry over so constant-weight rows keep their cheap form.
  Circuit subgrad;
  {
    CircuitBuilder sg;
    std::vector<GateRef> x(spec.n), bb(spec.m), ww(spec.m);
    for (std::size_t j = 0; j < spec.n; ++j) x[j] = sg.input(Interval(-spec.R, spec.R));
    for (std::size_t i = 0; i < spec.m; ++i) bb[i] = sg.input(b.range_of(b_refs[i]));
    for (std::size_t i = 0; i < spec.m; ++i) ww[i] = sg.input(b.range_of(w_refs[i]));
    std::vector<GateRef> g(spec.m);
    for (std::size_t i = 0; i < spec.m; ++i) {
      GateRef ax = sg.affine(Rational(0), spec.A[i], x);
      GateRef s = sg.sub(ax, bb[i]);
      g[i] = emit_h_times_nonneg(sg, s, ww[i], options);
    }
    for (std::size_t j = 0; j < spec.n; ++j) {
      std::vector<Rational> coeffs;
      std::vector<GateRef> refs;
      for (std::size_t i = 0; i < spec.m; ++i) {
        if (spec.A[i][j] == 0) continue;
        coeffs.push_back(spec.A[i][j]);
        refs.push_back(g[i]);
      }
      sg.mark_primary_output(sg.affine(Rational(0), coeffs, refs));
    }
    subgrad = sg.finish();
  }

  LinOptGateSpec outer;
  outer.n = spec.n;
  outer.m = 0;
  outer.k = 2 * spec.m;
  outer.R = spec.R;
  outer.C = rat_max(b_max, w_max);
  outer.subgrad = std::move(subgrad);
  std::vector<GateRef> params = b_refs;
  params.insert(params.end(), w_refs.begin(), w_refs.end());
  return emit_linopt(b, outer, {}, params, options);
}

Circuit build_feasibility(const FeasibilitySpec& spec, const GammaOptions& options) {
  spec.validate();
  CircuitBuilder b;
  std::vector<GateRef> b_refs, y_refs;
  const Interval in(-spec.input_bound, spec.input_bound);
  for (std::size_t i = 0; i < spec.m; ++i) b_refs.push_back(b.input(in));
  for (std::size_t j = 0; j < spec.y_arity(); ++j) y_refs.push_back(b.input(in));
  std::vector<GateRef> outs = emit_feasibility(b, spec, b_refs, y_refs, options);
  for (GateRef r : outs) b.mark_primary_output(r);
  return b.finish();
}

RatVec qapp_witness(const QAppSpec& spec, const RatVec& y) {
  spec.validate();
  RatVec hv(spec.m);
  for (std::size_t i = 0; i < spec.m; ++i) {
    if (spec.h[i].n_inputs != y.size()) throw ContractError("qapp_witness: y arity mismatch");
    hv[i] = eval(spec.h[i], y, RatVec(spec.h[i].n_aux, Rational(0))).primary[0];
  }
  // Longest path to a sink in the graph with edge (k, k') iff h_k > h_{k'}.
  std::vector<int> depth(spec.m, -1);
  std::vector<int> state(spec.m, 0);  // 0 new, 1 on stack, 2 done
  std::function<int(std::size_t)> longest = [&](std::size_t u) -> int {
    if (state[u] == 1) throw ContractError("qapp_witness: feasibility graph has a cycle");
    if (state[u] == 2) return depth[u];
    state[u] = 1;
    int best = 0;
    for (std::size_t v = 0; v < spec.m; ++v)
      if (v != u && hv[u] > hv[v]) best = std::max(best, 1 + longest(v));
    state[u] = 2;
    depth[u] = best;
    return best;
  };
  Rational total(0);
  std::vector<Rational> pow_rho(spec.m + 1);
  pow_rho[0] = 1;
  for (std::size_t d = 1; d <= spec.m; ++d) pow_rho[d] = pow_rho[d - 1] * spec.rho;
  RatVec w(spec.m);
  for (std::size_t k = 0; k < spec.m; ++k) {
    int d = longest(k);
    w[k] = pow_rho[static_cast<std::size_t>(d)];
    total += w[k];
  }
  for (Rational& q : w) q /= total;
  return w;
}

std::string linopt_spec_to_text(const LinOptGateSpec& spec) {
  std::ostringstream out;
  out << "linopt-spec v1 n=" << spec.n << " m=" << spec.m << " k=" << spec.k << "\n";
  for (const RatVec& row : spec.A) {
    out << "a";
    for (const Rational& q : row) out << " " << rational_to_string(q);
    out << "\n";
  }
  out << "r " << rational_to_string(spec.R) << "\n";
  out << "c " << rational_to_string(spec.C) << "\n";
  out << "subgrad\n";
  out << circuit_to_text(spec.subgrad);
  return out.str();
}

LinOptGateSpec linopt_spec_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  LinOptGateSpec spec;
  bool header = false, have_r = false, have_c = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tok;
    if (!(ss >> tok)) continue;
    if (!header) {
      std::string ver, ntok, mtok, ktok;
      if (tok != "linopt-spec" || !(ss >> ver >> ntok >> mtok >> ktok) || ver != "v1")
        throw ParseError("expected 'linopt-spec v1 n=<n> m=<m> k=<k>' header", line_no);
      auto count = [&](const std::string& t, const char* key) -> std::size_t {
        std::string prefix = std::string(key) + "=";
        if (t.rfind(prefix, 0) != 0) throw ParseError("bad header field '" + t + "'", line_no);
        return static_cast<std::size_t>(std::stoul(t.substr(prefix.size())));
      };
      spec.n = count(ntok, "n");
      spec.m = count(mtok, "m");
      spec.k = count(ktok, "k");
      header = true;
      continue;
    }
    if (tok == "a") {
      RatVec row;
      std::string q;
      while (ss >> q) row.push_back(parse_rational(q));
      if (row.size() != spec.n) throw ParseError("A row has wrong width", line_no);
      spec.A.push_back(std::move(row));
      continue;
    }
    if (tok == "r" || tok == "c") {
      std::string q;
      if (!(ss >> q)) throw ParseError("missing value", line_no);
      (tok == "r" ? spec.R : spec.C) = parse_rational(q);
      (tok == "r" ? have_r : have_c) = true;
      continue;
    }
    if (tok == "subgrad") {
      std::ostringstream rest;
      while (std::getline(in, line)) rest << line << "\n";
      spec.subgrad = circuit_from_text(rest.str());
      if (!have_r || !have_c) throw ParseError("missing r/c before subgrad block");
      spec.validate();
      return spec;
    }
    throw ParseError("unexpected line '" + tok + "'", line_no);
  }
  throw ParseError("missing subgrad block");
}

}  // namespace plopt
