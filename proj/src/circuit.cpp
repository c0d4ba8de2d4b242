#include "plopt/circuit.hpp"

#include <fstream>
#include <sstream>

#include "plopt/errors.hpp"

namespace plopt {

Interval interval_add(const Interval& a, const Interval& b) {
  return {a.lo + b.lo, a.hi + b.hi};
}
Interval interval_sub(const Interval& a, const Interval& b) {
  return {a.lo - b.hi, a.hi - b.lo};
}
Interval interval_max(const Interval& a, const Interval& b) {
  return {rat_max(a.lo, b.lo), rat_max(a.hi, b.hi)};
}
Interval interval_min(const Interval& a, const Interval& b) {
  return {rat_min(a.lo, b.lo), rat_min(a.hi, b.hi)};
}
Interval interval_scale(const Rational& zeta, const Interval& a) {
  if (zeta >= 0) return {zeta * a.lo, zeta * a.hi};
  return {zeta * a.hi, zeta * a.lo};
}

std::size_t Circuit::num_branching_gates() const {
  std::size_t count = 0;
  for (const Gate& g : gates)
    if (g.kind == GateKind::Max || g.kind == GateKind::Min) ++count;
  return count;
}

void Circuit::check_well_formed() const {
  for (std::size_t i = 0; i < gates.size(); ++i) {
    const Gate& g = gates[i];
    switch (g.kind) {
      case GateKind::Input:
        if (g.index >= n_inputs) throw ContractError("input index out of range");
        break;
      case GateKind::Aux:
        if (g.index >= n_aux) throw ContractError("aux index out of range");
        break;
      case GateKind::Const:
        break;
      case GateKind::Scale:
        if (g.a >= i) throw ContractError("gate ref must point backward");
        break;
      default:
        if (g.a >= i || g.b >= i) throw ContractError("gate ref must point backward");
    }
  }
  for (GateRef r : primary_outputs)
    if (r >= gates.size()) throw ContractError("output ref out of range");
  if (aux_outputs.size() != n_aux) throw ContractError("aux output count must equal n_aux");
  for (GateRef r : aux_outputs)
    if (r >= gates.size()) throw ContractError("aux output ref out of range");
}

RatVec eval_all_gates(const Circuit& circuit, const RatVec& inputs, const RatVec& aux) {
  if (inputs.size() != circuit.n_inputs) throw ContractError("input length mismatch");
  if (aux.size() != circuit.n_aux) throw ContractError("aux length mismatch");
  for (const Rational& z : aux)
    if (z < 0 || z > 1) throw ContractError("aux entry outside [0,1]");
  RatVec v(circuit.gates.size());
  for (std::size_t i = 0; i < circuit.gates.size(); ++i) {
    const Gate& g = circuit.gates[i];
    switch (g.kind) {
      case GateKind::Input: v[i] = inputs[g.index]; break;
      case GateKind::Aux: v[i] = aux[g.index]; break;
      case GateKind::Const: v[i] = g.value; break;
      case GateKind::Add: v[i] = v[g.a] + v[g.b]; break;
      case GateKind::Sub: v[i] = v[g.a] - v[g.b]; break;
      case GateKind::Max: v[i] = rat_max(v[g.a], v[g.b]); break;
      case GateKind::Min: v[i] = rat_min(v[g.a], v[g.b]); break;
      case GateKind::Scale: v[i] = g.value * v[g.a]; break;
    }
  }
  return v;
}

EvalResult eval(const Circuit& circuit, const RatVec& inputs, const RatVec& aux) {
  RatVec v = eval_all_gates(circuit, inputs, aux);
  EvalResult res;
  res.primary.reserve(circuit.primary_outputs.size());
  for (GateRef r : circuit.primary_outputs) res.primary.push_back(v[r]);
  res.aux_out.reserve(circuit.aux_outputs.size());
  for (GateRef r : circuit.aux_outputs) res.aux_out.push_back(v[r]);
  return res;
}

std::vector<Interval> propagate_intervals(const Circuit& circuit,
                                          const std::vector<Interval>& input_intervals,
                                          const std::vector<Interval>& aux_intervals) {
  if (input_intervals.size() != circuit.n_inputs)
    throw ContractError("input interval count mismatch");
  std::vector<Interval> aux = aux_intervals;
  if (aux.empty()) aux.assign(circuit.n_aux, Interval(Rational(0), Rational(1)));
  if (aux.size() != circuit.n_aux) throw ContractError("aux interval count mismatch");
  std::vector<Interval> v(circuit.gates.size());
  for (std::size_t i = 0; i < circuit.gates.size(); ++i) {
    const Gate& g = circuit.gates[i];
    switch (g.kind) {
      case GateKind::Input: v[i] = input_intervals[g.index]; break;
      case GateKind::Aux: v[i] = aux[g.index]; break;
      case GateKind::Const: v[i] = Interval(g.value, g.value); break;
      case GateKind::Add: v[i] = interval_add(v[g.a], v[g.b]); break;
      case GateKind::Sub: v[i] = interval_sub(v[g.a], v[g.b]); break;
      case GateKind::Max: v[i] = interval_max(v[g.a], v[g.b]); break;
      case GateKind::Min: v[i] = interval_min(v[g.a], v[g.b]); break;
      case GateKind::Scale: v[i] = interval_scale(g.value, v[g.a]); break;
    }
  }
  return v;
}

Rational magnitude_bound(const Circuit& circuit, const Rational& B) {
  if (B < 0) throw ContractError("B must be nonnegative");
  std::vector<Interval> in(circuit.n_inputs, Interval(-B, B));
  std::vector<Interval> v = propagate_intervals(circuit, in);
  Rational bound(0);
  for (GateRef r : circuit.primary_outputs) bound = rat_max(bound, v[r].abs_bound());
  return bound;
}

Rational lipschitz_bound(const Circuit& circuit) {
  std::vector<Rational> l(circuit.gates.size());
  for (std::size_t i = 0; i < circuit.gates.size(); ++i) {
    const Gate& g = circuit.gates[i];
    switch (g.kind) {
      case GateKind::Input:
      case GateKind::Aux: l[i] = 1; break;
      case GateKind::Const: l[i] = 0; break;
      case GateKind::Add:
      case GateKind::Sub: l[i] = l[g.a] + l[g.b]; break;
      case GateKind::Max:
      case GateKind::Min: l[i] = rat_max(l[g.a], l[g.b]); break;
      case GateKind::Scale: l[i] = rat_abs(g.value) * l[g.a]; break;
    }
  }
  Rational bound(0);
  for (GateRef r : circuit.primary_outputs) bound = rat_max(bound, l[r]);
  return bound;
}

Circuit heaviside() {
  CircuitBuilder b;
  GateRef x = b.input(Interval(Rational(-1), Rational(1)));
  GateRef z = b.heaviside_of(x);
  b.mark_primary_output(z);
  return b.finish();
}

// ---- CircuitBuilder ----

GateRef CircuitBuilder::push(Gate g, Interval range) {
  circuit_.gates.push_back(std::move(g));
  ranges_.push_back(std::move(range));
  return circuit_.gates.size() - 1;
}

GateRef CircuitBuilder::input(Interval range) {
  Gate g{GateKind::Input};
  g.index = circuit_.n_inputs++;
  return push(g, std::move(range));
}

GateRef CircuitBuilder::aux() {
  Gate g{GateKind::Aux};
  g.index = circuit_.n_aux++;
  circuit_.aux_outputs.push_back(0);  // placeholder until registered
  return push(g, Interval(Rational(0), Rational(1)));
}

GateRef CircuitBuilder::constant(const Rational& value) {
  Gate g{GateKind::Const};
  g.value = value;
  return push(g, Interval(value, value));
}

GateRef CircuitBuilder::add(GateRef a, GateRef b) {
  Gate g{GateKind::Add, a, b};
  return push(g, interval_add(ranges_[a], ranges_[b]));
}

GateRef CircuitBuilder::sub(GateRef a, GateRef b) {
  Gate g{GateKind::Sub, a, b};
  return push(g, interval_sub(ranges_[a], ranges_[b]));
}

GateRef CircuitBuilder::max(GateRef a, GateRef b) {
  Gate g{GateKind::Max, a, b};
  return push(g, interval_max(ranges_[a], ranges_[b]));
}

GateRef CircuitBuilder::min(GateRef a, GateRef b) {
  Gate g{GateKind::Min, a, b};
  return push(g, interval_min(ranges_[a], ranges_[b]));
}

GateRef CircuitBuilder::scale(const Rational& zeta, GateRef a) {
  Gate g{GateKind::Scale, a};
  g.value = zeta;
  return push(g, interval_scale(zeta, ranges_[a]));
}

GateRef CircuitBuilder::affine(const Rational& constant_term, const std::vector<Rational>& coeffs,
                               const std::vector<GateRef>& refs) {
  if (coeffs.size() != refs.size()) throw ContractError("affine: size mismatch");
  std::optional<GateRef> acc;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (coeffs[i] == 0) continue;
    GateRef term = coeffs[i] == 1 ? refs[i] : scale(coeffs[i], refs[i]);
    acc = acc ? add(*acc, term) : term;
  }
  if (constant_term != 0 || !acc) {
    GateRef c = constant(constant_term);
    acc = acc ? add(c, *acc) : c;
  }
  return *acc;
}

GateRef CircuitBuilder::clamp(GateRef a, const Rational& lo, const Rational& hi) {
  // interior regime first in the branch-pattern order
  return min(max(a, constant(lo)), constant(hi));
}

GateRef CircuitBuilder::heaviside_of(GateRef arg) {
  GateRef z = aux();
  GateRef sum = add(z, arg);
  // regimes enumerate as sat-low, interior, sat-high under the canonical
  // gate-major left-first order
  GateRef clamped = min(max(constant(Rational(0)), sum), constant(Rational(1)));
  circuit_.aux_outputs[circuit_.gates[z].index] = clamped;
  return z;
}

void CircuitBuilder::register_aux_output(GateRef r) { circuit_.aux_outputs.push_back(r); }

void CircuitBuilder::set_aux_output(std::size_t aux_index, GateRef r) {
  if (aux_index >= circuit_.aux_outputs.size()) throw ContractError("set_aux_output: bad index");
  circuit_.aux_outputs[aux_index] = r;
}

std::vector<GateRef> CircuitBuilder::splice(const Circuit& inner,
                                            const std::vector<GateRef>& input_refs) {
  if (input_refs.size() != inner.n_inputs) throw ContractError("splice: input count mismatch");
  std::vector<GateRef> map(inner.gates.size());
  std::vector<GateRef> new_aux(inner.n_aux);
  for (std::size_t j = 0; j < inner.n_aux; ++j) new_aux[j] = aux();
  for (std::size_t i = 0; i < inner.gates.size(); ++i) {
    const Gate& g = inner.gates[i];
    switch (g.kind) {
      case GateKind::Input: map[i] = input_refs[g.index]; break;
      case GateKind::Aux: map[i] = new_aux[g.index]; break;
      case GateKind::Const: map[i] = constant(g.value); break;
      case GateKind::Add: map[i] = add(map[g.a], map[g.b]); break;
      case GateKind::Sub: map[i] = sub(map[g.a], map[g.b]); break;
      case GateKind::Max: map[i] = max(map[g.a], map[g.b]); break;
      case GateKind::Min: map[i] = min(map[g.a], map[g.b]); break;
      case GateKind::Scale: map[i] = scale(g.value, map[g.a]); break;
    }
  }
  for (std::size_t j = 0; j < inner.n_aux; ++j)
    circuit_.aux_outputs[circuit_.gates[new_aux[j]].index] = map[inner.aux_outputs[j]];
  std::vector<GateRef> outs;
  outs.reserve(inner.primary_outputs.size());
  for (GateRef r : inner.primary_outputs) outs.push_back(map[r]);
  return outs;
}

void CircuitBuilder::mark_primary_output(GateRef r) { circuit_.primary_outputs.push_back(r); }

const Interval& CircuitBuilder::range_of(GateRef r) const { return ranges_[r]; }

Circuit CircuitBuilder::finish() {
  circuit_.check_well_formed();
  return std::move(circuit_);
}

// ---- serialization ----

namespace {

const char* gate_op_name(GateKind k) {
  switch (k) {
    case GateKind::Input: return "input";
    case GateKind::Aux: return "aux";
    case GateKind::Const: return "const";
    case GateKind::Add: return "add";
    case GateKind::Sub: return "sub";
    case GateKind::Max: return "max";
    case GateKind::Min: return "min";
    case GateKind::Scale: return "scale";
  }
  return "?";
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

GateRef parse_ref(const std::string& tok, std::size_t limit, int line_no) {
  if (tok.size() < 2 || tok[0] != 'g') throw ParseError("expected gate ref, got '" + tok + "'", line_no);
  char* end = nullptr;
  unsigned long v = std::strtoul(tok.c_str() + 1, &end, 10);
  if (*end != '\0' || v >= limit) throw ParseError("bad gate ref '" + tok + "'", line_no);
  return static_cast<GateRef>(v);
}

std::size_t parse_count(const std::string& tok, const std::string& key, int line_no) {
  if (tok.rfind(key + "=", 0) != 0) throw ParseError("expected " + key + "=<count>", line_no);
  const std::string num = tok.substr(key.size() + 1);
  char* end = nullptr;
  unsigned long v = std::strtoul(num.c_str(), &end, 10);
  if (num.empty() || *end != '\0') throw ParseError("bad count in '" + tok + "'", line_no);
  return v;
}

}  // namespace

std::string circuit_to_text(const Circuit& circuit) {
  std::ostringstream out;
  out << "pl-circuit v1 n_inputs=" << circuit.n_inputs << " n_aux=" << circuit.n_aux << "\n";
  for (std::size_t i = 0; i < circuit.gates.size(); ++i) {
    const Gate& g = circuit.gates[i];
    out << "g" << i << " = " << gate_op_name(g.kind);
    switch (g.kind) {
      case GateKind::Input:
      case GateKind::Aux: out << " " << g.index; break;
      case GateKind::Const: out << " " << rational_to_string(g.value); break;
      case GateKind::Scale: out << " " << rational_to_string(g.value) << " g" << g.a; break;
      default: out << " g" << g.a << " g" << g.b; break;
    }
    out << "\n";
  }
  out << "out";
  for (GateRef r : circuit.primary_outputs) out << " g" << r;
  out << "\n";
  out << "aux";
  for (GateRef r : circuit.aux_outputs) out << " g" << r;
  out << "\n";
  return out.str();
}

Circuit circuit_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  Circuit c;
  bool header_seen = false, out_seen = false, aux_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::vector<std::string> toks = split_ws(line);
    if (toks.empty()) continue;
    if (!header_seen) {
      if (toks.size() != 4 || toks[0] != "pl-circuit" || toks[1] != "v1")
        throw ParseError("expected 'pl-circuit v1 n_inputs=<n> n_aux=<l>' header", line_no);
      c.n_inputs = parse_count(toks[2], "n_inputs", line_no);
      c.n_aux = parse_count(toks[3], "n_aux", line_no);
      header_seen = true;
      continue;
    }
    if (toks[0] == "out") {
      if (out_seen) throw ParseError("duplicate out line", line_no);
      for (std::size_t i = 1; i < toks.size(); ++i)
        c.primary_outputs.push_back(parse_ref(toks[i], c.gates.size(), line_no));
      out_seen = true;
      continue;
    }
    if (toks[0] == "aux") {
      if (aux_seen) throw ParseError("duplicate aux line", line_no);
      for (std::size_t i = 1; i < toks.size(); ++i)
        c.aux_outputs.push_back(parse_ref(toks[i], c.gates.size(), line_no));
      aux_seen = true;
      continue;
    }
    // gate line: g<i> = <op> <args>
    if (toks.size() < 3 || toks[1] != "=")
      throw ParseError("expected 'g<i> = <op> <args>'", line_no);
    GateRef idx = parse_ref(toks[0], c.gates.size() + 1, line_no);
    if (idx != c.gates.size()) throw ParseError("gates must be numbered consecutively", line_no);
    const std::string& op = toks[2];
    Gate g{};
    auto need = [&](std::size_t n) {
      if (toks.size() != 3 + n) throw ParseError("wrong argument count for '" + op + "'", line_no);
    };
    if (op == "input" || op == "aux") {
      need(1);
      g.kind = op == "input" ? GateKind::Input : GateKind::Aux;
      char* end = nullptr;
      g.index = std::strtoul(toks[3].c_str(), &end, 10);
      if (*end != '\0') throw ParseError("bad index '" + toks[3] + "'", line_no);
    } else if (op == "const") {
      need(1);
      g.kind = GateKind::Const;
      g.value = parse_rational(toks[3]);
    } else if (op == "scale") {
      need(2);
      g.kind = GateKind::Scale;
      g.value = parse_rational(toks[3]);
      g.a = parse_ref(toks[4], c.gates.size(), line_no);
    } else if (op == "add" || op == "sub" || op == "max" || op == "min") {
      need(2);
      g.kind = op == "add"   ? GateKind::Add
               : op == "sub" ? GateKind::Sub
               : op == "max" ? GateKind::Max
                             : GateKind::Min;
      g.a = parse_ref(toks[3], c.gates.size(), line_no);
      g.b = parse_ref(toks[4], c.gates.size(), line_no);
    } else {
      throw ParseError("unknown gate op '" + op + "'", line_no);
    }
    c.gates.push_back(std::move(g));
  }
  if (!header_seen) throw ParseError("missing pl-circuit header");
  if (!out_seen || !aux_seen) throw ParseError("missing out/aux trailer lines");
  c.check_well_formed();
  return c;
}

Circuit read_circuit_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return circuit_from_text(ss.str());
}

}  // namespace plopt
