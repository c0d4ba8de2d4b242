#include "plopt/boolcircuit.hpp"

#include <sstream>

#include "plopt/errors.hpp"

namespace plopt {

void BoolCircuit::check_well_formed() const {
  for (std::size_t i = 0; i < gates.size(); ++i) {
    const BoolGate& g = gates[i];
    switch (g.op) {
      case BoolOp::Input:
        if (g.index >= n_inputs) throw ContractError("bool input index out of range");
        break;
      case BoolOp::Const: break;
      case BoolOp::Not:
        if (g.a >= i) throw ContractError("bool gate ref must point backward");
        break;
      default:
        if (g.a >= i || g.b >= i) throw ContractError("bool gate ref must point backward");
    }
  }
  for (std::size_t r : outputs)
    if (r >= gates.size()) throw ContractError("bool output ref out of range");
}

std::vector<bool> eval_bool(const BoolCircuit& c, const std::vector<bool>& inputs) {
  if (inputs.size() != c.n_inputs) throw ContractError("bool eval: input length mismatch");
  std::vector<bool> v(c.gates.size());
  for (std::size_t i = 0; i < c.gates.size(); ++i) {
    const BoolGate& g = c.gates[i];
    switch (g.op) {
      case BoolOp::Input: v[i] = inputs[g.index]; break;
      case BoolOp::Const: v[i] = g.value; break;
      case BoolOp::And: v[i] = v[g.a] && v[g.b]; break;
      case BoolOp::Or: v[i] = v[g.a] || v[g.b]; break;
      case BoolOp::Not: v[i] = !v[g.a]; break;
    }
  }
  std::vector<bool> out(c.outputs.size());
  for (std::size_t j = 0; j < c.outputs.size(); ++j) out[j] = v[c.outputs[j]];
  return out;
}

unsigned long bool_apply(const BoolCircuit& c, unsigned long value) {
  // inputs and outputs are both MSB first: input 0 is bit n-1
  std::vector<bool> in(c.n_inputs);
  for (std::size_t i = 0; i < c.n_inputs; ++i)
    in[i] = (value >> (c.n_inputs - 1 - i)) & 1;
  std::vector<bool> out = eval_bool(c, in);
  // outputs are listed MSB first, matching (b_{n-1}, ..., b_0)
  unsigned long r = 0;
  for (std::size_t j = 0; j < out.size(); ++j)
    if (out[j]) r |= 1ul << (out.size() - 1 - j);
  return r;
}

Circuit bool_to_pl(const BoolCircuit& c) {
  c.check_well_formed();
  CircuitBuilder b;
  std::vector<GateRef> map(c.gates.size());
  std::vector<GateRef> inputs(c.n_inputs);
  for (std::size_t i = 0; i < c.n_inputs; ++i)
    inputs[i] = b.input(Interval(Rational(0), Rational(1)));
  for (std::size_t i = 0; i < c.gates.size(); ++i) {
    const BoolGate& g = c.gates[i];
    switch (g.op) {
      case BoolOp::Input: map[i] = inputs[g.index]; break;
      case BoolOp::Const: map[i] = b.constant(Rational(g.value ? 1 : 0)); break;
      case BoolOp::And: map[i] = b.min(map[g.a], map[g.b]); break;
      case BoolOp::Or: map[i] = b.max(map[g.a], map[g.b]); break;
      case BoolOp::Not: map[i] = b.sub(b.constant(Rational(1)), map[g.a]); break;
    }
  }
  for (std::size_t r : c.outputs) b.mark_primary_output(map[r]);
  return b.finish();
}

BoolCircuit clamp_outputs_to(const BoolCircuit& c, unsigned long N) {
  c.check_well_formed();
  const std::size_t n = c.n_outputs();
  BoolCircuit r = c;
  r.outputs.clear();
  auto push = [&](BoolGate g) {
    r.gates.push_back(g);
    return r.gates.size() - 1;
  };
  auto band = [&](std::size_t a, std::size_t b) { return push({BoolOp::And, a, b}); };
  auto bor = [&](std::size_t a, std::size_t b) { return push({BoolOp::Or, a, b}); };
  auto bnot = [&](std::size_t a) { return push({BoolOp::Not, a}); };
  auto bconst = [&](bool v) {
    BoolGate g{BoolOp::Const};
    g.value = v;
    return push(g);
  };
  // gt = [output word > N], scanning from the most significant bit.
  // c.outputs[j] is bit n-1-j.
  std::size_t gt = bconst(false);
  std::size_t eq = bconst(true);
  std::vector<std::size_t> nbit(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t bitpos = n - 1 - j;
    const bool nb = (N >> bitpos) & 1;
    nbit[j] = bconst(nb);
    const std::size_t cj = c.outputs[j];
    // gt |= eq & c_j & !n_j ; eq &= (c_j == n_j)
    gt = bor(gt, band(eq, band(cj, bnot(nbit[j]))));
    eq = band(eq, bor(band(cj, nbit[j]), band(bnot(cj), bnot(nbit[j]))));
  }
  for (std::size_t j = 0; j < n; ++j) {
    // out_j = gt ? N_j : c_j
    const std::size_t sel = bor(band(gt, nbit[j]), band(bnot(gt), c.outputs[j]));
    r.outputs.push_back(sel);
  }
  return r;
}

namespace {
std::size_t parse_bref(const std::string& tok, std::size_t limit, int line_no) {
  if (tok.size() < 2 || tok[0] != 'g') throw ParseError("expected gate ref '" + tok + "'", line_no);
  char* end = nullptr;
  unsigned long v = std::strtoul(tok.c_str() + 1, &end, 10);
  if (*end != '\0' || v >= limit) throw ParseError("bad gate ref '" + tok + "'", line_no);
  return v;
}
}  // namespace

std::string bool_circuit_to_text(const BoolCircuit& c) {
  std::ostringstream out;
  out << "bool-circuit v1 n_inputs=" << c.n_inputs << "\n";
  for (std::size_t i = 0; i < c.gates.size(); ++i) {
    const BoolGate& g = c.gates[i];
    out << "g" << i << " = ";
    switch (g.op) {
      case BoolOp::Input: out << "input " << g.index; break;
      case BoolOp::Const: out << "const " << (g.value ? 1 : 0); break;
      case BoolOp::And: out << "and g" << g.a << " g" << g.b; break;
      case BoolOp::Or: out << "or g" << g.a << " g" << g.b; break;
      case BoolOp::Not: out << "not g" << g.a; break;
    }
    out << "\n";
  }
  out << "out";
  for (std::size_t r : c.outputs) out << " g" << r;
  out << "\n";
  return out.str();
}

BoolCircuit bool_circuit_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  BoolCircuit c;
  bool header = false, outs = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tok;
    if (!(ss >> tok)) continue;
    if (!header) {
      std::string ver, ntok;
      if (tok != "bool-circuit" || !(ss >> ver >> ntok) || ver != "v1" ||
          ntok.rfind("n_inputs=", 0) != 0)
        throw ParseError("expected 'bool-circuit v1 n_inputs=<n>' header", line_no);
      c.n_inputs = std::stoul(ntok.substr(9));
      header = true;
      continue;
    }
    if (tok == "out") {
      std::string rtok;
      while (ss >> rtok) c.outputs.push_back(parse_bref(rtok, c.gates.size(), line_no));
      outs = true;
      continue;
    }
    std::string eq, op;
    if (!(ss >> eq >> op) || eq != "=") throw ParseError("expected 'g<i> = <op> ...'", line_no);
    if (parse_bref(tok, c.gates.size() + 1, line_no) != c.gates.size())
      throw ParseError("gates must be numbered consecutively", line_no);
    BoolGate g{};
    std::string a, b;
    if (op == "input") {
      g.op = BoolOp::Input;
      if (!(ss >> a)) throw ParseError("missing input index", line_no);
      g.index = std::stoul(a);
    } else if (op == "const") {
      g.op = BoolOp::Const;
      if (!(ss >> a) || (a != "0" && a != "1")) throw ParseError("const needs 0 or 1", line_no);
      g.value = a == "1";
    } else if (op == "not") {
      g.op = BoolOp::Not;
      if (!(ss >> a)) throw ParseError("not needs one ref", line_no);
      g.a = parse_bref(a, c.gates.size(), line_no);
    } else if (op == "and" || op == "or") {
      g.op = op == "and" ? BoolOp::And : BoolOp::Or;
      if (!(ss >> a >> b)) throw ParseError("binary op needs two refs", line_no);
      g.a = parse_bref(a, c.gates.size(), line_no);
      g.b = parse_bref(b, c.gates.size(), line_no);
    } else {
      throw ParseError("unknown bool op '" + op + "'", line_no);
    }
    c.gates.push_back(g);
  }
  if (!header || !outs) throw ParseError("missing header or out line");
  c.check_well_formed();
  return c;
}

}  // namespace plopt
