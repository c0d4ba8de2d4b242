// Batch front end: compile instances, solve for exact fixed points, verify
// solutions, expand gate specs, evaluate circuits, run the bundled selftest.
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "plopt/apps.hpp"
#include "plopt/boolcircuit.hpp"
#include "plopt/errors.hpp"
#include "plopt/gates.hpp"
#include "plopt/implicit.hpp"
#include "plopt/parallel.hpp"
#include "plopt/solver.hpp"

using namespace plopt;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitCap = 3;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << data;
}

bool has_suffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

RatVec parse_rat_list(const std::string& csv) {
  RatVec v;
  std::istringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) v.push_back(parse_rational(tok));
  }
  return v;
}

struct CommonOpts {
  std::size_t branch_cap = 4096;
  std::string gamma_mode = "exact";
  std::uint64_t seed = 0;
  unsigned threads = 1;

  GammaOptions gamma() const {
    GammaOptions g;
    if (gamma_mode == "bitbound") g.mode = GammaOptions::Mode::BitBound;
    return g;
  }
  SolveOptions solve() const {
    SolveOptions s;
    s.branch_cap = branch_cap;
    return s;
  }
};

int cmd_compile(const std::string& in_path, const std::string& out_path, const CommonOpts& opts) {
  apps::Instance inst = apps::read_instance_file(in_path);
  apps::CompiledApp app = apps::compile(inst, opts.gamma());
  spit(out_path, circuit_to_text(app.circuit));
  return kExitOk;
}

int cmd_solve(const std::string& in_path, const std::string& out_path, const CommonOpts& opts,
              const Rational& box_lo, const Rational& box_hi) {
  FixedPointSolution sol;
  if (has_suffix(in_path, ".json")) {
    apps::Instance inst = apps::read_instance_file(in_path);
    sol = apps::solve(inst, opts.gamma(), opts.solve()).fp;
  } else {
    Circuit c = circuit_from_text(slurp(in_path));
    Box box = Box::uniform(c.n_inputs, box_lo, box_hi);
    sol = find_fixed_point(c, box, opts.solve());
  }
  spit(out_path, solution_to_text(sol));
  return kExitOk;
}

int cmd_verify(const std::string& in_path, const std::string& sol_path, const CommonOpts& opts) {
  apps::Instance inst = apps::read_instance_file(in_path);
  apps::Solution sol;
  sol.fp = solution_from_text(slurp(sol_path));
  apps::VerifyReport rep = apps::verify_solution(inst, sol);
  if (rep.ok) {
    std::cout << "ok: all equilibrium conditions hold exactly\n";
    return kExitOk;
  }
  for (const std::string& v : rep.violations) std::cout << "violated: " << v << "\n";
  return kExitVerifyFailed;
}

int cmd_expand(const std::string& in_path, const std::string& out_path, const CommonOpts& opts) {
  LinOptGateSpec spec = linopt_spec_from_text(slurp(in_path));
  Circuit c = expand_linopt(spec, opts.gamma());
  spit(out_path, circuit_to_text(c));
  return kExitOk;
}

int cmd_eval(const std::string& in_path, const std::string& inputs, const std::string& aux) {
  Circuit c = circuit_from_text(slurp(in_path));
  EvalResult r = eval(c, parse_rat_list(inputs), parse_rat_list(aux));
  std::cout << "primary:";
  for (const Rational& q : r.primary) std::cout << " " << rational_to_string(q);
  std::cout << "\naux:";
  for (const Rational& q : r.aux_out) std::cout << " " << rational_to_string(q);
  std::cout << "\n";
  return kExitOk;
}

// compact property corpus exercised by `selftest`
int cmd_selftest(const CommonOpts& opts) {
  struct Rng {
    std::uint64_t s;
    std::uint64_t next() {
      s ^= s << 13;
      s ^= s >> 7;
      s ^= s << 17;
      return s;
    }
    long range(long lo, long hi) { return lo + static_cast<long>(next() % (hi - lo + 1)); }
  };
  unsigned failures = 0;
  auto report = [&](const std::string& name, bool ok) {
    std::cout << (ok ? "pass" : "FAIL") << "  " << name << "\n";
    if (!ok) ++failures;
  };

  // heaviside pseudo-circuit across sample inputs
  {
    Circuit h = heaviside();
    bool ok = true;
    for (long num = -4; num <= 4; ++num) {
      PseudoOutput out = solve_pseudo_at(h, {rat(num, 2)}, opts.solve());
      Rational y = out.outputs[0];
      if (num > 0) ok = ok && y == 1;
      if (num < 0) ok = ok && y == 0;
      if (num == 0) ok = ok && y >= 0 && y <= 1;
    }
    report("heaviside fixed points realize H(x)", ok);
  }

  // gate vs oracle on random linear programs
  {
    Rng rng{opts.seed ? opts.seed : 0x5eed};
    bool ok = true;
    for (int t = 0; t < 10 && ok; ++t) {
      const std::size_t n = 1 + rng.next() % 2;
      const std::size_t m = 1 + rng.next() % 3;
      LinOptGateSpec spec;
      spec.n = n;
      spec.m = m;
      spec.k = n;
      spec.R = 2;
      spec.C = 3;
      RatVec x0(n), b(m), c(n);
      for (std::size_t j = 0; j < n; ++j) x0[j] = rat(rng.range(-1, 1));
      for (std::size_t i = 0; i < m; ++i) {
        RatVec row(n);
        for (std::size_t j = 0; j < n; ++j) row[j] = rat(rng.range(-2, 2));
        Rational ax(0);
        for (std::size_t j = 0; j < n; ++j) ax += row[j] * x0[j];
        spec.A.push_back(row);
        b[i] = ax + rat(rng.range(0, 2));
      }
      for (std::size_t j = 0; j < n; ++j) c[j] = rat(rng.range(-3, 3));
      {
        CircuitBuilder sg;
        for (std::size_t j = 0; j < n; ++j) sg.input(Interval(-spec.R, spec.R));
        std::vector<GateRef> params;
        for (std::size_t j = 0; j < n; ++j) params.push_back(sg.input(Interval(-spec.C, spec.C)));
        for (GateRef r : params) sg.mark_primary_output(r);
        spec.subgrad = sg.finish();
      }
      Circuit gadget = expand_linopt(spec, opts.gamma());
      RatVec gin = b;
      gin.insert(gin.end(), c.begin(), c.end());
      PseudoOutput out = solve_pseudo_at(gadget, gin, opts.solve());
      ok = ok && verify_gate_optimality(spec, b, c, out.outputs);
    }
    report("linear-OPT-gate matches the exact LP oracle", ok);
  }

  // implicit PL function against direct interpolation on the identity circuit
  {
    BoolCircuit id;
    id.n_inputs = 2;
    for (std::size_t i = 0; i < 2; ++i) {
      BoolGate g{BoolOp::Input};
      g.index = i;  // MSB-first convention on both sides
      id.gates.push_back(g);
      id.outputs.push_back(i);
    }
    ImplicitSpec spec{id, 3};
    Circuit f = implicit_pl_function(spec, opts.gamma());
    bool ok = true;
    for (long num = -2; num <= 8 && ok; ++num) {
      Rational x = rat(num, 2) + rat(1, 8);  // avoid breakpoints
      PseudoOutput out = solve_pseudo_at(f, {x}, opts.solve());
      Rational expect = x < 0 ? rat(0) : (x > 3 ? rat(3) : x);
      ok = out.outputs[0] == expect;
    }
    report("implicit PL function interpolates the identity map", ok);
  }

  // matching pennies end to end, in parallel with deterministic reduce
  {
    apps::BimatrixGame mp;
    mp.m1 = mp.m2 = 2;
    mp.a1 = {{rat(1), rat(-1)}, {rat(-1), rat(1)}};
    mp.a2 = {{rat(-1), rat(1)}, {rat(1), rat(-1)}};
    std::vector<std::string> runs = parallel_map<std::string>(
        4, opts.threads, [&](std::size_t) {
          apps::Solution s = apps::solve(mp, opts.gamma(), opts.solve());
          return solution_to_text(s.fp);
        });
    bool ok = true;
    for (const std::string& r : runs) ok = ok && r == runs[0];
    apps::Solution s;
    s.fp = solution_from_text(runs[0]);
    ok = ok && apps::verify_solution(mp, s).ok;
    ok = ok && s.fp.inputs == RatVec{rat(1, 2), rat(1, 2), rat(1, 2), rat(1, 2)};
    report("matching pennies solves to the uniform equilibrium", ok);
  }

  std::cout << (failures ? "selftest: FAILURES\n" : "selftest: all passed\n");
  return failures ? kExitVerifyFailed : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact piecewise-linear fixed points: compile, solve, verify"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  CommonOpts opts;
  app.add_option("--branch-cap", opts.branch_cap, "max branching gates accepted by the solver");
  app.add_option("--gamma-mode", opts.gamma_mode, "gamma* mode: exact|bitbound")
      ->check(CLI::IsMember({"exact", "bitbound"}));
  app.add_option("--seed", opts.seed, "seed for the selftest corpus");
  app.add_option("--threads", opts.threads, "worker threads for batch commands");

  std::string in_path, out_path = "out.txt", sol_path, inputs_csv, aux_csv;
  Rational box_lo = rat(0), box_hi = rat(1);
  std::string box_lo_s = "0", box_hi_s = "1";

  CLI::App* compile = app.add_subcommand("compile", "instance JSON -> circuit file");
  compile->add_option("--in", in_path)->required();
  compile->add_option("--out", out_path);

  CLI::App* solve = app.add_subcommand("solve", "instance JSON or circuit file -> solution file");
  solve->add_option("--in", in_path)->required();
  solve->add_option("--out", out_path);
  solve->add_option("--box-lo", box_lo_s, "uniform lower bound when solving a raw circuit");
  solve->add_option("--box-hi", box_hi_s, "uniform upper bound when solving a raw circuit");

  CLI::App* verify = app.add_subcommand("verify", "check a solution against its instance");
  verify->add_option("--in", in_path)->required();
  verify->add_option("--sol", sol_path)->required();

  CLI::App* expand = app.add_subcommand("expand", "linopt-spec file -> standard-gate circuit");
  expand->add_option("--in", in_path)->required();
  expand->add_option("--out", out_path);

  CLI::App* evalc = app.add_subcommand("eval", "apply a circuit to a point");
  evalc->add_option("--in", in_path)->required();
  evalc->add_option("--inputs", inputs_csv, "comma-separated rationals");
  evalc->add_option("--aux", aux_csv, "comma-separated rationals");

  CLI::App* selftest = app.add_subcommand("selftest", "run the bundled property corpus");
  (void)selftest;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (compile->parsed()) return cmd_compile(in_path, out_path, opts);
    if (solve->parsed())
      return cmd_solve(in_path, out_path, opts, parse_rational(box_lo_s),
                       parse_rational(box_hi_s));
    if (verify->parsed()) return cmd_verify(in_path, sol_path, opts);
    if (expand->parsed()) return cmd_expand(in_path, out_path, opts);
    if (evalc->parsed()) return cmd_eval(in_path, inputs_csv, aux_csv);
    if (selftest->parsed()) return cmd_selftest(opts);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const CapError& e) {
    std::cerr << "resource cap: " << e.what() << "\n";
    return kExitCap;
  } catch (const ContractError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitVerifyFailed;
  }
  return kExitUsage;
}
