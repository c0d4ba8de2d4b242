#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "plopt/circuit.hpp"
#include "plopt/errors.hpp"
#include "test_util.hpp"

using namespace plopt;

namespace {

// random plain circuit over few inputs, used by the property tests
Circuit random_circuit(TestRng& rng, std::size_t n_inputs, std::size_t n_gates) {
  CircuitBuilder b;
  std::vector<GateRef> refs;
  for (std::size_t i = 0; i < n_inputs; ++i)
    refs.push_back(b.input(Interval(rat(-1), rat(1))));
  refs.push_back(b.constant(rng.rational()));
  for (std::size_t g = 0; g < n_gates; ++g) {
    GateRef a = refs[rng.below(refs.size())];
    GateRef c = refs[rng.below(refs.size())];
    switch (rng.below(5)) {
      case 0: refs.push_back(b.add(a, c)); break;
      case 1: refs.push_back(b.sub(a, c)); break;
      case 2: refs.push_back(b.max(a, c)); break;
      case 3: refs.push_back(b.min(a, c)); break;
      default: refs.push_back(b.scale(rng.rational(), a)); break;
    }
  }
  b.mark_primary_output(refs.back());
  b.mark_primary_output(refs[refs.size() / 2]);
  return b.finish();
}

}  // namespace

TEST_CASE("eval: max of two rationals") {
  CircuitBuilder b;
  GateRef x1 = b.input(Interval(rat(0), rat(1)));
  GateRef x2 = b.input(Interval(rat(0), rat(1)));
  b.mark_primary_output(b.max(x1, x2));
  Circuit c = b.finish();
  EvalResult r = eval(c, {rat(1, 2), rat(1, 3)}, {});
  CHECK(r.primary[0] == rat(1, 2));
}

TEST_CASE("eval: heaviside forward pass at x=1, z=0") {
  Circuit h = heaviside();
  EvalResult r = eval(h, {rat(1)}, {rat(0)});
  CHECK(r.primary[0] == rat(0));
  CHECK(r.aux_out[0] == rat(1));
}

TEST_CASE("eval: scale gate") {
  CircuitBuilder b;
  GateRef x = b.input(Interval(rat(0), rat(1)));
  b.mark_primary_output(b.scale(rat(3, 2), x));
  Circuit c = b.finish();
  CHECK(eval(c, {rat(2, 5)}, {}).primary[0] == rat(3, 5));
}

TEST_CASE("eval rejects bad aux") {
  Circuit h = heaviside();
  CHECK_THROWS_AS(eval(h, {rat(1)}, {rat(2)}), ContractError);
  CHECK_THROWS_AS(eval(h, {rat(1)}, {}), ContractError);
  CHECK_THROWS_AS(eval(h, {}, {rat(0)}), ContractError);
}

TEST_CASE("magnitude_bound examples") {
  {
    CircuitBuilder b;
    GateRef x1 = b.input(Interval(rat(-1), rat(1)));
    GateRef x2 = b.input(Interval(rat(-1), rat(1)));
    b.mark_primary_output(b.add(x1, x2));
    CHECK(magnitude_bound(b.finish(), rat(1)) == rat(2));
  }
  {
    CircuitBuilder b;
    b.mark_primary_output(b.constant(rat(5)));
    CHECK(magnitude_bound(b.finish(), rat(7)) == rat(5));
  }
  {
    CircuitBuilder b;
    GateRef x = b.input(Interval(rat(-2), rat(2)));
    b.mark_primary_output(b.scale(rat(-3), x));
    CHECK(magnitude_bound(b.finish(), rat(2)) == rat(6));
  }
}

TEST_CASE("lipschitz_bound examples") {
  {
    CircuitBuilder b;
    GateRef x = b.input(Interval(rat(-1), rat(1)));
    b.mark_primary_output(x);
    CHECK(lipschitz_bound(b.finish()) == rat(1));
  }
  {
    CircuitBuilder b;
    GateRef x1 = b.input(Interval(rat(-1), rat(1)));
    GateRef x2 = b.input(Interval(rat(-1), rat(1)));
    b.mark_primary_output(b.add(x1, x2));
    CHECK(lipschitz_bound(b.finish()) == rat(2));
  }
  {
    // max(2x, -3x): slopes 2 and -3, so L = 3 by direct slope enumeration
    CircuitBuilder b;
    GateRef x = b.input(Interval(rat(-1), rat(1)));
    b.mark_primary_output(b.max(b.scale(rat(2), x), b.scale(rat(-3), x)));
    CHECK(lipschitz_bound(b.finish()) == rat(3));
  }
}

TEST_CASE("heaviside aux fixed points match the three-case correspondence") {
  Circuit h = heaviside();
  auto is_fixed = [&](const Rational& x, const Rational& z) {
    return eval(h, {x}, {z}).aux_out[0] == z;
  };
  // x=1: only z=1
  CHECK(is_fixed(rat(1), rat(1)));
  CHECK_FALSE(is_fixed(rat(1), rat(0)));
  CHECK_FALSE(is_fixed(rat(1), rat(1, 2)));
  // x=-1: only z=0
  CHECK(is_fixed(rat(-1), rat(0)));
  CHECK_FALSE(is_fixed(rat(-1), rat(1)));
  // x=0: every z
  CHECK(is_fixed(rat(0), rat(0)));
  CHECK(is_fixed(rat(0), rat(1, 2)));
  CHECK(is_fixed(rat(0), rat(1)));
  // property over random rationals
  TestRng rng(7);
  for (int t = 0; t < 200; ++t) {
    Rational x = rng.rational();
    Rational z = rat(rng.range(0, 8), 8);
    if (is_fixed(x, z)) {
      const bool in_h = (x > 0 && z == 1) || (x < 0 && z == 0) || x == 0;
      CHECK(in_h);
    }
  }
}

TEST_CASE("evaluation is exact and deterministic") {
  TestRng rng(11);
  for (int t = 0; t < 50; ++t) {
    Circuit c = random_circuit(rng, 1 + rng.below(3), 5 + rng.below(20));
    RatVec in;
    for (std::size_t i = 0; i < c.n_inputs; ++i) in.push_back(rng.rational());
    EvalResult a = eval(c, in, {});
    EvalResult b2 = eval(c, in, {});
    CHECK(a.primary == b2.primary);
  }
}

TEST_CASE("magnitude_bound is sound on random circuits") {
  TestRng rng(13);
  for (int t = 0; t < 1000; ++t) {
    Circuit c = random_circuit(rng, 1 + rng.below(3), 3 + rng.below(27));
    Rational B = rat(rng.range(0, 3), 1);
    Rational K = magnitude_bound(c, B);
    for (int s = 0; s < 100; ++s) {
      RatVec in;
      for (std::size_t i = 0; i < c.n_inputs; ++i)
        in.push_back(B == 0 ? rat(0) : rat(rng.range(-4, 4), 4) * B);
      for (const Rational& q : eval(c, in, {}).primary) REQUIRE(rat_abs(q) <= K);
    }
  }
}

TEST_CASE("lipschitz_bound is sound on random circuits") {
  TestRng rng(17);
  for (int t = 0; t < 300; ++t) {
    Circuit c = random_circuit(rng, 1 + rng.below(3), 3 + rng.below(20));
    Rational L = lipschitz_bound(c);
    RatVec a, d;
    for (std::size_t i = 0; i < c.n_inputs; ++i) {
      a.push_back(rng.rational());
      d.push_back(rng.rational());
    }
    Rational dist(0);
    for (std::size_t i = 0; i < c.n_inputs; ++i) dist = rat_max(dist, rat_abs(a[i] - d[i]));
    EvalResult ra = eval(c, a, {});
    EvalResult rd = eval(c, d, {});
    for (std::size_t j = 0; j < ra.primary.size(); ++j)
      REQUIRE(rat_abs(ra.primary[j] - rd.primary[j]) <= L * dist);
  }
}

TEST_CASE("circuit text round trip is bit exact") {
  TestRng rng(19);
  for (int t = 0; t < 30; ++t) {
    Circuit c = random_circuit(rng, 1 + rng.below(3), 3 + rng.below(15));
    std::string text = circuit_to_text(c);
    Circuit back = circuit_from_text(text);
    CHECK(circuit_to_text(back) == text);
  }
  // pseudo-circuit with aux ports
  std::string text = circuit_to_text(heaviside());
  CHECK(circuit_to_text(circuit_from_text(text)) == text);
}

TEST_CASE("parser reports malformed input") {
  CHECK_THROWS_AS(circuit_from_text("nonsense"), ParseError);
  CHECK_THROWS_AS(circuit_from_text("pl-circuit v1 n_inputs=1 n_aux=0\ng0 = input 0\n"),
                  ParseError);  // missing out/aux lines
  CHECK_THROWS_AS(circuit_from_text("pl-circuit v1 n_inputs=1 n_aux=0\n"
                                    "g0 = input 0\ng1 = add g0 g1\nout g1\naux\n"),
                  ParseError);  // forward ref
  CHECK_THROWS_AS(parse_rational("0.5"), ParseError);
  CHECK_THROWS_AS(parse_rational("1/0"), ParseError);
  CHECK(parse_rational("-3/6") == rat(-1, 2));
}
