#pragma once

// Reference interpolation / correspondence for implicitly represented
// functions, computed directly from the Boolean circuit: the oracle side of
// the differential tests.

#include <utility>

#include "plopt/boolcircuit.hpp"
#include "plopt/implicit.hpp"
#include "plopt/rational.hpp"

namespace implicit_oracle {

inline unsigned long f_of(const plopt::ImplicitSpec& spec, unsigned long v) {
  unsigned long raw = plopt::bool_apply(spec.C, v);
  return raw > spec.N ? spec.N : raw;
}

inline plopt::Rational rational_floor(const plopt::Rational& x) {
  mpz_class q;
  mpz_fdiv_q(q.get_mpz_t(), x.get_num().get_mpz_t(), x.get_den().get_mpz_t());
  return plopt::Rational(q);
}

// piecewise-linear interpolation: f(0) below 0, f(N) above N, linear between
inline plopt::Rational pl_reference(const plopt::ImplicitSpec& spec, const plopt::Rational& x) {
  using plopt::Rational;
  if (x < 0) return Rational(f_of(spec, 0));
  if (x >= Rational(spec.N)) return Rational(f_of(spec, spec.N));
  Rational fl = rational_floor(x);
  unsigned long k = fl.get_num().get_ui();
  Rational frac = x - fl;
  return (Rational(1) - frac) * Rational(f_of(spec, k)) + frac * Rational(f_of(spec, k + 1));
}

// piecewise-constant correspondence as a closed interval [lo, hi]
inline std::pair<plopt::Rational, plopt::Rational> pc_reference(const plopt::ImplicitSpec& spec,
                                                                const plopt::Rational& x) {
  using plopt::Rational;
  if (x <= 0) {
    Rational v{f_of(spec, 0)};
    return {v, v};
  }
  if (x > Rational(spec.N)) {
    Rational v{f_of(spec, spec.N)};
    return {v, v};
  }
  Rational fl = rational_floor(x);
  if (fl == x) {  // integral point in 1..N
    unsigned long k = fl.get_num().get_ui();
    Rational a{f_of(spec, k - 1)}, b{f_of(spec, k)};
    return a <= b ? std::make_pair(a, b) : std::make_pair(b, a);
  }
  Rational v{f_of(spec, fl.get_num().get_ui())};
  return {v, v};
}

// direct recursion for the triangle wave, used to cross-check signs
inline plopt::Rational triangle_reference(std::size_t n, const plopt::Rational& x,
                                          const plopt::Rational& p) {
  using plopt::Rational;
  Rational cur = x;
  for (std::size_t k = n; k >= 1; --k) {
    Rational periods = Rational(mpz_class(1) << k) + Rational(1, 2);
    Rational reflect = periods * p - cur;
    cur = plopt::rat_min(cur, reflect);
  }
  Rational left = plopt::rat_min(cur, p / 2 - cur);
  Rational right = plopt::rat_min(cur - p, Rational(3) * p / 2 - cur);
  return plopt::rat_max(left, right);
}

}  // namespace implicit_oracle
