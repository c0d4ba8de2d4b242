#pragma once

#include <gmpxx.h>

#include <string>
#include <vector>

namespace plopt {

// Exact arbitrary-precision rational. mpq_class keeps values canonical
// (positive denominator, gcd(num, den) = 1) as long as they are produced
// through its arithmetic operators, which is the only way we produce them.
using Rational = mpq_class;

using RatVec = std::vector<Rational>;
using RatMat = std::vector<std::vector<Rational>>;

inline Rational rat(long num, long den = 1) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

// Parses "num" or "num/den" with den > 0 after canonicalization.
// Rejects anything else (in particular decimal points and exponents).
Rational parse_rational(const std::string& s);

// Canonical text form: "num" when den == 1, otherwise "num/den".
std::string rational_to_string(const Rational& q);

inline Rational rat_abs(const Rational& q) { return q < 0 ? Rational(-q) : q; }

inline Rational rat_max(const Rational& a, const Rational& b) { return a < b ? b : a; }
inline Rational rat_min(const Rational& a, const Rational& b) { return a < b ? a : b; }

// Smallest power 1/2^k strictly below `limit`; requires limit > 0.
Rational largest_inverse_power_of_two_below(const Rational& limit);

// Rational r >= sqrt(n), exact for perfect squares, otherwise a continued
// fraction convergent bumped to an upper bound with denominator <= 10^6.
Rational sqrt_upper_bound(unsigned long n);

}  // namespace plopt
