#include "plopt/rational.hpp"

#include <cstdlib>

#include "plopt/errors.hpp"

namespace plopt {

Rational parse_rational(const std::string& s) {
  if (s.empty()) throw ParseError("empty rational");
  auto is_int = [](const std::string& t) {
    std::size_t i = (t[0] == '-') ? 1 : 0;
    if (i >= t.size()) return false;
    for (; i < t.size(); ++i)
      if (t[i] < '0' || t[i] > '9') return false;
    return true;
  };
  std::string num = s, den = "1";
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    num = s.substr(0, slash);
    den = s.substr(slash + 1);
  }
  if (!is_int(num) || !is_int(den) || den[0] == '-')
    throw ParseError("bad rational '" + s + "'");
  Rational q{mpz_class(num), mpz_class(den)};
  if (q.get_den() == 0) throw ParseError("zero denominator in '" + s + "'");
  q.canonicalize();
  return q;
}

std::string rational_to_string(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

Rational largest_inverse_power_of_two_below(const Rational& limit) {
  if (limit <= 0) throw ContractError("limit must be positive");
  Rational candidate(1);
  while (candidate >= limit) candidate /= 2;
  return candidate;
}

Rational sqrt_upper_bound(unsigned long n) {
  if (n == 0) return Rational(0);
  mpz_class root;
  mpz_class nn(static_cast<unsigned long>(n));
  mpz_sqrt(root.get_mpz_t(), nn.get_mpz_t());
  if (root * root == nn) return Rational(root);
  // Continued fraction for sqrt(n): convergents alternate below/above.
  // Walk until the denominator budget is reached, keep the last upper one.
  const mpz_class den_cap = 1000000;
  mpz_class a0 = root;
  mpz_class m = 0, d = 1, a = a0;
  mpz_class h_prev = 1, h = a0, k_prev = 0, k = 1;
  Rational best = Rational(root + 1);  // trivially >= sqrt(n)
  bool upper = false;                  // convergent 0 is a lower bound
  while (true) {
    m = d * a - m;
    d = (nn - m * m) / d;
    a = (a0 + m) / d;
    mpz_class h_next = a * h + h_prev, k_next = a * k + k_prev;
    if (k_next > den_cap) break;
    h_prev = h, h = h_next, k_prev = k, k = k_next;
    upper = !upper;
    if (upper) best = Rational(h, k);
  }
  best.canonicalize();
  // A convergent p/q with p/q > sqrt(n) satisfies p^2 > n q^2; check anyway.
  if (best * best < Rational(nn)) best = Rational(root + 1);
  return best;
}

}  // namespace plopt
