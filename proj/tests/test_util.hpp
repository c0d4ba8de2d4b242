#pragma once

#include <cstdint>

#include "plopt/rational.hpp"

// xorshift-based deterministic generator for the property corpora
struct TestRng {
  std::uint64_t state;
  explicit TestRng(std::uint64_t seed) : state(seed ? seed : 0x9e3779b97f4a7c15ull) {}
  std::uint64_t next() {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    return state;
  }
  // uniform in [0, n)
  std::uint64_t below(std::uint64_t n) { return next() % n; }
  long range(long lo, long hi) {  // inclusive
    return lo + static_cast<long>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }
  plopt::Rational rational(long span = 4, long max_den = 6) {
    return plopt::rat(range(-span, span), range(1, max_den));
  }
  bool coin() { return next() & 1; }
};
