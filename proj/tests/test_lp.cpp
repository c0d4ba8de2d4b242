#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>
#include "plopt/errors.hpp"
#include "plopt/lp.hpp"
#include "test_util.hpp"

using namespace plopt;

namespace {

LPProblem box_lp(std::size_t n) {
  LPProblem p;
  p.c.assign(n, rat(0));
  p.lo.assign(n, rat(0));
  p.hi.assign(n, rat(1));
  return p;
}

// brute-force oracle: enumerate all basic points (vertices) of
// {A x <= b, eqs, lo <= x <= hi} by picking n tight constraints, and take the
// best feasible one. Independent of the simplex path.
struct Brute {
  LPStatus status = LPStatus::Infeasible;
  Rational value;
};

Brute brute_force(const LPProblem& p) {
  const std::size_t n = p.num_vars();
  // collect all hyperplanes: A rows (as tight), eq rows, bounds
  RatMat planes;
  RatVec rhs;
  for (std::size_t i = 0; i < p.A.size(); ++i) {
    planes.push_back(p.A[i]);
    rhs.push_back(p.b[i]);
  }
  for (std::size_t i = 0; i < p.eq_A.size(); ++i) {
    planes.push_back(p.eq_A[i]);
    rhs.push_back(p.eq_b[i]);
  }
  for (std::size_t j = 0; j < n; ++j) {
    RatVec row(n, rat(0));
    row[j] = 1;
    if (p.lo[j]) {
      planes.push_back(row);
      rhs.push_back(*p.lo[j]);
    }
    if (p.hi[j]) {
      planes.push_back(row);
      rhs.push_back(*p.hi[j]);
    }
  }
  const std::size_t m = planes.size();
  Brute best;
  std::vector<std::size_t> pick(n, 0);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t k, std::size_t from) {
    if (k == n) {
      // solve the square system by gaussian elimination
      RatMat M(n, RatVec(n + 1));
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c2 = 0; c2 < n; ++c2) M[r][c2] = planes[pick[r]][c2];
        M[r][n] = rhs[pick[r]];
      }
      for (std::size_t col = 0, row = 0; col < n && row < n; ++col) {
        std::size_t piv = row;
        while (piv < n && M[piv][col] == 0) ++piv;
        if (piv == n) return;  // singular
        std::swap(M[piv], M[row]);
        for (std::size_t r = 0; r < n; ++r) {
          if (r == row || M[r][col] == 0) continue;
          Rational f = M[r][col] / M[row][col];
          for (std::size_t c2 = col; c2 <= n; ++c2) M[r][c2] -= f * M[row][c2];
        }
        ++row;
      }
      RatVec x(n);
      for (std::size_t r = 0; r < n; ++r) {
        std::size_t col = 0;
        while (col < n && M[r][col] == 0) ++col;
        if (col == n) return;
        x[col] = M[r][n] / M[r][col];
      }
      // feasibility
      for (std::size_t i = 0; i < p.A.size(); ++i) {
        Rational lhs(0);
        for (std::size_t j = 0; j < n; ++j) lhs += p.A[i][j] * x[j];
        if (lhs > p.b[i]) return;
      }
      for (std::size_t i = 0; i < p.eq_A.size(); ++i) {
        Rational lhs(0);
        for (std::size_t j = 0; j < n; ++j) lhs += p.eq_A[i][j] * x[j];
        if (lhs != p.eq_b[i]) return;
      }
      for (std::size_t j = 0; j < n; ++j) {
        if (p.lo[j] && x[j] < *p.lo[j]) return;
        if (p.hi[j] && x[j] > *p.hi[j]) return;
      }
      Rational val(0);
      for (std::size_t j = 0; j < n; ++j) val += p.c[j] * x[j];
      if (p.sense == LPProblem::Sense::Max) {
        if (best.status == LPStatus::Infeasible || val > best.value) best.value = val;
      } else {
        if (best.status == LPStatus::Infeasible || val < best.value) best.value = val;
      }
      best.status = LPStatus::Optimal;
      return;
    }
    for (std::size_t i = from; i < m; ++i) {
      pick[k] = i;
      rec(k + 1, i + 1);
    }
  };
  if (n <= m) rec(0, 0);
  return best;
}

}  // namespace

TEST_CASE("min x subject to x >= 1 on [0,2]") {
  LPProblem p = box_lp(1);
  p.hi[0] = rat(2);
  p.c[0] = rat(1);
  p.A.push_back({rat(-1)});
  p.b.push_back(rat(-1));
  LPResult r = lp_solve_exact(p);
  REQUIRE(r.status == LPStatus::Optimal);
  CHECK(r.x[0] == rat(1));
  CHECK(r.value == rat(1));
}

TEST_CASE("degenerate face resolves to the same vertex every run") {
  LPProblem p = box_lp(2);
  p.c = {rat(0), rat(0)};
  p.A.push_back({rat(1), rat(1)});
  p.b.push_back(rat(1));
  LPResult first = lp_solve_exact(p);
  for (int t = 0; t < 5; ++t) {
    LPResult again = lp_solve_exact(p);
    CHECK(again.x == first.x);
  }
}

TEST_CASE("infeasible and unbounded are reported distinctly") {
  {
    LPProblem p = box_lp(1);
    p.A.push_back({rat(1)});
    p.b.push_back(rat(-1));  // x <= -1 vs x >= 0
    CHECK(lp_solve_exact(p).status == LPStatus::Infeasible);
  }
  {
    LPProblem p;
    p.c = {rat(-1)};
    p.lo = {rat(0)};
    p.hi = {std::nullopt};
    CHECK(lp_solve_exact(p).status == LPStatus::Unbounded);
  }
}

TEST_CASE("equalities and free variables") {
  // min x + y s.t. x - y = 3, x in [0,10], y free
  LPProblem p;
  p.c = {rat(1), rat(1)};
  p.lo = {rat(0), std::nullopt};
  p.hi = {rat(10), std::nullopt};
  p.eq_A.push_back({rat(1), rat(-1)});
  p.eq_b.push_back(rat(3));
  LPResult r = lp_solve_exact(p);
  REQUIRE(r.status == LPStatus::Optimal);
  CHECK(r.x[0] - r.x[1] == rat(3));
  CHECK(r.value == rat(-3));  // x=0, y=-3
}

TEST_CASE("simplex agrees with brute-force vertex enumeration") {
  TestRng rng(23);
  int solved = 0;
  for (int t = 0; t < 250; ++t) {
    const std::size_t n = 1 + rng.below(4);
    const std::size_t m = 1 + rng.below(6);
    LPProblem p = box_lp(n);
    for (std::size_t j = 0; j < n; ++j) {
      p.lo[j] = rat(rng.range(-2, 0));
      p.hi[j] = rat(rng.range(1, 3));
      p.c[j] = rng.rational(3, 3);
    }
    for (std::size_t i = 0; i < m; ++i) {
      RatVec row;
      for (std::size_t j = 0; j < n; ++j) row.push_back(rat(rng.range(-2, 2)));
      p.A.push_back(row);
      p.b.push_back(rng.rational(3, 2));
    }
    if (rng.coin()) p.sense = LPProblem::Sense::Max;
    Brute expect = brute_force(p);
    LPResult got = lp_solve_exact(p);
    REQUIRE(got.status == expect.status);
    if (got.status == LPStatus::Optimal) {
      REQUIRE(got.value == expect.value);
      ++solved;
    }
  }
  CHECK(solved > 50);
}
