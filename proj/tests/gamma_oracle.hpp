#pragma once

// Independent re-solver for the gamma* enumeration family: walks every
// (I0, I1) partition of every nonempty subset of the augmented rows and
// solves the per-coordinate LPs directly. Used to check compute_gamma_star
// from the outside; deliberately not shared with the implementation.

#include <optional>
#include <vector>

#include "plopt/lp.hpp"
#include "plopt/rational.hpp"

namespace gamma_oracle {

inline plopt::RatMat augmented(const plopt::RatMat& A, std::size_t n) {
  plopt::RatMat rows = A;
  for (std::size_t j = 0; j < n; ++j) {
    plopt::RatVec e(n, plopt::Rational(0));
    e[j] = 1;
    rows.push_back(e);
  }
  for (std::size_t j = 0; j < n; ++j) {
    plopt::RatVec e(n, plopt::Rational(0));
    e[j] = -1;
    rows.push_back(e);
  }
  return rows;
}

// optimal value of one (I0, I1, k, s) program, nullopt when infeasible
inline std::optional<plopt::Rational> partition_value(const plopt::RatMat& rows,
                                                      const std::vector<std::size_t>& I0,
                                                      const std::vector<std::size_t>& I1,
                                                      std::size_t n, std::size_t k, int s) {
  using namespace plopt;
  std::vector<std::size_t> I = I0;
  I.insert(I.end(), I1.begin(), I1.end());
  const std::size_t nv = n + I.size();
  LPProblem p;
  p.c.assign(nv, Rational(0));
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t idx : I1) p.c[j] += rows[idx][j];
  p.lo.assign(nv, std::nullopt);
  p.hi.assign(nv, std::nullopt);
  for (std::size_t j = 0; j < n; ++j) {
    p.lo[j] = Rational(-1);
    p.hi[j] = Rational(1);
  }
  p.lo[k] = p.hi[k] = Rational(s);
  for (std::size_t t = 0; t < I.size(); ++t) p.lo[n + t] = Rational(0);
  for (std::size_t idx : I0) {
    RatVec row(nv, Rational(0));
    for (std::size_t j = 0; j < n; ++j) row[j] = rows[idx][j];
    p.eq_A.push_back(std::move(row));
    p.eq_b.emplace_back(0);
  }
  for (std::size_t idx : I1) {
    RatVec row(nv, Rational(0));
    for (std::size_t j = 0; j < n; ++j) row[j] = -rows[idx][j];
    p.A.push_back(std::move(row));
    p.b.emplace_back(0);
  }
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

// smallest optimum over the full family (every partition of every subset)
inline std::optional<plopt::Rational> full_minimum(const plopt::RatMat& A, std::size_t n) {
  using namespace plopt;
  RatMat rows = augmented(A, n);
  const std::size_t M = rows.size();
  std::optional<Rational> best;
  // trit per row: 0 = out, 1 = I0, 2 = I1
  std::vector<int> trit(M, 0);
  while (true) {
    std::vector<std::size_t> I0, I1;
    for (std::size_t i = 0; i < M; ++i) {
      if (trit[i] == 1) I0.push_back(i);
      if (trit[i] == 2) I1.push_back(i);
    }
    if (!I1.empty()) {
      for (std::size_t k = 0; k < n; ++k)
        for (int s : {+1, -1}) {
          std::optional<Rational> v = partition_value(rows, I0, I1, n, k, s);
          if (v && (!best || *v < *best)) best = *v;
        }
    }
    std::size_t pos = 0;
    while (pos < M && trit[pos] == 2) trit[pos++] = 0;
    if (pos == M) break;
    ++trit[pos];
  }
  return best;
}

}  // namespace gamma_oracle
