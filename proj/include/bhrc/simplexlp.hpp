#pragma once

// Dense two-phase tableau simplex for the tiny hull-inscription programs
// (k+1 variables, at most k equality rows). Bland's rule on both the entering
// and leaving choice, so cycling cannot occur.

#include "common.hpp"

#include <limits>

namespace bhrc {

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  Vec x;
  double obj = 0.0;
};

// min c'x subject to A x = b, x >= 0.
inline LpResult solve_lp(Mat A, Vec b, const Vec& c, double tol = 1e-9) {
  const int m = int(A.rows());
  const int n = int(A.cols());
  check_config(b.size() == m && c.size() == n, "BadDimension", "LP shape mismatch");

  for (int i = 0; i < m; ++i) {
    if (b[i] < 0.0) {
      A.row(i) = -A.row(i);
      b[i] = -b[i];
    }
  }

  const int total = n + m;  // artificials occupy columns n..total-1
  Mat T = Mat::Zero(m + 1, total + 1);
  T.block(0, 0, m, n) = A;
  T.block(0, n, m, m) = Mat::Identity(m, m);
  T.col(total).head(m) = b;
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = n + i;

  auto pivot = [&](int pr, int pc) {
    T.row(pr) /= T(pr, pc);
    for (int i = 0; i <= m; ++i) {
      if (i != pr && T(i, pc) != 0.0) T.row(i) -= T(i, pc) * T.row(pr);
    }
    basis[pr] = pc;
  };

  // allowed: number of leading columns eligible to enter the basis.
  auto run = [&](int allowed) -> bool {
    const int cap = 200 * (total + 1) * (m + 1) + 1000;
    for (int it = 0; it < cap; ++it) {
      int pc = -1;
      for (int j = 0; j < allowed; ++j) {
        if (T(m, j) < -tol) {
          pc = j;
          break;
        }
      }
      if (pc < 0) return true;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        if (T(i, pc) > tol) best = std::min(best, T(i, total) / T(i, pc));
      }
      if (!std::isfinite(best)) return false;
      int pr = -1;
      for (int i = 0; i < m; ++i) {
        if (T(i, pc) > tol && T(i, total) / T(i, pc) <= best + 1e-12) {
          if (pr < 0 || basis[i] < basis[pr]) pr = i;
        }
      }
      pivot(pr, pc);
    }
    fail_invariant("LpStall", "simplex hit its iteration cap");
  };

  // Phase 1: minimize the artificial sum. Reduced costs start as the negated
  // column sums because every artificial begins basic with cost one.
  for (int j = 0; j <= total; ++j) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += T(i, j);
    T(m, j) = (j >= n && j < total ? 1.0 : 0.0) - s;
  }
  run(total);
  if (-T(m, total) > 1e-7) return {LpStatus::infeasible, Vec(), 0.0};

  // Pivot leftover artificials out where a real column is available; a row
  // with none is redundant and its artificial stays parked at zero.
  for (int i = 0; i < m; ++i) {
    if (basis[i] >= n) {
      for (int j = 0; j < n; ++j) {
        if (std::abs(T(i, j)) > tol) {
          pivot(i, j);
          break;
        }
      }
    }
  }

  T.row(m).setZero();
  for (int j = 0; j < n; ++j) T(m, j) = c[j];
  for (int i = 0; i < m; ++i) {
    if (basis[i] < n && T(m, basis[i]) != 0.0) T.row(m) -= T(m, basis[i]) * T.row(i);
  }
  if (!run(n)) return {LpStatus::unbounded, Vec(), 0.0};

  LpResult out;
  out.status = LpStatus::optimal;
  out.x = Vec::Zero(n);
  for (int i = 0; i < m; ++i) {
    if (basis[i] < n) out.x[basis[i]] = T(i, total);
  }
  out.obj = c.dot(out.x);
  return out;
}

}  // namespace bhrc
