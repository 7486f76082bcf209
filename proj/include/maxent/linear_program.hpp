#pragma once

// Dense two-phase tableau simplex with Bland's rule, for the small LPs of the
// Slater construction.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <vector>

#include "maxent/errors.hpp"

namespace maxent {

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  Eigen::VectorXd x;     ///< primal solution of the standard form
  Eigen::VectorXd dual;  ///< y with A^T y <= c, b^T y = c^T x at optimum
  double objective = std::numeric_limits<double>::quiet_NaN();
};

/// min c^T x  s.t.  A x = b, x >= 0.
inline LpResult solve_standard_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                                  double tol = 1e-10, long max_pivots = 100000) {
  using Eigen::Index;
  const Index m = A.rows();
  const Index n = A.cols();
  detail::require(b.size() == m && c.size() == n, "LP dimension mismatch");

  // tableau columns: [x (n) | artificials (m) | rhs]
  const Index cols = n + m + 1;
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m + 1, cols);
  Eigen::VectorXd sign = Eigen::VectorXd::Ones(m);
  for (Index i = 0; i < m; ++i) {
    if (b(i) < 0) sign(i) = -1.0;
    T.block(i, 0, 1, n) = sign(i) * A.row(i);
    T(i, n + i) = 1.0;
    T(i, cols - 1) = sign(i) * b(i);
  }
  std::vector<Index> basis(m);
  for (Index i = 0; i < m; ++i) basis[i] = n + i;

  auto pivot = [&](Index row, Index col) {
    T.row(row) /= T(row, col);
    for (Index r = 0; r <= m; ++r) {
      if (r != row && T(r, col) != 0.0) T.row(r) -= T(r, col) * T.row(row);
    }
    basis[row] = col;
  };

  // objective row holds reduced costs; last entry is -objective
  auto run = [&](Index allowed_cols) -> LpStatus {
    for (long it = 0; it < max_pivots; ++it) {
      Index enter = -1;
      for (Index j = 0; j < allowed_cols; ++j) {
        if (T(m, j) < -tol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return LpStatus::optimal;
      Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Index i = 0; i < m; ++i) {
        if (T(i, enter) > tol) {
          const double ratio = T(i, cols - 1) / T(i, enter);
          if (ratio < best - 1e-14 || (std::abs(ratio - best) <= 1e-14 && leave >= 0 && basis[i] < basis[leave])) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) return LpStatus::unbounded;
      pivot(leave, enter);
    }
    return LpStatus::iteration_limit;
  };

  // phase 1: minimize the sum of artificials
  T.row(m).setZero();
  for (Index i = 0; i < m; ++i) T.row(m) -= T.row(i);
  for (Index i = 0; i < m; ++i) T(m, n + i) = 0.0;
  LpResult out;
  LpStatus st = run(n);
  if (st == LpStatus::iteration_limit) {
    out.status = st;
    return out;
  }
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  if (-T(m, cols - 1) > 1e-9 * scale) {
    out.status = LpStatus::infeasible;
    return out;
  }
  // drive remaining artificials out of the basis where possible
  for (Index i = 0; i < m; ++i) {
    if (basis[i] < n) continue;
    Index col = -1;
    double best = tol;
    for (Index j = 0; j < n; ++j) {
      if (std::abs(T(i, j)) > best) {
        best = std::abs(T(i, j));
        col = j;
      }
    }
    if (col >= 0) pivot(i, col);
  }

  // phase 2
  T.row(m).setZero();
  T.block(m, 0, 1, n) = c.transpose();
  for (Index i = 0; i < m; ++i) {
    const Index bj = basis[i];
    const double cb = bj < n ? c(bj) : 0.0;
    if (cb != 0.0) T.row(m) -= cb * T.row(i);
  }
  st = run(n);
  out.status = st;
  if (st != LpStatus::optimal) return out;

  out.x = Eigen::VectorXd::Zero(n);
  for (Index i = 0; i < m; ++i)
    if (basis[i] < n) out.x(basis[i]) = T(i, cols - 1);
  out.objective = -T(m, cols - 1);
  // reduced cost of artificial i is -y_i (rows scaled by sign)
  out.dual.resize(m);
  for (Index i = 0; i < m; ++i) out.dual(i) = -T(m, n + i) * sign(i);
  return out;
}

}  // namespace maxent
