#include "cutplane/simplex.hpp"

#include <cmath>
#include <vector>

#include <Eigen/LU>

#include "cutplane/errors.hpp"

namespace cutplane {

namespace {

// Tableau T with rows 0..m-1 constraints and row m the reduced costs; the last
// column is the right-hand side.
struct Tableau {
  Mat T;
  std::vector<int> basis;
  int pivots = 0;

  int rows() const { return static_cast<int>(T.rows()) - 1; }
  int rhs() const { return static_cast<int>(T.cols()) - 1; }

  void pivot(int r, int c) {
    T.row(r) /= T(r, c);
    for (int i = 0; i < T.rows(); ++i)
      if (i != r && T(i, c) != 0.0) T.row(i) -= T(i, c) * T.row(r);
    basis[r] = c;
    ++pivots;
  }

  // Runs Bland's rule over columns [0, ncols). Returns false when unbounded.
  bool run(int ncols, double tol) {
    while (true) {
      int enter = -1;
      for (int j = 0; j < ncols; ++j)
        if (T(rows(), j) < -tol) {
          enter = j;
          break;
        }
      if (enter < 0) return true;
      int leave = -1;
      double best = 0.0;
      for (int i = 0; i < rows(); ++i) {
        if (T(i, enter) <= tol) continue;
        const double ratio = T(i, rhs()) / T(i, enter);
        if (leave < 0 || ratio < best - tol || (std::abs(ratio - best) <= tol && basis[i] < basis[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
  }
};

}  // namespace

LpResult solve_lp(const Mat& A, const Vec& b, const Vec& c, double tol) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  if (b.size() != m || c.size() != n) throw ArgumentError("solve_lp: dimension mismatch");
  require_finite(A, "LP matrix");
  if (!b.allFinite() || !c.allFinite()) throw ArgumentError("solve_lp: non-finite data");
  const double scale = std::max({1.0, A.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()});
  const double ctol = tol * scale;

  // Phase one: artificials on every row after flipping rows to b >= 0.
  Tableau tab;
  tab.T = Mat::Zero(m + 1, n + m + 1);
  tab.basis.resize(m);
  for (int i = 0; i < m; ++i) {
    const double sgn = b[i] < 0.0 ? -1.0 : 1.0;
    tab.T.block(i, 0, 1, n) = sgn * A.row(i);
    tab.T(i, n + i) = 1.0;
    tab.T(i, n + m) = sgn * b[i];
    tab.basis[i] = n + i;
  }
  for (int i = 0; i < m; ++i) tab.T.row(m) -= tab.T.row(i);
  for (int i = 0; i < m; ++i) tab.T(m, n + i) = 0.0;
  tab.run(n + m, ctol);

  LpResult res;
  if (-tab.T(m, n + m) > std::sqrt(tol) * scale * std::max(1, m)) {
    res.status = LpStatus::Infeasible;
    res.pivots = tab.pivots;
    return res;
  }

  // Drive artificials out of the basis; rows where that is impossible are redundant.
  std::vector<int> keep;
  for (int i = 0; i < m; ++i) {
    if (tab.basis[i] >= n) {
      int col = -1;
      for (int j = 0; j < n; ++j)
        if (std::abs(tab.T(i, j)) > ctol) {
          col = j;
          break;
        }
      if (col < 0) continue;
      tab.pivot(i, col);
    }
    keep.push_back(i);
  }

  // Phase two on the original columns.
  Tableau two;
  const int r = static_cast<int>(keep.size());
  two.T = Mat::Zero(r + 1, n + 1);
  two.basis.resize(r);
  for (int k = 0; k < r; ++k) {
    two.T.block(k, 0, 1, n) = tab.T.block(keep[k], 0, 1, n);
    two.T(k, n) = tab.T(keep[k], n + m);
    two.basis[k] = tab.basis[keep[k]];
  }
  two.T.block(r, 0, 1, n) = c.transpose();
  for (int k = 0; k < r; ++k) two.T.row(r) -= c[two.basis[k]] * two.T.row(k);
  two.pivots = tab.pivots;
  const bool bounded = two.run(n, tol * std::max(1.0, c.cwiseAbs().maxCoeff()));
  res.pivots = two.pivots;
  if (!bounded) {
    res.status = LpStatus::Unbounded;
    return res;
  }
  res.status = LpStatus::Optimal;
  res.x = Vec::Zero(n);
  for (int k = 0; k < r; ++k) res.x[two.basis[k]] = std::max(0.0, two.T(k, n));
  // The tableau accumulates rounding over many pivots; a fresh solve with the
  // final basis against the original data is usually far more accurate.
  Mat Bm(r, r);
  Vec bk(r);
  for (int k = 0; k < r; ++k) {
    bk[k] = b[keep[k]];
    for (int l = 0; l < r; ++l) Bm(k, l) = A(keep[k], two.basis[l]);
  }
  const Eigen::FullPivLU<Mat> lu(Bm);
  if (lu.isInvertible()) {
    const Vec xb = lu.solve(bk);
    Vec fresh = Vec::Zero(n);
    for (int k = 0; k < r; ++k) fresh[two.basis[k]] = std::max(0.0, xb[k]);
    if (xb.allFinite() && (A * fresh - b).norm() < (A * res.x - b).norm()) res.x = fresh;
  }
  res.value = c.dot(res.x);
  return res;
}

}  // namespace cutplane
