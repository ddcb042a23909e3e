#pragma once

#include "cutplane/linalg.hpp"

namespace cutplane {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Vec x;
  double value = 0.0;
  int pivots = 0;
};

// min c^T x subject to A x = b, x >= 0. Dense two-phase tableau simplex with
// Bland's rule, so it cannot cycle. tol is relative to the data scale.
LpResult solve_lp(const Mat& A, const Vec& b, const Vec& c, double tol = 1e-10);

}  // namespace cutplane
