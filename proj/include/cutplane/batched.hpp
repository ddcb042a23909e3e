#pragma once

#include <vector>

#include "cutplane/actions.hpp"
#include "cutplane/linalg.hpp"

namespace cutplane {

// Inverse of A^T V A for some v with (1 - eps) v <= w <= (1 + eps) v.
// eps = 0 means the inverse is exact for w.
struct ApproxInverse {
  Mat inv;
  double eps = 0.0;
};

// c with ||c - (sigma(w_new) - sigma(w))||_2 <= eps for a monotone change
// w -> w_new touching k rows. Zero weights are allowed as long as both Gram
// matrices stay positive definite.
Vec monotone_lowrank_delta(const Mat& A, const Vec& w, const Vec& w_new, const ApproxInverse& U,
                           const ApproxInverse& U_new, double eps);

struct BatchOptions {
  double tol = 1e-8;
  // Dense updates with |dw_i| < eta * w_i are dropped.
  double eta = 1e-3;
  // 0 selects max(4, ceil(ln^3 n)).
  int phase_length = 0;
  bool check_assumptions = true;
  AssumptionLimits limits;
};

int default_phase_length(int n);

// Row universe: the rows of A^(0) followed by every inserted row in order.
// Vectors named *_universe are indexed over it; rows absent at a time carry
// weight 0.
struct BatchResult {
  Mat A;                        // A^(T)
  Vec v;                        // sparsified weights on the rows of A^(T)
  Vec w;                        // exact w^(T)
  Vec c_universe;               // sigma_{A^(T)}(v) - sigma_{A^(0)}(w^(0)) over the universe
  std::vector<int> survivors;   // universe index of each row of A^(T)
  int initial_rows = 0;
  int steps = 0;                // monotone delta evaluations

  // c restricted to the rows of A^(T).
  Vec c() const;
  // sigma_old over A^(0) rows advanced to the rows of A^(T).
  Vec advance(const Vec& sigma_old) const;
};

BatchResult batched_update(const Mat& A, const Vec& w, const ActionSequence& acts,
                           const BatchOptions& opt = {});

}  // namespace cutplane
