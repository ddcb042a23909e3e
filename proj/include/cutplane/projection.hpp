#pragma once

#include "cutplane/linalg.hpp"

namespace cutplane {

struct ProjectionOptions {
  // Refactor instead of a Woodbury update once |S| exceeds this fraction of n.
  double refactor_fraction = 0.25;
  // Refactor after this many consecutive Woodbury updates.
  int refactor_every = 64;
};

// Keeps v with (1 - eps) v <= w <= (1 + eps) v and the inverse (A^T V A)^{-1}.
// Q(v) = A (A^T V A)^{-1} A^T is never stored; the accessors below evaluate the
// pieces the estimators need in O(m n^2).
class ProjectionState {
 public:
  ProjectionState() = default;
  ProjectionState(const Mat& A, const Vec& w, double eps, ProjectionOptions opt = {});

  void update(const Vec& w_new);
  void insert(const Vec& a, double w_a);
  void remove(int i);

  const Mat& A() const { return A_; }
  const Vec& w() const { return w_; }
  const Vec& v() const { return v_; }
  const Mat& Minv() const { return Minv_; }
  double eps() const { return eps_; }
  int rows() const { return static_cast<int>(A_.rows()); }
  int cols() const { return static_cast<int>(A_.cols()); }

  // diag Q(v) = tau(v).
  Vec tau() const;
  Mat q_matrix() const;
  // Q^{(2)} d where Q^{(2)} is Q(v) squared entry-wise.
  Vec q2_apply(const Vec& d) const;
  Mat gram_v() const;

  int last_drift_count() const { return last_drift_; }
  long woodbury_count() const { return woodbury_count_; }
  long refactor_count() const { return refactor_count_; }

 private:
  void refactor();

  Mat A_;
  Vec w_, v_;
  double eps_ = 0.0;
  ProjectionOptions opt_;
  Mat Minv_;
  int last_drift_ = 0;
  int since_refactor_ = 0;
  long woodbury_count_ = 0;
  long refactor_count_ = 0;
};

}  // namespace cutplane
