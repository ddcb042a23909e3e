#include "cutplane/projection.hpp"

#include <cmath>
#include <vector>

#include "cutplane/errors.hpp"

namespace cutplane {

ProjectionState::ProjectionState(const Mat& A, const Vec& w, double eps, ProjectionOptions opt)
    : A_(A), w_(w), v_(w), eps_(eps), opt_(opt) {
  if (!(eps >= 0.0) || eps >= 1.0) throw ArgumentError("projection tolerance must lie in [0,1)");
  if (A.rows() != w.size()) throw ArgumentError("row count and weight length differ");
  require_positive(w, "weights");
  refactor();
}

void ProjectionState::refactor() {
  Minv_ = gram(A_, v_).inverse();
  since_refactor_ = 0;
  ++refactor_count_;
}

void ProjectionState::update(const Vec& w_new) {
  if (w_new.size() != w_.size()) throw ArgumentError("pm_update: length mismatch");
  require_positive(w_new, "weights");
  const double bound = std::log1p(eps_);
  std::vector<int> S;
  for (int i = 0; i < w_new.size(); ++i)
    if (std::abs(std::log(w_new[i] / v_[i])) > bound) S.push_back(i);
  w_ = w_new;
  last_drift_ = static_cast<int>(S.size());
  if (S.empty()) return;

  const int k = static_cast<int>(S.size());
  const Vec v_old = v_;
  for (int i : S) v_[i] = w_[i];
  if (k > opt_.refactor_fraction * cols() || since_refactor_ >= opt_.refactor_every) {
    refactor();
    return;
  }
  Mat AS(k, cols());
  Vec delta(k);
  for (int j = 0; j < k; ++j) {
    AS.row(j) = A_.row(S[j]);
    delta[j] = v_[S[j]] - v_old[S[j]];
  }
  try {
    Minv_ = woodbury_update(Minv_, AS.transpose(), Mat(delta.asDiagonal()), AS);
    Minv_ = 0.5 * (Minv_ + Minv_.transpose());
    ++since_refactor_;
    ++woodbury_count_;
  } catch (const SingularSystemError&) {
    refactor();
  }
}

void ProjectionState::insert(const Vec& a, double w_a) {
  if (a.size() != cols()) throw ArgumentError("pm_insert: row length mismatch");
  if (!(w_a > 0.0)) throw ArgumentError("pm_insert: weight must be positive");
  const int m = rows();
  A_.conservativeResize(m + 1, Eigen::NoChange);
  A_.row(m) = a.transpose();
  w_.conservativeResize(m + 1);
  v_.conservativeResize(m + 1);
  w_[m] = w_a;
  v_[m] = w_a;
  const Vec Ma = Minv_ * a;
  const double denom = 1.0 + w_a * a.dot(Ma);
  Minv_ -= (w_a / denom) * Ma * Ma.transpose();
  ++since_refactor_;
  ++woodbury_count_;
  if (since_refactor_ >= opt_.refactor_every) refactor();
}

void ProjectionState::remove(int i) {
  const int m = rows();
  if (i < 0 || i >= m) throw ArgumentError("pm_delete: index out of range");
  if (m - 1 < cols()) throw GeometryError("pm_delete: too few rows would remain");
  const Vec a = A_.row(i).transpose();
  const double vi = v_[i];
  const int tail = m - 1 - i;
  A_.middleRows(i, tail) = A_.bottomRows(tail).eval();
  A_.conservativeResize(m - 1, Eigen::NoChange);
  w_.segment(i, tail) = w_.tail(tail).eval();
  v_.segment(i, tail) = v_.tail(tail).eval();
  w_.conservativeResize(m - 1);
  v_.conservativeResize(m - 1);
  const Vec Ma = Minv_ * a;
  const double denom = 1.0 - vi * a.dot(Ma);
  if (denom < 1e-8) {
    refactor();
    return;
  }
  Minv_ += (vi / denom) * Ma * Ma.transpose();
  ++since_refactor_;
  ++woodbury_count_;
  if (since_refactor_ >= opt_.refactor_every) refactor();
}

Vec ProjectionState::tau() const { return row_quadratic(A_, Minv_); }

Mat ProjectionState::q_matrix() const { return A_ * Minv_ * A_.transpose(); }

Vec ProjectionState::q2_apply(const Vec& d) const {
  if (d.size() != rows()) throw ArgumentError("q2_apply: length mismatch");
  const Mat K = Minv_ * (A_.transpose() * d.asDiagonal() * A_) * Minv_;
  return row_quadratic(A_, K);
}

Mat ProjectionState::gram_v() const { return A_.transpose() * v_.asDiagonal() * A_; }

}  // namespace cutplane
