#include "cutplane/linalg.hpp"

#include <cmath>
#include <string>

#include "cutplane/errors.hpp"

namespace cutplane {

void require_finite(const Mat& A, const char* what) {
  if (!A.allFinite()) throw ArgumentError(std::string(what) + ": non-finite entry");
}

void require_positive(const Vec& w, const char* what) {
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (!(w[i] > 0.0) || !std::isfinite(w[i]))
      throw ArgumentError(std::string(what) + ": weight " + std::to_string(i) + " is not positive");
  }
}

namespace {

void check_weights(const Mat& A, const Vec& w, bool allow_zero) {
  if (A.rows() != w.size()) throw ArgumentError("row count and weight length differ");
  require_finite(A, "constraint matrix");
  if (allow_zero) {
    for (Eigen::Index i = 0; i < w.size(); ++i)
      if (!(w[i] >= 0.0) || !std::isfinite(w[i])) throw ArgumentError("negative weight");
  } else {
    require_positive(w, "weights");
  }
}

}  // namespace

GramFactor::GramFactor(const Mat& A, const Vec& w) {
  if (A.rows() != w.size()) throw ArgumentError("row count and weight length differ");
  M_ = A.transpose() * w.asDiagonal() * A;
  factor();
}

GramFactor::GramFactor(const Mat& M) : M_(M) { factor(); }

void GramFactor::factor() {
  if (M_.rows() != M_.cols()) throw ArgumentError("Gram matrix must be square");
  require_finite(M_, "Gram matrix");
  llt_.compute(M_);
  if (llt_.info() != Eigen::Success) throw RankDeficientError("A^T W A is not positive definite");
  const auto& L = llt_.matrixLLT();
  double lo = L(0, 0), hi = L(0, 0);
  for (Eigen::Index i = 0; i < L.rows(); ++i) {
    lo = std::min(lo, L(i, i));
    hi = std::max(hi, L(i, i));
  }
  if (!(lo > 0.0) || lo < 1e-13 * hi) throw RankDeficientError("A^T W A is numerically singular");
}

Mat GramFactor::inverse() const {
  Mat inv = llt_.solve(Mat::Identity(M_.rows(), M_.cols()));
  return 0.5 * (inv + inv.transpose());
}

double GramFactor::log_det() const {
  const auto& L = llt_.matrixLLT();
  double s = 0.0;
  for (Eigen::Index i = 0; i < L.rows(); ++i) s += std::log(L(i, i));
  return 2.0 * s;
}

Mat GramFactor::half_solve(const Mat& B) const { return llt_.matrixL().solve(B); }

GramFactor gram(const Mat& A, const Vec& w) {
  check_weights(A, w, false);
  if (A.rows() < A.cols()) throw RankDeficientError("fewer rows than columns");
  return GramFactor(A, w);
}

Vec unnormalized_leverage_exact(const Mat& A, const Vec& w, bool allow_zero) {
  check_weights(A, w, allow_zero);
  GramFactor g(A, w);
  Mat B = g.half_solve(A.transpose());
  return B.colwise().squaredNorm().transpose();
}

Vec leverage_scores_exact(const Mat& A, const Vec& w, bool allow_zero) {
  return w.cwiseProduct(unnormalized_leverage_exact(A, w, allow_zero));
}

Mat projection_matrix(const Mat& A, const Vec& w) {
  check_weights(A, w, false);
  GramFactor g(A, w);
  Mat B = g.half_solve((w.cwiseSqrt().asDiagonal() * A).transpose());
  return B.transpose() * B;
}

Vec row_quadratic(const Mat& A, const Mat& K) { return (A * K).cwiseProduct(A).rowwise().sum(); }

Vec row_bilinear(const Mat& A, const Mat& K, const Mat& B) {
  return (A * K).cwiseProduct(B).rowwise().sum();
}

Mat woodbury_update(const Mat& Minv, const Mat& U, const Mat& C, const Mat& V) {
  const Eigen::Index n = Minv.rows();
  if (Minv.cols() != n || U.rows() != n || V.cols() != n || C.rows() != U.cols() ||
      C.cols() != V.rows())
    throw ArgumentError("woodbury_update: dimension mismatch");
  if (U.cols() == 0) return Minv;
  Eigen::FullPivLU<Mat> clu(C);
  if (!clu.isInvertible()) throw SingularSystemError("woodbury_update: C is singular");
  Mat inner = clu.inverse() + V * Minv * U;
  Eigen::FullPivLU<Mat> lu(inner);
  if (!lu.isInvertible()) throw SingularSystemError("woodbury_update: inner system is singular");
  const double rc = lu.rcond();
  if (!(rc > 1e-13)) throw SingularSystemError("woodbury_update: inner system is ill-conditioned");
  return Minv - Minv * U * lu.solve(V * Minv);
}

Mat preconditioned_inverse_apply(const Mat& Minv, const Mat& Atarget, double kappa, int t,
                                 const Mat& V) {
  if (t < 0) throw ArgumentError("preconditioned_inverse_apply: t must be non-negative");
  if (!(kappa >= 1.0)) throw ArgumentError("preconditioned_inverse_apply: kappa must be >= 1");
  const Eigen::Index n = Minv.rows();
  if (Minv.cols() != n || Atarget.rows() != n || Atarget.cols() != n || V.rows() != n)
    throw ArgumentError("preconditioned_inverse_apply: dimension mismatch");
  // Horner form: S_0 = V, S_{j+1} = V + (I - A M^{-1} / kappa) S_j.
  Mat S = V;
  for (int j = 0; j < t; ++j) S = V + S - (Atarget * (Minv * S)) / kappa;
  return (Minv * S) / kappa;
}

int precondition_terms(double kappa, double rel) {
  if (!(kappa >= 1.0)) throw ArgumentError("precondition_terms: kappa must be >= 1");
  if (!(rel > 0.0)) throw ArgumentError("precondition_terms: tolerance must be positive");
  const double q = 1.0 - 1.0 / kappa;
  if (q <= 0.0) return 0;
  const double target = rel / (1.0 + rel);
  double rho = kappa * q;
  int t = 0;
  while (rho > target) {
    rho *= q;
    ++t;
    if (t > 100000) throw ArgumentError("precondition_terms: kappa too large");
  }
  return t;
}

}  // namespace cutplane
