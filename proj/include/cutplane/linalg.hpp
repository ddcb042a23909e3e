#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace cutplane {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Factored M = A^T W A.
class GramFactor {
 public:
  GramFactor(const Mat& A, const Vec& w);
  explicit GramFactor(const Mat& M);

  const Mat& matrix() const { return M_; }
  int dim() const { return static_cast<int>(M_.rows()); }
  Mat solve(const Mat& B) const { return llt_.solve(B); }
  Vec solve(const Vec& b) const { return llt_.solve(b); }
  Mat inverse() const;
  // log det M from the Cholesky diagonal.
  double log_det() const;
  // L^{-1} B for the lower factor L.
  Mat half_solve(const Mat& B) const;

 private:
  void factor();
  Mat M_;
  Eigen::LLT<Mat> llt_;
};

GramFactor gram(const Mat& A, const Vec& w);

// sigma_i = w_i a_i^T (A^T W A)^{-1} a_i. Weights must be positive unless
// allow_zero is set, in which case zero-weight rows get sigma = 0.
Vec leverage_scores_exact(const Mat& A, const Vec& w, bool allow_zero = false);
// tau_i = a_i^T (A^T W A)^{-1} a_i.
Vec unnormalized_leverage_exact(const Mat& A, const Vec& w, bool allow_zero = false);
// sqrt(W) A (A^T W A)^{-1} A^T sqrt(W).
Mat projection_matrix(const Mat& A, const Vec& w);

// diag(A K A^T), i.e. a_i^T K a_i for every row.
Vec row_quadratic(const Mat& A, const Mat& K);
// diag(A K B^T) row by row.
Vec row_bilinear(const Mat& A, const Mat& K, const Mat& B);

// (M + U C V)^{-1} given Minv = M^{-1}.
Mat woodbury_update(const Mat& Minv, const Mat& U, const Mat& C, const Mat& V);

// f(M,t) V = (1/kappa) M^{-1} sum_{i=0}^{t} (I - (1/kappa) Atarget M^{-1})^i V.
Mat preconditioned_inverse_apply(const Mat& Minv, const Mat& Atarget, double kappa, int t,
                                 const Mat& V);

// Smallest t with kappa (1 - 1/kappa)^{t+1} <= rel / (1 + rel), so that
// Atarget^{-1} <= (1 + rel) f(M,t).
int precondition_terms(double kappa, double rel);

void require_finite(const Mat& A, const char* what);
void require_positive(const Vec& w, const char* what);

}  // namespace cutplane
