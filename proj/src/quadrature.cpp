#include "cutplane/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numeric>

#include "cutplane/errors.hpp"
#include "cutplane/linalg.hpp"

namespace cutplane {

QuadratureRule gauss_rule(int N) {
  if (N < 1) throw ArgumentError("gauss_rule: N must be at least 1");
  // Golub-Welsch on the Legendre Jacobi matrix.
  Mat J = Mat::Zero(N, N);
  for (int k = 1; k < N; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    J(k, k - 1) = b;
    J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(J);
  QuadratureRule rule;
  rule.nodes.resize(N);
  rule.weights.resize(N);
  for (int i = 0; i < N; ++i) {
    const double x = es.eigenvalues()[i];
    const double v0 = es.eigenvectors()(0, i);
    rule.nodes[i] = 0.5 * (x + 1.0);
    rule.weights[i] = v0 * v0;
  }
  if (N % 2 == 1) rule.nodes[N / 2] = 0.5;
  const double total = std::accumulate(rule.weights.begin(), rule.weights.end(), 0.0);
  for (double& w : rule.weights) w /= total;
  return rule;
}

double integrate_1d(const std::function<double(double)>& f, const QuadratureRule& rule) {
  double sum = 0.0;
  for (int i = 0; i < rule.size(); ++i) {
    const double fx = f(rule.nodes[i]);
    if (!std::isfinite(fx)) throw EvaluationError("integrand is not finite at a node");
    sum += rule.weights[i] * fx;
  }
  return sum;
}

double integrate_tensor(const std::function<double(const std::vector<double>&)>& f, int d,
                        const QuadratureRule& rule) {
  if (d < 1) throw ArgumentError("integrate_tensor: dimension must be at least 1");
  const int N = rule.size();
  std::vector<int> idx(d, 0);
  std::vector<double> pt(d);
  double sum = 0.0;
  while (true) {
    double wt = 1.0;
    for (int j = 0; j < d; ++j) {
      pt[j] = rule.nodes[idx[j]];
      wt *= rule.weights[idx[j]];
    }
    const double fx = f(pt);
    if (!std::isfinite(fx)) throw EvaluationError("integrand is not finite at a node");
    sum += wt * fx;
    int j = 0;
    while (j < d && ++idx[j] == N) idx[j++] = 0;
    if (j == d) break;
  }
  return sum;
}

}  // namespace cutplane
