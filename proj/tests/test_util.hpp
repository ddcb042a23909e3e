#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "cutplane/actions.hpp"
#include "cutplane/linalg.hpp"

namespace testutil {

using cutplane::Mat;
using cutplane::Vec;

struct Rng {
  std::mt19937_64 gen;
  std::normal_distribution<double> normal;
  explicit Rng(std::uint64_t seed) : gen(seed) {}

  double gauss() { return normal(gen); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); }
  int index(int n) { return static_cast<int>(gen() % static_cast<std::uint64_t>(n)); }
  Mat matrix(int m, int n) {
    Mat A(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = gauss();
    return A;
  }
  Vec vector(int n) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = gauss();
    return v;
  }
  // exp(spread * N(0,1)) entries.
  Vec weights(int n, double spread) {
    Vec w(n);
    for (int i = 0; i < n; ++i) w[i] = std::exp(spread * gauss());
    return w;
  }
};

// Weight step with ||log w_new - log w||_2 = size.
inline Vec log_step(Rng& g, const Vec& w, double size) {
  Vec d = g.vector(static_cast<int>(w.size()));
  d *= size / d.norm();
  return w.cwiseProduct(d.array().exp().matrix());
}

// A random action that meets the default small-update limits: weight steps of
// log size 0.005, inserts at leverage 0.005, deletes of the least important row
// when its leverage is at most 0.008 (otherwise a weight step).
inline cutplane::UpdateAction small_action(Rng& g, const Mat& A, const Vec& w) {
  const int n = static_cast<int>(A.cols());
  switch (g.index(4)) {
    case 0: {
      const Vec a = g.vector(n);
      const double tau = a.dot(cutplane::GramFactor(A, w).solve(a));
      return cutplane::InsertRow{a, 0.005 / tau};
    }
    case 1: {
      const Vec s = cutplane::leverage_scores_exact(A, w);
      Eigen::Index i = 0;
      if (s.minCoeff(&i) <= 0.008 && A.rows() > A.cols() + 1) return cutplane::DeleteRow{static_cast<int>(i)};
      [[fallthrough]];
    }
    default:
      return cutplane::WeightUpdate{log_step(g, w, 0.005)};
  }
}

// m rows where the last m/2 carry weight 1e-3, so some rows are cheap to delete.
inline void mixed_instance(Rng& g, int m, int n, Mat& A, Vec& w) {
  A = g.matrix(m, n);
  w = g.weights(m, 0.3);
  for (int i = m / 2; i < m; ++i) w[i] *= 1e-3;
}

}  // namespace testutil
