#pragma once

#include <cstdint>

#include "cutplane/actions.hpp"
#include "cutplane/batched.hpp"
#include "cutplane/projection.hpp"
#include "cutplane/quadrature.hpp"

namespace cutplane {

struct SimpleOptions {
  double eps = 1e-3;
  BatchOptions batch;
  ProjectionOptions projection;
};

// Deterministic estimator: one first-order correction at the maintained
// weights after the batched low-rank part.
class SimpleEstimator {
 public:
  SimpleEstimator() = default;
  SimpleEstimator(const Mat& A, const Vec& w, SimpleOptions opt = {});

  // Consumes the actions and returns sigma_tilde_new minus the old estimate
  // carried over to the new rows (inserted rows start from zero).
  Vec update(const ActionSequence& acts);
  void refine(const Vec& sigma_new);
  const Vec& query() const { return sigma_; }

  const Mat& A() const { return A_; }
  const Vec& w() const { return w_; }
  const ProjectionState& projection() const { return pm_; }

 private:
  Mat A_;
  Vec w_, sigma_;
  SimpleOptions opt_;
  ProjectionState pm_;
};

struct ComplicatedOptions {
  double eps = 1e-4;
  int r = 8;
  int N = 6;
  std::uint64_t seed = 0;
  // false replaces every sketch by the identity (exact inner products).
  bool sketch = true;
  // Relative accuracy of the preconditioned inverse applications.
  double solve_rel = 1e-12;
  BatchOptions batch;
  ProjectionOptions projection;
};

// Randomized estimator: quadrature along the weight path with sketched
// inner products for every term that involves the lagging weights.
class ComplicatedEstimator {
 public:
  ComplicatedEstimator() = default;
  ComplicatedEstimator(const Mat& A, const Vec& w, ComplicatedOptions opt = {});

  Vec update(const ActionSequence& acts);
  void refine(const Vec& sigma_new);
  const Vec& query() const { return sigma_; }

  const Mat& A() const { return A_; }
  const Vec& w() const { return w_; }
  const ProjectionState& projection() const { return pm_; }
  std::uint64_t update_count() const { return updates_; }

 private:
  Vec path_delta(const Vec& w_mid, const Vec& w_new);

  Mat A_;
  Vec w_, sigma_;
  ComplicatedOptions opt_;
  QuadratureRule rule_;
  ProjectionState pm_;
  std::uint64_t updates_ = 0;
};

// Replays the structural actions into pm (inserts and deletes, in order).
void replay_structure(ProjectionState& pm, const ActionSequence& acts);

}  // namespace cutplane
