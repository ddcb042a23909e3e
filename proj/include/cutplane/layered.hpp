#pragma once

#include <cstdint>

#include "cutplane/estimators.hpp"

namespace cutplane {

struct LayerParams {
  int T_inn = 8, T_mid = 8, T_out = 8;
  double eps_inn = 1e-2, eps_mid = 1e-3, eps_out = 1e-4;
  int r_out = 8;
  int N = 6;
  std::uint64_t seed = 0;
  double eta = 1e-3;
  int phase_length = 0;
  AssumptionLimits limits;

  void validate() const;
};

// T = 8/8/8, eps = 1e-2/1e-3/1e-4, r_out = max(8, ceil(n^0.31)), N = 6.
LayerParams desk_profile(int n);
// Asymptotic table values; eps_inn is raised to eps_mid when the log power
// would put it below.
LayerParams asymptotic_profile(int n);

enum class Cascade { Inner, Middle, Outer, Restart };

// Inner and middle simple estimators plus an outer randomized estimator, with
// delayed action buffers and periodic restart.
class LayeredMaintainer {
 public:
  LayeredMaintainer() = default;
  LayeredMaintainer(const Mat& A, const Vec& w, const LayerParams& params);

  // Rejects an action that breaks the per-step limits; the state is then unchanged.
  Cascade update(const UpdateAction& act);
  const Vec& query() const { return inner_.query(); }

  const Mat& A() const { return inner_.A(); }
  const Vec& w() const { return inner_.w(); }
  const LayerParams& params() const { return params_; }
  int ctr_inn() const { return ctr_inn_; }
  int ctr_mid() const { return ctr_mid_; }
  int ctr_out() const { return ctr_out_; }
  int restarts() const { return restarts_; }
  const ActionSequence& acts_mid() const { return acts_mid_; }
  const ActionSequence& acts_out() const { return acts_out_; }
  const SimpleEstimator& inner() const { return inner_; }
  const SimpleEstimator& middle() const { return middle_; }
  const ComplicatedEstimator& outer() const { return outer_; }

 private:
  void init(const Mat& A, const Vec& w);

  LayerParams params_;
  int ctr_inn_ = 0, ctr_mid_ = 0, ctr_out_ = 0;
  int restarts_ = 0;
  ActionSequence acts_mid_, acts_out_;
  SimpleEstimator inner_, middle_;
  ComplicatedEstimator outer_;
};

}  // namespace cutplane
