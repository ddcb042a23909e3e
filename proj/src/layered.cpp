#include "cutplane/layered.hpp"

#include <algorithm>
#include <cmath>

#include "cutplane/errors.hpp"
#include "cutplane/sketch.hpp"

namespace cutplane {

void LayerParams::validate() const {
  if (T_inn < 1 || T_mid < 1 || T_out < 1) throw ArgumentError("layer step limits must be at least 1");
  if (!(eps_out > 0.0) || eps_out > eps_mid || eps_mid > eps_inn || !(eps_inn < 1.0))
    throw ArgumentError("layer tolerances must satisfy 0 < eps_out <= eps_mid <= eps_inn < 1");
  if (r_out < 1 || N < 1) throw ArgumentError("sketch dimension and quadrature size must be positive");
}

LayerParams desk_profile(int n) {
  LayerParams p;
  p.r_out = std::max(8, static_cast<int>(std::ceil(std::pow(static_cast<double>(n), 0.31))));
  return p;
}

LayerParams asymptotic_profile(int n) {
  const double nn = std::max(n, 3);
  const double l = std::log(nn);
  const double omega = 2.373;
  LayerParams p;
  p.T_inn = static_cast<int>(std::ceil(std::pow(l, 10.0)));
  p.T_mid = static_cast<int>(std::ceil(std::pow(nn, 0.01)));
  p.T_out = static_cast<int>(std::ceil(std::pow(nn, omega - 2.0)));
  p.r_out = static_cast<int>(std::ceil(std::pow(nn, 0.31)));
  p.eps_mid = std::pow(nn, -0.08);
  p.eps_out = std::pow(nn, -0.1);
  p.eps_inn = std::max(std::pow(l, -25.0), p.eps_mid);
  p.N = static_cast<int>(std::ceil(100.0 * l * l));
  p.eta = std::pow(nn, -0.08);
  p.phase_length = static_cast<int>(std::ceil(l * l * l));
  p.limits.max_actions = std::max(p.limits.max_actions, p.T_inn * p.T_mid);
  return p;
}

LayeredMaintainer::LayeredMaintainer(const Mat& A, const Vec& w, const LayerParams& params)
    : params_(params) {
  params_.validate();
  if (params_.T_inn * params_.T_mid > params_.limits.max_actions)
    throw ArgumentError("outer batches would exceed the action cap");
  init(A, w);
}

void LayeredMaintainer::init(const Mat& A, const Vec& w) {
  ctr_inn_ = ctr_mid_ = ctr_out_ = 0;
  acts_mid_.clear();
  acts_out_.clear();
  BatchOptions batch;
  batch.eta = params_.eta;
  batch.phase_length = params_.phase_length;
  batch.check_assumptions = false;
  batch.limits = params_.limits;

  SimpleOptions si;
  si.eps = params_.eps_inn;
  si.batch = batch;
  SimpleOptions sm = si;
  sm.eps = params_.eps_mid;
  ComplicatedOptions co;
  co.eps = params_.eps_out;
  co.r = params_.r_out;
  co.N = params_.N;
  co.seed = derive_seed(params_.seed, {static_cast<std::uint64_t>(restarts_)});
  co.batch = batch;

  inner_ = SimpleEstimator(A, w, si);
  middle_ = SimpleEstimator(A, w, sm);
  outer_ = ComplicatedEstimator(A, w, co);
}

Cascade LayeredMaintainer::update(const UpdateAction& act) {
  check_action(inner_.A(), inner_.w(), act, params_.limits);
  acts_mid_.push_back(act);
  acts_out_.push_back(act);
  inner_.update({act});
  ++ctr_inn_;
  if (ctr_inn_ < params_.T_inn) return Cascade::Inner;

  middle_.update(acts_mid_);
  ++ctr_mid_;
  acts_mid_.clear();
  if (ctr_mid_ < params_.T_mid) {
    ctr_inn_ = 0;
    inner_.refine(middle_.query());
    return Cascade::Middle;
  }

  outer_.update(acts_out_);
  ++ctr_out_;
  acts_out_.clear();
  if (ctr_out_ == params_.T_out) {
    const Mat A = inner_.A();
    const Vec w = inner_.w();
    ++restarts_;
    init(A, w);
    return Cascade::Restart;
  }
  ctr_inn_ = 0;
  ctr_mid_ = 0;
  inner_.refine(outer_.query());
  middle_.refine(outer_.query());
  return Cascade::Outer;
}

}  // namespace cutplane
