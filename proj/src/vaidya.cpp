#include "cutplane/vaidya.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "cutplane/errors.hpp"

namespace cutplane {

BallOracle::BallOracle(Vec center, double radius) : c_(std::move(center)), r_(radius) {
  if (!(radius > 0.0)) throw ArgumentError("ball radius must be positive");
}

OracleAnswer BallOracle::query(const Vec& x) {
  const Vec d = x - c_;
  const double dist = d.norm();
  if (dist <= r_) return OracleAnswer::in();
  const Vec a = d / dist;
  return OracleAnswer::cut(a, a.dot(c_) + r_);
}

HalfspaceOracle::HalfspaceOracle(Mat G, Vec h) : G_(std::move(G)), h_(std::move(h)) {
  if (G_.rows() != h_.size()) throw ArgumentError("halfspace oracle: size mismatch");
}

OracleAnswer HalfspaceOracle::query(const Vec& x) {
  const Vec viol = G_ * x - h_;
  Eigen::Index i = 0;
  const double worst = viol.maxCoeff(&i);
  if (worst <= 0.0) return OracleAnswer::in();
  return OracleAnswer::cut(G_.row(i).transpose(), h_[i]);
}

OracleAnswer EmptySetOracle::query(const Vec&) {
  Vec a = Vec::Zero(n_);
  a[0] = 1.0;
  return OracleAnswer::cut(a, -2.0);
}

void VaidyaParams::validate() const {
  if (!(c1 > 0.0) || !(delta > 0.0) || !(c2 > 0.0)) throw ArgumentError("c1, delta, c2 must be positive");
  if (0.5 * std::sqrt(delta * c1) >= 1.0) throw ArgumentError("target leverage of new rows must be below 1");
  if (!(damping > 0.0) || damping > 1.0) throw ArgumentError("damping must lie in (0,1]");
  if (max_halvings < 0 || max_newton_steps < 1) throw ArgumentError("bad Newton limits");
  if (!(C_iter > 0.0)) throw ArgumentError("C_iter must be positive");
  if (mode == LeverageMode::Layered) layers.validate();
}

VaidyaParams desk_vaidya_params(int n) {
  VaidyaParams p;
  p.c1 = 4e-4;
  p.delta = 0.9;
  p.c2 = 1e-3;
  p.C_iter = 240.0;
  p.layers = desk_profile(n);
  return p;
}

double volumetric_value(const Mat& A, const Vec& b, const Vec& x) {
  const Vec s = A * x - b;
  if (!(s.minCoeff() > 0.0)) throw DomainError("volumetric value: point is not strictly feasible");
  const Vec w = s.array().square().inverse().matrix();
  return 0.5 * GramFactor(A, w).log_det();
}

bool check_slack_stability(const Vec& s, const Vec& s_new, double bound) {
  if (s.size() != s_new.size()) throw ArgumentError("slack vectors differ in length");
  if (!(s.minCoeff() > 0.0) || !(s_new.minCoeff() > 0.0)) return false;
  return (s_new.array() / s.array()).log().matrix().norm() <= bound;
}

NewtonDirection newton_direction(const Mat& A, const Vec& s, const Vec& sigma) {
  const Vec sig = sigma.cwiseMax(0.0);
  const Vec g = A.transpose() * sig.cwiseQuotient(s);
  const Vec scale = sig.cwiseQuotient(s.cwiseProduct(s));
  Eigen::LLT<Mat> llt(A.transpose() * scale.asDiagonal() * A);
  if (llt.info() != Eigen::Success) throw GeometryError("Newton system is singular");
  NewtonDirection out;
  out.d = llt.solve(g);
  out.gap = 0.5 * g.dot(out.d);
  if (!out.d.allFinite()) throw GeometryError("Newton direction is not finite");
  return out;
}

Vec newton_step(const Mat& A, const Vec& b, const Vec& z, const Vec& sigma, double damping) {
  const Vec s = A * z - b;
  if (!(s.minCoeff() > 0.0)) throw DomainError("Newton step: point is not strictly feasible");
  return z + damping * newton_direction(A, s, sigma).d;
}

PolytopeState::PolytopeState(int n, double R, const VaidyaParams& params) : params_(params) {
  if (n < 1) throw ArgumentError("dimension must be positive");
  if (!(R > 0.0)) throw ArgumentError("outer radius must be positive");
  params_.validate();
  A_.resize(2 * n, n);
  A_.topRows(n) = Mat::Identity(n, n);
  A_.bottomRows(n) = -Mat::Identity(n, n);
  b_ = Vec::Constant(2 * n, -R);
  z_ = Vec::Zero(n);
  const Vec w = Vec::Constant(2 * n, 1.0 / (R * R));
  if (params_.mode == LeverageMode::Layered)
    layered_ = std::make_unique<LayeredMaintainer>(A_, w, params_.layers);
  else
    exact_sigma_ = leverage_scores_exact(A_, w);
}

const Vec& PolytopeState::sigma() const {
  return layered_ ? layered_->query() : exact_sigma_;
}

void PolytopeState::apply(const UpdateAction& act) {
  if (layered_) {
    layered_->update(act);
  } else {
    const Vec s = slacks();
    exact_sigma_ = leverage_scores_exact(A_, s.array().square().inverse().matrix());
  }
}

double PolytopeState::drift() const {
  const Vec s = slacks();
  return (sigma() - leverage_scores_exact(A_, s.array().square().inverse().matrix())).norm();
}

int PolytopeState::recenter() {
  int steps = 0;
  while (steps < params_.max_newton_steps) {
    const Vec s = slacks();
    const NewtonDirection nd = newton_direction(A_, s, sigma());
    if (nd.gap <= params_.c2) break;
    double step = params_.damping;
    bool ok = false;
    Vec zn, sn;
    for (int h = 0; h <= params_.max_halvings; ++h) {
      zn = z_ + step * nd.d;
      sn = A_ * zn - b_;
      if (check_slack_stability(s, sn, params_.max_log_slack_step)) {
        ok = true;
        break;
      }
      step *= 0.5;
    }
    if (!ok) break;
    z_ = zn;
    apply(WeightUpdate{sn.array().square().inverse().matrix()});
    ++steps;
    ++newton_steps_;
  }
  return steps;
}

std::optional<int> PolytopeState::drop_candidate() const {
  const Vec& sig = sigma();
  int best = -1;
  for (int i = box_rows(); i < rows(); ++i)
    if (sig[i] < params_.c1 && (best < 0 || sig[i] < sig[best])) best = i;
  if (best < 0) return std::nullopt;
  return best;
}

void PolytopeState::drop_cut(int i) {
  if (i < box_rows() || i >= rows()) throw ArgumentError("drop: only non-box rows can be dropped");
  if (rows() - 1 < dim() + 1) throw GeometryError("drop: too few constraints would remain");
  if (layered_) layered_->update(DeleteRow{i});
  ids_.erase(ids_.begin() + (i - box_rows()));
  const int tail = rows() - 1 - i;
  A_.middleRows(i, tail) = A_.bottomRows(tail).eval();
  A_.conservativeResize(rows() - 1, Eigen::NoChange);
  b_.segment(i, tail) = b_.tail(tail).eval();
  b_.conservativeResize(b_.size() - 1);
  if (!layered_) apply(DeleteRow{i});
}

double PolytopeState::add_cut(const Vec& a, double b_sep, long id) {
  if (a.size() != dim()) throw ProtocolError("separator has the wrong dimension");
  const double norm = a.norm();
  if (!(norm > 0.0) || !std::isfinite(norm) || !std::isfinite(b_sep))
    throw ProtocolError("separator normal must be finite and nonzero");
  const Vec row = -a / norm;
  const double bound = -b_sep / norm;
  const double at_z = row.dot(z_);
  if (at_z - bound > 1e-12 * (1.0 + std::abs(bound)))
    throw ProtocolError("separator does not cut the query point");

  const Vec s = slacks();
  const GramFactor H(A_, s.array().square().inverse().matrix());
  const double q = row.dot(H.solve(row));
  const double target = 0.5 * std::sqrt(params_.delta * params_.c1);
  auto lev = [&](double slack) {
    const double x = q / (slack * slack);
    return x / (1.0 + x);
  };
  double lo = std::log(std::sqrt(q) * 1e-6), hi = std::log(std::sqrt(q) * 1e6);
  if (!(lev(std::exp(lo)) > target) || !(lev(std::exp(hi)) < target))
    throw GeometryError("add_cut: slack search failed to bracket the target leverage");
  for (int it = 0; it < params_.search_iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (lev(std::exp(mid)) > target)
      lo = mid;
    else
      hi = mid;
  }
  const double b_new = std::min(at_z - std::exp(0.5 * (lo + hi)), bound);
  const double slack = at_z - b_new;

  if (layered_) layered_->update(InsertRow{row, 1.0 / (slack * slack)});
  const int m = rows();
  A_.conservativeResize(m + 1, Eigen::NoChange);
  A_.row(m) = row.transpose();
  b_.conservativeResize(m + 1);
  b_[m] = b_new;
  ids_.push_back(id);
  if (!layered_) apply(InsertRow{row, 1.0 / (slack * slack)});
  return slack;
}

long iteration_budget(const VaidyaParams& p, int n, double R, double eps) {
  if (p.max_oracle_calls > 0) return p.max_oracle_calls;
  const double v = p.C_iter * n * std::log(std::max(n * R / eps, 2.0));
  return static_cast<long>(std::ceil(v));
}

DriveStats drive(PolytopeState& P, long budget, const CutRule& rule,
                 const std::function<void(const DriveStats&)>& on_step) {
  DriveStats st;
  while (true) {
    P.recenter();
    ++st.iterations;
    if (auto i = P.drop_candidate()) {
      P.drop_cut(*i);
      if (on_step) on_step(st);
      continue;
    }
    if (st.oracle_calls >= budget) break;
    const Vec x = P.z();
    const std::optional<Cut> cut = rule(x);
    ++st.oracle_calls;
    if (!cut) {
      st.stopped = true;
      if (on_step) on_step(st);
      break;
    }
    P.add_cut(cut->a, cut->b, st.oracle_calls - 1);
    if (on_step) on_step(st);
  }
  return st;
}

FeasibilityResult run_feasibility(SeparationOracle& oracle, double R, double eps,
                                  const VaidyaParams& params, const TraceCallback& trace) {
  if (!(R > 0.0) || !(eps > 0.0)) throw ArgumentError("R and eps must be positive");
  const int n = oracle.dim();
  PolytopeState P(n, R, params);
  FeasibilityResult res;
  res.budget = iteration_budget(params, n, R, eps);
  const auto t0 = std::chrono::steady_clock::now();
  Vec found;
  const CutRule rule = [&](const Vec& x) -> std::optional<Cut> {
    const OracleAnswer ans = oracle.query(x);
    if (ans.inside) {
      found = x;
      return std::nullopt;
    }
    return Cut{ans.a, ans.b};
  };
  const DriveStats st = drive(P, res.budget, rule, [&](const DriveStats& s) {
    res.max_constraints = std::max(res.max_constraints, P.rows());
    if (!trace) return;
    TraceRow row;
    row.iteration = s.iterations;
    row.oracle_calls = s.oracle_calls;
    row.F = P.F();
    row.drift = params.audit ? P.drift() : std::numeric_limits<double>::quiet_NaN();
    row.wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    row.constraints = P.rows();
    trace(row);
  });
  res.oracle_calls = st.oracle_calls;
  res.iterations = st.iterations;
  if (st.stopped)
    res.outcome = FoundPoint{found};
  else
    res.outcome = NoBall{eps, P.F()};
  res.newton_steps = P.newton_steps();
  return res;
}

}  // namespace cutplane
