#include "cutplane/estimators.hpp"

#include <cmath>

#include "cutplane/errors.hpp"
#include "cutplane/sketch.hpp"

namespace cutplane {

void replay_structure(ProjectionState& pm, const ActionSequence& acts) {
  for (const auto& act : acts) {
    if (const auto* ins = std::get_if<InsertRow>(&act))
      pm.insert(ins->a, ins->weight);
    else if (const auto* del = std::get_if<DeleteRow>(&act))
      pm.remove(del->index);
  }
}

namespace {

Vec carried(const Vec& sigma, const BatchResult& res) {
  Vec out = Vec::Zero(static_cast<Eigen::Index>(res.survivors.size()));
  for (std::size_t j = 0; j < res.survivors.size(); ++j)
    if (res.survivors[j] < res.initial_rows) out[j] = sigma[res.survivors[j]];
  return out;
}

}  // namespace

SimpleEstimator::SimpleEstimator(const Mat& A, const Vec& w, SimpleOptions opt)
    : A_(A), w_(w), opt_(opt), pm_(A, w, opt.eps, opt.projection) {
  sigma_ = leverage_scores_exact(A, w);
}

Vec SimpleEstimator::update(const ActionSequence& acts) {
  if (acts.empty()) return Vec::Zero(sigma_.size());
  const BatchResult res = batched_update(A_, w_, acts, opt_.batch);
  replay_structure(pm_, acts);
  pm_.update(res.v);
  const Vec& w_mid = res.v;
  const Vec& w_new = res.w;
  const Vec d_new = (w_new - w_mid).cwiseProduct(pm_.tau()) +
                    w_new.cwiseProduct(pm_.q2_apply(w_mid - w_new));
  const Vec before = carried(sigma_, res);
  sigma_ = res.advance(sigma_) + d_new;
  A_ = res.A;
  w_ = w_new;
  return sigma_ - before;
}

void SimpleEstimator::refine(const Vec& sigma_new) {
  if (sigma_new.size() != sigma_.size()) throw ArgumentError("refine: length mismatch");
  sigma_ = sigma_new;
}

ComplicatedEstimator::ComplicatedEstimator(const Mat& A, const Vec& w, ComplicatedOptions opt)
    : A_(A), w_(w), opt_(opt), pm_(A, w, opt.eps, opt.projection) {
  if (opt.r < 1) throw ArgumentError("sketch dimension must be at least 1");
  if (opt.N < 1) throw ArgumentError("quadrature size must be at least 1");
  rule_ = gauss_rule(opt.N);
  sigma_ = leverage_scores_exact(A, w);
}

Vec ComplicatedEstimator::update(const ActionSequence& acts) {
  if (acts.empty()) return Vec::Zero(sigma_.size());
  const BatchResult res = batched_update(A_, w_, acts, opt_.batch);
  replay_structure(pm_, acts);
  const Vec d_new = path_delta(res.v, res.w);
  const Vec before = carried(sigma_, res);
  sigma_ = res.advance(sigma_) + d_new;
  A_ = res.A;
  w_ = res.w;
  ++updates_;
  return sigma_ - before;
}

void ComplicatedEstimator::refine(const Vec& sigma_new) {
  if (sigma_new.size() != sigma_.size()) throw ArgumentError("refine: length mismatch");
  sigma_ = sigma_new;
}

namespace {

enum : std::uint64_t { kTagEta = 1, kTagAlphaBeta = 2, kTagGamma = 3 };

// (A^T Y A)^{-1} from the inverse at weights z with (1 - eps) z <= y <= (1 + eps) z.
Mat inverse_near(const Mat& Minv_z, double eps, const Mat& A, const Vec& y, double rel) {
  const Mat target = A.transpose() * y.asDiagonal() * A;
  const double kappa = (1.0 + eps) / (1.0 - eps);
  const int t = precondition_terms(kappa, rel);
  Mat out = preconditioned_inverse_apply(Minv_z / (1.0 - eps), target, kappa, t,
                                         Mat::Identity(A.cols(), A.cols()));
  return 0.5 * (out + out.transpose());
}

Vec positive_part(const Vec& v) { return v.cwiseMax(0.0); }
Vec negative_part(const Vec& v) { return (-v).cwiseMax(0.0); }

}  // namespace

Vec ComplicatedEstimator::path_delta(const Vec& w_mid, const Vec& w_new) {
  const Mat& A = pm_.A();
  const int m = static_cast<int>(A.rows());
  const double eps = pm_.eps();
  const double rel = opt_.solve_rel;
  const std::uint64_t ctr = updates_;

  // Sketched rows diag(sqrt(v)) A, or the unsketched rows in exact mode.
  auto left = [&](std::uint64_t seed, const Vec& v) -> Mat {
    const Mat rows = v.cwiseSqrt().asDiagonal() * A;
    if (!opt_.sketch) return rows;
    return GaussianSketch(opt_.r, m, seed).matrix() * rows;
  };
  auto col_dot = [](const Mat& X, const Mat& Y) -> Vec {
    return X.cwiseProduct(Y).colwise().sum().transpose();
  };

  pm_.update(w_mid);
  const Vec d = w_mid - w_new;
  const Vec dp = positive_part(d), dm = negative_part(d);
  const bool has_dm = dm.maxCoeff() > 0.0;
  Vec out = (w_new - w_mid).cwiseProduct(pm_.tau());

  // eta: correction from the lag between v_mid and w_mid.
  {
    const Vec z0 = pm_.v();
    const Mat Mz0 = pm_.Minv();
    const Vec e0 = z0 - w_mid;
    const Vec ep = positive_part(e0), em = negative_part(e0);
    if (e0.cwiseAbs().maxCoeff() > 0.0) {
      for (int si = 0; si < rule_.size(); ++si) {
        const double s = rule_.nodes[si];
        const Vec y = z0 + s * (w_mid - z0);
        const Mat AMy = A * inverse_near(Mz0, eps, A, y, rel);
        const std::uint64_t seed = derive_seed(opt_.seed, {ctr, kTagEta, std::uint64_t(si)});
        const Mat Yp = left(seed, ep) * AMy.transpose();
        const Mat Ym = left(seed, em) * AMy.transpose();
        const Vec term = d.cwiseProduct(Yp.colwise().squaredNorm().transpose() -
                                        Ym.colwise().squaredNorm().transpose());
        out -= rule_.weights[si] * term;
      }
    }
  }

  const Mat AtSw = A.transpose() * w_new.cwiseSqrt().asDiagonal();
  const Mat GD = A.transpose() * d.asDiagonal() * A;
  const int N = rule_.size();
  for (int ti = 0; ti < N; ++ti) {
    const double t = rule_.nodes[ti];
    const double wt = rule_.weights[ti];
    const Vec x = w_mid + t * (w_new - w_mid);
    pm_.update(x);
    const Vec z = pm_.v();
    const Mat Mz = pm_.Minv();

    // theta: exact through the entry-wise squared Q(z_t).
    out += wt * w_new.cwiseProduct(pm_.q2_apply(d));

    const Vec e = z - x;
    if (!(e.cwiseAbs().maxCoeff() > 0.0)) continue;
    const Vec ep = positive_part(e), em = negative_part(e);
    const Mat GE = A.transpose() * e.asDiagonal() * A;
    const Mat right_beta = GD * Mz * AtSw;

    std::vector<Mat> K(N);
    for (int si = 0; si < N; ++si) {
      const double s = rule_.nodes[si];
      const Vec y = z + s * (x - z);
      const Mat My = inverse_near(Mz, eps, A, y, rel);
      const std::uint64_t seed = derive_seed(opt_.seed, {ctr, kTagAlphaBeta, std::uint64_t(ti),
                                                         std::uint64_t(si)});
      const Mat Lp = left(seed, ep), Lm = left(seed, em);
      const Mat LpMy = Lp * My, LmMy = Lm * My;
      const Vec ab = col_dot(LpMy * AtSw, LpMy * right_beta) - col_dot(LmMy * AtSw, LmMy * right_beta);
      out += 2.0 * wt * rule_.weights[si] * ab;
      K[si] = My * GE * My * AtSw;
    }

    for (int si = 0; si < N; ++si) {
      for (int sj = 0; sj < N; ++sj) {
        const std::uint64_t seed = derive_seed(
            opt_.seed, {ctr, kTagGamma, std::uint64_t(ti), std::uint64_t(si), std::uint64_t(sj)});
        const Mat Dp = left(seed, dp);
        Vec g = col_dot(Dp * K[si], Dp * K[sj]);
        if (has_dm) {
          const Mat Dm = left(seed, dm);
          g -= col_dot(Dm * K[si], Dm * K[sj]);
        }
        out += wt * rule_.weights[si] * rule_.weights[sj] * g;
      }
    }
  }
  pm_.update(w_new);
  return out;
}

}  // namespace cutplane
