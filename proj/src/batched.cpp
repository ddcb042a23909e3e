#include "cutplane/batched.hpp"

#include <algorithm>
#include <cmath>

#include "cutplane/errors.hpp"

namespace cutplane {

namespace {

// Preconditioned refinement of an approximate inverse to relative accuracy rel.
Mat refine_inverse(const ApproxInverse& U, const Mat& A, const Vec& w, double rel) {
  if (U.eps == 0.0) return U.inv;
  const Mat target = A.transpose() * w.asDiagonal() * A;
  const double kappa = (1.0 + U.eps) / (1.0 - U.eps);
  const Mat base = U.inv / (1.0 - U.eps);
  const int t = precondition_terms(kappa, rel);
  Mat out = preconditioned_inverse_apply(base, target, kappa, t, Mat::Identity(A.cols(), A.cols()));
  return 0.5 * (out + out.transpose());
}

Vec exact_delta(const Mat& A, const Vec& w, const Vec& w_new) {
  return leverage_scores_exact(A, w_new, true) - leverage_scores_exact(A, w, true);
}

}  // namespace

Vec monotone_lowrank_delta(const Mat& A, const Vec& w, const Vec& w_new, const ApproxInverse& U,
                           const ApproxInverse& U_new, double eps) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  if (w.size() != m || w_new.size() != m) throw ArgumentError("monotone delta: length mismatch");
  if (U.inv.rows() != n || U_new.inv.rows() != n) throw ArgumentError("monotone delta: inverse size");
  if (!(eps > 0.0)) throw ArgumentError("monotone delta: eps must be positive");
  bool up = false, down = false;
  std::vector<int> S;
  for (int i = 0; i < m; ++i) {
    const double d = w_new[i] - w[i];
    if (d > 0.0) up = true;
    if (d < 0.0) down = true;
    if (d != 0.0) S.push_back(i);
  }
  if (up && down) throw ArgumentError("monotone delta: weights move in both directions");
  if (S.empty()) return Vec::Zero(m);
  if (down) return -monotone_lowrank_delta(A, w_new, w, U_new, U, eps);

  const int k = static_cast<int>(S.size());
  Mat AS(k, n);
  Vec delta(k);
  for (int j = 0; j < k; ++j) {
    AS.row(j) = A.row(S[j]);
    delta[j] = w_new[S[j]] - w[S[j]];
  }
  const Vec tau_hat = row_quadratic(AS, U.inv) / (1.0 - U.eps);
  const double beta = 1.0 + delta.dot(tau_hat);
  const double eps_t = eps / (3.0 * beta * std::sqrt(static_cast<double>(k)));
  const Mat Ue = refine_inverse(U, A, w, eps_t);
  const Mat Ue_new = refine_inverse(U_new, A, w_new, eps_t);

  Vec c = Vec::Zero(m);
  const Vec first = row_quadratic(AS, Ue_new);
  for (int j = 0; j < k; ++j) c[S[j]] += delta[j] * first[j];

  Mat K;
  if (k <= n) {
    Mat inner = AS * Ue * AS.transpose();
    inner.diagonal() += delta.cwiseInverse();
    Eigen::LLT<Mat> llt(inner);
    if (llt.info() != Eigen::Success) return exact_delta(A, w, w_new);
    const Mat B = AS * Ue;
    K = B.transpose() * llt.solve(B);
  } else {
    const Mat G = AS.transpose() * delta.asDiagonal() * AS;
    Eigen::PartialPivLU<Mat> lu(Mat::Identity(n, n) + Ue * G);
    if (!(std::abs(lu.determinant()) > 0.0)) return exact_delta(A, w, w_new);
    K = lu.solve(Ue * G * Ue);
  }
  if (!K.allFinite()) return exact_delta(A, w, w_new);
  c -= w.cwiseProduct(row_quadratic(A, K));
  return c;
}

int default_phase_length(int n) {
  const double l = std::log(std::max(n, 2));
  return std::max(4, static_cast<int>(std::ceil(l * l * l)));
}

Vec BatchResult::c() const {
  Vec out(static_cast<Eigen::Index>(survivors.size()));
  for (std::size_t j = 0; j < survivors.size(); ++j) out[j] = c_universe[survivors[j]];
  return out;
}

Vec BatchResult::advance(const Vec& sigma_old) const {
  if (sigma_old.size() != initial_rows) throw ArgumentError("advance: length mismatch");
  Vec ext = c_universe;
  ext.head(initial_rows) += sigma_old;
  Vec out(static_cast<Eigen::Index>(survivors.size()));
  for (std::size_t j = 0; j < survivors.size(); ++j) out[j] = ext[survivors[j]];
  return out;
}

namespace {

enum class PieceKind { Insert, Delete, Positive, Negative };

// Inserts and deletes touch one row; dense pieces carry a universe vector.
struct Piece {
  PieceKind kind;
  int row = -1;
  double value = 0.0;
  Vec delta;
};

struct Step {
  Vec from, to;
  bool dense;
};

}  // namespace

BatchResult batched_update(const Mat& A, const Vec& w, const ActionSequence& acts,
                           const BatchOptions& opt) {
  const int m0 = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  if (w.size() != m0) throw ArgumentError("batched update: length mismatch");
  require_positive(w, "weights");
  if (!(opt.tol > 0.0) || !(opt.eta >= 0.0)) throw ArgumentError("batched update: bad tolerances");
  if (opt.check_assumptions) check_sequence(A, w, acts, opt.limits);

  int inserts = 0;
  for (const auto& a : acts) inserts += std::holds_alternative<InsertRow>(a) ? 1 : 0;
  const int M = m0 + inserts;
  Mat AU(M, n);
  AU.topRows(m0) = A;

  // Step 1: universe-indexed pieces; weight updates split into max then new.
  Vec x = Vec::Zero(M);
  x.head(m0) = w;
  std::vector<int> cur(m0);
  for (int i = 0; i < m0; ++i) cur[i] = i;
  int next = m0;
  std::vector<Piece> pos, neg;
  for (const auto& act : acts) {
    if (const auto* up = std::get_if<WeightUpdate>(&act)) {
      if (up->w.size() != static_cast<Eigen::Index>(cur.size()))
        throw ArgumentError("batched update: weight update has the wrong length");
      require_positive(up->w, "weight update");
      Vec xn = x;
      for (std::size_t j = 0; j < cur.size(); ++j) xn[cur[j]] = up->w[j];
      const Vec hi = x.cwiseMax(xn);
      const Vec dp = hi - x, dn = xn - hi;
      if (dp.cwiseAbs().maxCoeff() > 0.0) pos.push_back({PieceKind::Positive, -1, 0.0, dp});
      if (dn.cwiseAbs().maxCoeff() > 0.0) neg.push_back({PieceKind::Negative, -1, 0.0, dn});
      x = xn;
    } else if (const auto* ins = std::get_if<InsertRow>(&act)) {
      if (ins->a.size() != n) throw ArgumentError("batched update: inserted row has the wrong length");
      if (!(ins->weight > 0.0)) throw ArgumentError("batched update: inserted weight must be positive");
      AU.row(next) = ins->a.transpose();
      x[next] = ins->weight;
      pos.push_back({PieceKind::Insert, next, ins->weight, Vec()});
      cur.push_back(next++);
    } else {
      const int i = std::get<DeleteRow>(act).index;
      if (i < 0 || i >= static_cast<int>(cur.size())) throw ArgumentError("batched update: delete index");
      const int u = cur[i];
      neg.push_back({PieceKind::Delete, u, -x[u], Vec()});
      x[u] = 0.0;
      cur.erase(cur.begin() + i);
    }
  }

  // Step 2: positive pieces first. Each group is cut into phases of L pieces;
  // the padding of the last phase is a run of no-ops and is left implicit.
  const int L = opt.phase_length > 0 ? opt.phase_length : default_phase_length(n);

  // Step 3: per phase, merge rank-1 pieces and sparsify dense ones.
  Vec u = Vec::Zero(M);
  u.head(m0) = w;
  std::vector<Step> steps;
  auto sparsify = [&](const Vec& d) {
    Vec kept = Vec::Zero(M);
    for (int i = 0; i < M; ++i)
      if (d[i] != 0.0 && std::abs(d[i]) >= opt.eta * u[i]) kept[i] = d[i];
    return kept;
  };
  for (std::size_t p = 0; p < pos.size(); p += L) {
    Vec ins = Vec::Zero(M), dense = Vec::Zero(M);
    bool any_ins = false;
    for (std::size_t q = p; q < std::min(pos.size(), p + L); ++q) {
      const Piece& pc = pos[q];
      if (pc.kind == PieceKind::Insert) {
        ins[pc.row] += pc.value;
        any_ins = true;
      } else {
        dense += pc.delta;
      }
    }
    if (any_ins) {
      steps.push_back({u, u + ins, false});
      u += ins;
    }
    const Vec kept = sparsify(dense);
    if (kept.cwiseAbs().maxCoeff() > 0.0) {
      steps.push_back({u, u + kept, true});
      u += kept;
    }
  }
  for (std::size_t p = 0; p < neg.size(); p += L) {
    Vec dense = Vec::Zero(M);
    std::vector<int> dels;
    for (std::size_t q = p; q < std::min(neg.size(), p + L); ++q) {
      const Piece& pc = neg[q];
      if (pc.kind == PieceKind::Negative)
        dense += pc.delta;
      else
        dels.push_back(pc.row);
    }
    const Vec kept = sparsify(dense);
    if (kept.cwiseAbs().maxCoeff() > 0.0) {
      const Vec to = u + kept;
      for (int i = 0; i < M; ++i)
        if (kept[i] != 0.0 && !(to[i] > 0.0))
          throw AssumptionViolation("batched update: negative update drives a weight to zero");
      steps.push_back({u, to, true});
      u = to;
    }
    if (!dels.empty()) {
      Vec to = u;
      for (int i : dels) to[i] = 0.0;
      steps.push_back({u, to, false});
      u = to;
    }
  }

  // Step 4: accumulate monotone deltas with exact inverses at every breakpoint.
  BatchResult res;
  res.initial_rows = m0;
  res.c_universe = Vec::Zero(M);
  const int T = std::max<int>(1, static_cast<int>(acts.size()));
  int calls = 0;
  for (const auto& s : steps) calls += s.dense ? 2 : 1;
  const double step_tol = opt.tol / std::max(8 * T, calls);
  auto inverse_at = [&](const Vec& weights) { return ApproxInverse{GramFactor(AU, weights).inverse(), 0.0}; };
  ApproxInverse inv_from = steps.empty() ? ApproxInverse{} : inverse_at(steps.front().from);
  for (const auto& s : steps) {
    ApproxInverse inv_to = inverse_at(s.to);
    if (s.dense) {
      Vec mid(M);
      for (int i = 0; i < M; ++i) {
        const double lo = 0.5 * s.from[i], hi = 2.0 * s.from[i];
        mid[i] = std::clamp(s.to[i], std::min(lo, hi), std::max(lo, hi));
      }
      const ApproxInverse inv_mid = inverse_at(mid);
      res.c_universe += monotone_lowrank_delta(AU, s.from, mid, inv_from, inv_mid, step_tol);
      res.c_universe += monotone_lowrank_delta(AU, mid, s.to, inv_mid, inv_to, step_tol);
      res.steps += 2;
    } else {
      res.c_universe += monotone_lowrank_delta(AU, s.from, s.to, inv_from, inv_to, step_tol);
      res.steps += 1;
    }
    inv_from = std::move(inv_to);
  }

  res.survivors = cur;
  const int mT = static_cast<int>(cur.size());
  res.A.resize(mT, n);
  res.v.resize(mT);
  res.w.resize(mT);
  for (int j = 0; j < mT; ++j) {
    res.A.row(j) = AU.row(cur[j]);
    res.v[j] = u[cur[j]];
    res.w[j] = x[cur[j]];
  }
  return res;
}

}  // namespace cutplane
