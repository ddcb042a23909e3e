#include "cutplane/convex.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "cutplane/errors.hpp"
#include "cutplane/simplex.hpp"

namespace cutplane {

BoxOracle::BoxOracle(Vec lo, Vec hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.size() != hi_.size() || lo_.size() == 0) throw ArgumentError("box oracle: bad bounds");
  if (!((hi_ - lo_).minCoeff() > 0.0)) throw ArgumentError("box oracle: empty box");
}

OracleAnswer BoxOracle::query(const Vec& x) {
  if (x.size() != lo_.size()) throw ArgumentError("box oracle: wrong dimension");
  Eigen::Index i = 0, j = 0;
  const double over = (x - hi_).maxCoeff(&i);
  const double under = (lo_ - x).maxCoeff(&j);
  if (over <= 0.0 && under <= 0.0) return OracleAnswer::in();
  Vec a = Vec::Zero(x.size());
  if (over >= under) {
    a[i] = 1.0;
    return OracleAnswer::cut(a, hi_[i]);
  }
  a[j] = -1.0;
  return OracleAnswer::cut(a, -lo_[j]);
}

ConvexResult minimize_convex(SubgradientOracle& f, SeparationOracle& S, double R, double alpha,
                             double minwidth, const VaidyaParams& params) {
  const int n = f.dim();
  if (S.dim() != n) throw ArgumentError("minimize_convex: oracle dimensions differ");
  if (!(alpha > 0.0) || !(alpha < 1.0)) throw ArgumentError("minimize_convex: alpha must lie in (0,1)");
  if (!(minwidth > 0.0) || !(R > 0.0)) throw ArgumentError("minimize_convex: R and minwidth must be positive");
  PolytopeState P(n, R, params);
  ConvexResult res;
  // The level set holds (1 - alpha) x* + alpha S, a ball of radius alpha minwidth / 2.
  res.budget = iteration_budget(params, n, R, 0.5 * alpha * minwidth);
  res.value = std::numeric_limits<double>::infinity();
  const CutRule rule = [&](const Vec& x) -> std::optional<Cut> {
    const OracleAnswer in = S.query(x);
    if (!in.inside) return Cut{in.a, in.b};
    SubgradientAnswer ans = f.eval(x);
    if (ans.g.size() != n || !ans.g.allFinite() || !std::isfinite(ans.value))
      throw EvaluationError("subgradient oracle returned a bad answer");
    ++res.feasible_queries;
    if (ans.value < res.value) {
      res.value = ans.value;
      res.x = x;
    }
    if (ans.g.squaredNorm() == 0.0) return std::nullopt;
    return Cut{ans.g, ans.g.dot(x)};
  };
  res.oracle_calls = drive(P, res.budget, rule).oracle_calls;
  if (res.feasible_queries == 0) throw ConvergenceError("minimize_convex: no query point was feasible");
  return res;
}

double gap_value(const GameTranscript& t, const Vec& z) {
  if (t.entries.empty()) throw ArgumentError("gap_value: empty transcript");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : t.entries) best = std::min(best, (e.z - z).dot(e.g));
  return best;
}

Multipliers lagrange_multipliers(const GameTranscript& t, double eta_tol) {
  const int K = static_cast<int>(t.entries.size());
  if (K == 0) throw ArgumentError("lagrange_multipliers: empty transcript");
  const int d = static_cast<int>(t.entries.front().z.size());
  Mat A(d + 1, K);
  Vec c(K);
  // Solved over mu_k = lambda_k |g_k| so every balance column has unit length;
  // box faces and gradients differ in size by orders of magnitude.
  Vec scale(K);
  for (int k = 0; k < K; ++k) {
    const double gn = t.entries[k].g.norm();
    if (!(gn > 0.0) || !std::isfinite(gn)) throw ArgumentError("lagrange_multipliers: zero or non-finite normal");
    scale[k] = gn;
    A.block(0, k, d, 1) = t.entries[k].g / gn;
    A(d, k) = 1.0 / gn;
    c[k] = t.entries[k].z.dot(t.entries[k].g) / gn;
  }
  Vec b = Vec::Zero(d + 1);
  b[d] = 1.0;
  const LpResult lp = solve_lp(A, b, c);
  if (lp.status != LpStatus::Optimal) throw InternalError("multiplier LP has no optimal solution");
  Multipliers out;
  out.lambda = lp.x.cwiseQuotient(scale);
  out.lambda /= out.lambda.sum();
  out.value = 0.0;
  Vec bal = Vec::Zero(d);
  for (int k = 0; k < K; ++k) {
    out.value += out.lambda[k] * t.entries[k].z.dot(t.entries[k].g);
    bal += out.lambda[k] * t.entries[k].g;
  }
  out.residual = bal.cwiseAbs().sum();
  if (out.residual > eta_tol * std::sqrt(static_cast<double>(d)) * t.beta)
    throw InternalError("multiplier LP residual exceeds its tolerance");
  return out;
}

SaddleResult solve_saddle(const SaddleProblem& prob, double eps, const VaidyaParams& params,
                          std::uint64_t seed) {
  const int n = prob.n, m = prob.m, d = n + m;
  if (n < 1 || m < 1) throw ArgumentError("solve_saddle: dimensions must be positive");
  if (!prob.X || !prob.Y || prob.X->dim() != n || prob.Y->dim() != m)
    throw ArgumentError("solve_saddle: domain oracles missing or of the wrong dimension");
  if (!prob.first_order) throw ArgumentError("solve_saddle: first-order oracle missing");
  if (!(prob.L > 0.0) || !(prob.R > 0.0) || !(prob.r > 0.0)) throw ArgumentError("solve_saddle: L, R, r must be positive");
  if (!(eps > 0.0) || eps > 0.5) throw ArgumentError("solve_saddle: eps must lie in (0, 1/2]");
  const Vec c = prob.center.size() == 0 ? Vec::Zero(d) : prob.center;
  if (c.size() != d) throw ArgumentError("solve_saddle: center has the wrong dimension");

  VaidyaParams p = params;
  p.layers.seed = seed;
  PolytopeState P(d, prob.R, p);
  SaddleResult res;
  // The certificate chain loses a factor 54 = 18 * 3, so the volume target uses eps / 54.
  res.budget = iteration_budget(p, d, prob.R, eps * prob.r / 54.0);

  // One entry per query; infeasible normals are unit length until beta is known.
  std::vector<TranscriptEntry> queries;
  std::optional<Vec> stationary;

  // Multipliers over the box faces and the surviving cuts, the averaged
  // feasible point and its certificate. Works at any point of the search.
  auto summarize = [&](SaddleResult& out) {
    GameTranscript& t = out.transcript;
    t.entries.clear();
    // beta >= 3 sqrt(d) L; the normals only enter the transcript, so beta can
    // also absorb gradients that turned out larger than the declared L.
    t.beta = 3.0 * std::sqrt(static_cast<double>(d)) * std::max(prob.L, res.max_gradient_norm);
    for (int i = 0; i < d; ++i) {
      for (const double sgn : {1.0, -1.0}) {
        TranscriptEntry e;
        e.z = c;
        e.z[i] += sgn * prob.R;
        e.g = Vec::Zero(d);
        e.g[i] = sgn * t.beta;
        t.entries.push_back(std::move(e));
      }
    }
    for (const long id : P.row_ids()) {
      TranscriptEntry e = queries.at(static_cast<std::size_t>(id));
      if (!e.feasible) e.g *= t.beta;
      t.entries.push_back(std::move(e));
    }
    out.multipliers = lagrange_multipliers(t);
    const Vec& lam = out.multipliers.lambda;
    Vec zhat = Vec::Zero(d);
    Vec resid = Vec::Zero(d);
    out.feasible_mass = 0.0;
    for (std::size_t k = 0; k < t.entries.size(); ++k) {
      resid += lam[k] * t.entries[k].g;
      if (!t.entries[k].feasible) continue;
      out.feasible_mass += lam[k];
      zhat += lam[k] * t.entries[k].z;
    }
    if (!(out.feasible_mass > 0.0)) return false;
    zhat /= out.feasible_mass;
    out.x = zhat.head(n);
    out.y = zhat.tail(m);
    // max over the box of sum_k lambda_k gamma_k, rescaled to the feasible part.
    const double top = out.multipliers.value - resid.dot(c) + prob.R * resid.cwiseAbs().sum();
    out.certificate = top / out.feasible_mass;
    return true;
  };

  // The certificate bounds the gap of the averaged point, so the search can
  // stop once it meets eps L r with most of the mass on feasible queries, or
  // once the caller's own test accepts the averaged point. Checked on a
  // geometric schedule to keep the multiplier solves rare.
  const double target = eps * prob.L * prob.r;
  long next_check = 8L * d;
  SaddleResult early;
  const CutRule rule = [&](const Vec& u) -> std::optional<Cut> {
    if (static_cast<long>(queries.size()) >= next_check) {
      next_check += std::max<long>(1, next_check / 4);
      try {
        if (summarize(early) && early.feasible_mass > 0.5) {
          if (prob.stop_on_certificate && early.certificate <= target) {
            early.certified_early = true;
            return std::nullopt;
          }
          if (prob.accept && prob.accept(early.x, early.y)) {
            early.accepted_early = true;
            return std::nullopt;
          }
        }
      } catch (const InternalError&) {
        // No balancing combination yet; keep cutting.
      }
    }
    Vec z = u + c;
    Eigen::Index i = 0;
    if (u.cwiseAbs().maxCoeff(&i) > prob.R) {
      // Centers stay inside the box, so this only catches rounding at a face.
      const double sgn = u[i] > 0.0 ? 1.0 : -1.0;
      z[i] = c[i] + sgn * prob.R;
      Vec e = Vec::Zero(d);
      e[i] = sgn;
      queries.push_back({z, e, false});
      return Cut{e, prob.R};
    }
    const Vec x = z.head(n), y = z.tail(m);
    const OracleAnswer ax = prob.X->query(x);
    const OracleAnswer ay = ax.inside ? prob.Y->query(y) : OracleAnswer::in();
    if (!ax.inside || !ay.inside) {
      Vec nrm = Vec::Zero(d);
      if (!ax.inside)
        nrm.head(n) = ax.a / ax.a.norm();
      else
        nrm.tail(m) = ay.a / ay.a.norm();
      if (!nrm.allFinite()) throw ProtocolError("domain separator has a zero or non-finite normal");
      queries.push_back({z, nrm, false});
      return Cut{nrm, nrm.dot(u)};
    }
    const Vec g = prob.first_order(x, y);
    if (g.size() != d || !g.allFinite()) throw EvaluationError("first-order oracle returned a bad vector");
    queries.push_back({z, g, true});
    res.max_gradient_norm = std::max(res.max_gradient_norm, g.norm());
    if (g.squaredNorm() == 0.0) {
      stationary = z;
      return std::nullopt;
    }
    return Cut{g, g.dot(u)};
  };
  drive(P, res.budget, rule);
  res.oracle_calls = static_cast<long>(queries.size());

  if (stationary) {
    res.exact = true;
    res.x = stationary->head(n);
    res.y = stationary->tail(m);
    res.feasible_mass = 1.0;
    return res;
  }
  if (early.certified_early || early.accepted_early) {
    early.oracle_calls = res.oracle_calls;
    early.budget = res.budget;
    early.max_gradient_norm = res.max_gradient_norm;
    return early;
  }
  if (!summarize(res)) throw ConvergenceError("solve_saddle: no feasible query carries multiplier mass");
  return res;
}

}  // namespace cutplane
