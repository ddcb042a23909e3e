#include "cutplane/markets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cutplane/errors.hpp"
#include "cutplane/simplex.hpp"

namespace cutplane {

void ExchangeMarket::validate() const {
  const int n = agents();
  if (n < 1 || u.cols() != n) throw ArgumentError("exchange market: utility matrix must be square and non-empty");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double v = u(i, j);
      if (!std::isfinite(v) || v < 0.0 || v != std::round(v))
        throw ArgumentError("exchange market: utilities must be non-negative integers");
    }
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> reach(n, n);
  for (int i = 0; i < n; ++i) {
    if (!(u.row(i).maxCoeff() > 0.0)) throw ArgumentError("exchange market: an agent values no good");
    if (!(u.col(i).maxCoeff() > 0.0)) throw ArgumentError("exchange market: a good is valued by no agent");
    for (int j = 0; j < n; ++j) reach(i, j) = i == j || u(i, j) > 0.0;
  }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      if (reach(i, k))
        for (int j = 0; j < n; ++j) reach(i, j) = reach(i, j) || reach(k, j);
  for (int i = 0; i < n; ++i) {
    int size = 0;
    for (int j = 0; j < n; ++j) size += reach(i, j) && reach(j, i) ? 1 : 0;
    if (size == 1 && !(u(i, i) > 0.0))
      throw ArgumentError("exchange market: a singleton component has no loop");
  }
}

void FisherMarket::validate() const {
  if (buyers < 1 || goods < 1) throw ArgumentError("Fisher market: needs buyers and goods");
  if (budgets.size() != buyers || !(budgets.minCoeff() > 0.0) || !budgets.allFinite())
    throw ArgumentError("Fisher market: budgets must be positive");
  Vec caps = Vec::Zero(buyers);
  std::vector<bool> sold(goods, false);
  for (const auto& s : segments) {
    if (s.buyer < 0 || s.buyer >= buyers || s.good < 0 || s.good >= goods)
      throw ArgumentError("Fisher market: segment index out of range");
    if (!(s.rate > 0.0) || !(s.cap > 0.0) || !std::isfinite(s.rate) || !std::isfinite(s.cap))
      throw ArgumentError("Fisher market: segment rates and caps must be positive");
    caps[s.buyer] += s.cap;
    sold[s.good] = true;
  }
  for (int j = 0; j < goods; ++j)
    if (!sold[j]) throw ArgumentError("Fisher market: a good has no segment");
  for (int i = 0; i < buyers; ++i)
    if (caps[i] < budgets[i]) throw ArgumentError("Fisher market: a buyer's caps do not cover the budget");
}

double ad_price_bound(const ExchangeMarket& mk) {
  const double n = mk.agents();
  return std::max(2.0, std::pow(n * mk.max_utility(), n));
}

GameEval ad_game_oracle(const ExchangeMarket& mk, const Vec& point) {
  const int n = mk.agents();
  if (point.size() != 4 * n) throw ArgumentError("exchange game: point has the wrong length");
  const Vec p = point.segment(0, n), beta = point.segment(n, n);
  const Vec lam = point.segment(2 * n, n), eta = point.segment(3 * n, n);
  if (!(beta.minCoeff() > 0.0)) throw DomainError("exchange game: beta must be positive");
  if (!(p.minCoeff() >= 1.0)) throw DomainError("exchange game: prices must be at least 1");
  GameEval out;
  out.grad.resize(4 * n);
  const Vec logratio = (p.array() / beta.array()).log().matrix();
  out.value = p.dot(logratio) - lam.dot(p) - eta.dot(p);
  out.grad.segment(0, n) = (logratio.array() + 1.0 - lam.array() - eta.array()).matrix();
  out.grad.segment(n, n) = -(p.array() / beta.array()).matrix();
  out.grad.segment(2 * n, n) = -p;
  out.grad.segment(3 * n, n) = -p;
  return out;
}

Residuals verify_equilibrium_ad(const ExchangeMarket& mk, const Vec& p, const Mat& x, double tol) {
  const int n = mk.agents();
  if (p.size() != n || x.rows() != n || x.cols() != n) throw ArgumentError("exchange verifier: size mismatch");
  if (!(p.minCoeff() > 0.0)) throw DomainError("exchange verifier: prices must be positive");
  Residuals r;
  for (int j = 0; j < n; ++j) r.clearing = std::max(r.clearing, std::abs(x.col(j).sum() - 1.0));
  for (int i = 0; i < n; ++i) r.budget = std::max(r.budget, std::abs(p[i] - x.row(i).dot(p)));
  for (int i = 0; i < n; ++i) {
    double best = 0.0;
    for (int j = 0; j < n; ++j) best = std::max(best, mk.u(i, j) / p[j]);
    for (int j = 0; j < n; ++j)
      if (x(i, j) > tol) r.bang = std::max(r.bang, (best - mk.u(i, j) / p[j]) / best);
  }
  return r;
}

Mat recover_exchange_allocation(const ExchangeMarket& mk, const Vec& p, double eps_eq) {
  const int n = mk.agents();
  if (p.size() != n || !(p.minCoeff() > 0.0)) throw ArgumentError("allocation recovery: bad prices");
  // Near-best edges: bang per buck within eps_eq / 2 of the agent's best.
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) {
    double best = 0.0;
    for (int j = 0; j < n; ++j) best = std::max(best, mk.u(i, j) / p[j]);
    for (int j = 0; j < n; ++j)
      if (mk.u(i, j) > 0.0 && mk.u(i, j) / p[j] >= (1.0 - 0.5 * eps_eq) * best) edges.emplace_back(i, j);
  }
  // Rows: goods sold (n), money spent (n). Columns: edge flows, then a +/- slack pair per row.
  const int E = static_cast<int>(edges.size());
  Mat A = Mat::Zero(2 * n, E + 4 * n);
  Vec b(2 * n), c = Vec::Zero(E + 4 * n);
  for (int e = 0; e < E; ++e) {
    A(edges[e].second, e) = 1.0;
    A(n + edges[e].first, e) = 1.0;
  }
  for (int k = 0; k < 2 * n; ++k) {
    A(k, E + 2 * k) = 1.0;
    A(k, E + 2 * k + 1) = -1.0;
    c[E + 2 * k] = c[E + 2 * k + 1] = 1.0;
  }
  b << p, p;
  const LpResult lp = solve_lp(A, b, c);
  if (lp.status != LpStatus::Optimal) throw InternalError("allocation recovery LP failed");
  Mat x = Mat::Zero(n, n);
  for (int e = 0; e < E; ++e) x(edges[e].first, edges[e].second) = lp.x[e] / p[edges[e].second];
  return x;
}

namespace {

// Rows G x <= h with a row per pair of bounds.
struct Halfspaces {
  std::vector<Vec> rows;
  std::vector<double> rhs;
  int dim;

  explicit Halfspaces(int d) : dim(d) {}
  void add(Vec a, double b) {
    rows.push_back(std::move(a));
    rhs.push_back(b);
  }
  void bounds(int i, double lo, double hi) {
    Vec e = Vec::Zero(dim);
    e[i] = -1.0;
    add(e, -lo);
    e[i] = 1.0;
    add(e, hi);
  }
  HalfspaceOracle oracle() const {
    Mat G(static_cast<int>(rows.size()), dim);
    Vec h(static_cast<int>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
      G.row(k) = rows[k].transpose();
      h[k] = rhs[k];
    }
    return HalfspaceOracle(G, h);
  }
};

double lipschitz_bound(const std::vector<double>& per_coordinate) {
  double s = 0.0;
  for (const double v : per_coordinate) s += v * v;
  return std::sqrt(s);
}

}  // namespace

EquilibriumReport solve_arrow_debreu(const ExchangeMarket& mk, const MarketOptions& opt) {
  mk.validate();
  if (!(opt.eps_eq > 0.0)) throw ArgumentError("eps_eq must be positive");
  const int n = mk.agents();
  const double U = mk.max_utility();
  const double Delta = ad_price_bound(mk);
  // beta_i = min_j p_j / u_ij >= 1/U at the optimum, so this floor loses nothing.
  const double beta_lo = 0.5 / U;
  // Dual magnitudes: lambda_i + eta_i = 1 + log(p_i / beta_i) and
  // lambda_j + eta_i = log u_ij on used edges.
  const double B = 2.0 * (1.0 + std::log(n * U * Delta));

  Halfspaces hx(2 * n), hy(2 * n);
  for (int i = 0; i < n; ++i) {
    hx.bounds(i, 1.0, Delta);
    hx.bounds(n + i, beta_lo, Delta);
    hy.bounds(i, -B, B);
    hy.bounds(n + i, -B, B);
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (!(mk.u(i, j) > 0.0)) continue;
      Vec a = Vec::Zero(2 * n);
      a[n + i] = mk.u(i, j);
      a[j] = -1.0;
      hx.add(a, 0.0);
      Vec c = Vec::Zero(2 * n);
      c[j] = -1.0;
      c[n + i] = -1.0;
      hy.add(c, -std::log(mk.u(i, j)));
    }
  HalfspaceOracle X = hx.oracle(), Y = hy.oracle();

  SaddleProblem prob;
  prob.n = 2 * n;
  prob.m = 2 * n;
  prob.X = &X;
  prob.Y = &Y;
  prob.first_order = [&](const Vec& x, const Vec& y) {
    Vec pt(4 * n);
    pt << x, y;
    const GameEval ev = ad_game_oracle(mk, pt);
    Vec g(4 * n);
    g << ev.grad.head(2 * n), -ev.grad.tail(2 * n);
    return g;
  };
  const double logmax = std::log(Delta / beta_lo) + 1.0 + 2.0 * B;
  std::vector<double> per(n, logmax);
  per.insert(per.end(), n, Delta / beta_lo);
  per.insert(per.end(), 2 * n, Delta);
  prob.L = lipschitz_bound(per);
  prob.center = Vec::Zero(4 * n);
  prob.center.segment(0, n).setConstant(0.5 * (1.0 + Delta));
  prob.center.segment(n, n).setConstant(0.5 * (beta_lo + Delta));
  prob.R = std::max({0.5 * (Delta - 1.0), 0.5 * (Delta - beta_lo), B});
  // Balls inside X around p = (1 + Delta)/2, beta = beta_lo + r, and inside Y
  // around lambda = eta = (B + log U)/2.
  prob.r = std::min({0.25 * (Delta - 1.0), 0.125 / U, 0.25 * (B - std::log(U))});
  // The verifier decides; a game-accurate point can still miss eps_eq.
  prob.stop_on_certificate = false;
  prob.accept = [&](const Vec& x, const Vec&) {
    const Vec p = x.head(n);
    return verify_equilibrium_ad(mk, p, recover_exchange_allocation(mk, p, opt.eps_eq)).max() <= opt.eps_eq;
  };

  const SaddleResult sr = solve_saddle(prob, opt.eps_game, opt.params, opt.seed);
  EquilibriumReport rep;
  rep.prices = sr.x.head(n);
  rep.certificate = sr.certificate;
  rep.oracle_calls = sr.oracle_calls;
  rep.allocation = recover_exchange_allocation(mk, rep.prices, opt.eps_eq);
  rep.residuals = verify_equilibrium_ad(mk, rep.prices, rep.allocation);
  // Convex-program objective at (p, beta, y) with beta the largest feasible value.
  const Vec& p = rep.prices;
  for (int i = 0; i < n; ++i) {
    double beta = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j)
      if (mk.u(i, j) > 0.0) beta = std::min(beta, p[j] / mk.u(i, j));
    rep.objective += p[i] * std::log(p[i] / beta);
    for (int j = 0; j < n; ++j)
      if (mk.u(i, j) > 0.0) rep.objective -= rep.allocation(i, j) * p[j] * std::log(mk.u(i, j));
  }
  rep.ok = rep.residuals.max() <= opt.eps_eq;
  return rep;
}

GameEval fisher_game_oracle(const FisherMarket& mk, const Vec& point) {
  const int G = mk.goods, Bn = mk.buyers;
  if (point.size() != 2 * G + Bn) throw ArgumentError("Fisher game: point has the wrong length");
  const Vec p = point.head(G), eta = point.segment(G, G), lam = point.tail(Bn);
  if (!(p.minCoeff() > 0.0)) throw DomainError("Fisher game: prices must be positive");
  GameEval out;
  out.grad = Vec::Zero(2 * G + Bn);
  const Vec logp = p.array().log().matrix();
  out.value = -p.dot(logp) + eta.dot(p) + lam.dot(mk.budgets);
  out.grad.head(G) = (-logp.array() - 1.0 + eta.array()).matrix();
  out.grad.segment(G, G) = p;
  out.grad.tail(Bn) = mk.budgets;
  for (const auto& s : mk.segments) {
    const double arg = std::log(s.rate) - eta[s.good] - lam[s.buyer];
    if (arg <= 0.0) continue;
    out.value += s.cap * arg;
    out.grad[G + s.good] -= s.cap;
    out.grad[2 * G + s.buyer] -= s.cap;
  }
  return out;
}

Residuals verify_equilibrium_fisher(const FisherMarket& mk, const Vec& p, const Vec& spending, double tol) {
  const int G = mk.goods;
  const int S = static_cast<int>(mk.segments.size());
  if (p.size() != G || spending.size() != S) throw ArgumentError("Fisher verifier: size mismatch");
  if (!(p.minCoeff() > 0.0)) throw DomainError("Fisher verifier: prices must be positive");
  Residuals r;
  Vec sold = Vec::Zero(G), spent = Vec::Zero(mk.buyers);
  std::vector<bool> open(mk.buyers, false);
  for (int k = 0; k < S; ++k) {
    const Segment& s = mk.segments[k];
    const double b = spending[k];
    sold[s.good] += b / p[s.good];
    spent[s.buyer] += b;
    if (s.cap - b > tol) open[s.buyer] = true;
    // Spending outside [0, cap] counts against the budget condition.
    r.budget = std::max(r.budget, std::max(-b, b - s.cap) / mk.budgets[s.buyer]);
  }
  for (int j = 0; j < G; ++j) r.clearing = std::max(r.clearing, std::abs(sold[j] - 1.0));
  for (int i = 0; i < mk.buyers; ++i) {
    const double gap = (spent[i] - mk.budgets[i]) / mk.budgets[i];
    r.budget = std::max(r.budget, open[i] ? std::abs(gap) : std::max(0.0, gap));
  }
  // A buyer must not spend on a segment while a better one has room left.
  for (int k = 0; k < S; ++k) {
    const Segment& s = mk.segments[k];
    if (!(spending[k] > tol)) continue;
    const double bang = s.rate / p[s.good];
    for (int q = 0; q < S; ++q) {
      const Segment& t = mk.segments[q];
      if (t.buyer != s.buyer || !(t.cap - spending[q] > tol)) continue;
      const double other = t.rate / p[t.good];
      if (other > bang) r.bang = std::max(r.bang, (other - bang) / other);
    }
  }
  return r;
}

Vec recover_fisher_spending(const FisherMarket& mk, const Vec& p, double eps_eq) {
  const int G = mk.goods, Bn = mk.buyers;
  const int S = static_cast<int>(mk.segments.size());
  if (p.size() != G || !(p.minCoeff() > 0.0)) throw ArgumentError("spending recovery: bad prices");
  const double tau = 0.5 * eps_eq;
  auto bang = [&](int k) { return mk.segments[k].rate / p[mk.segments[k].good]; };

  // Greedy spending gives each buyer's marginal bang per buck; segments near
  // it are free, better ones are full, worse ones are empty.
  Vec spend = Vec::Zero(S);
  std::vector<int> free_segs;
  for (int i = 0; i < Bn; ++i) {
    std::vector<int> mine;
    for (int k = 0; k < S; ++k)
      if (mk.segments[k].buyer == i) mine.push_back(k);
    std::stable_sort(mine.begin(), mine.end(), [&](int a, int b) { return bang(a) > bang(b); });
    double left = mk.budgets[i], marginal = 0.0;
    for (const int k : mine) {
      marginal = bang(k);
      left -= mk.segments[k].cap;
      if (left <= 0.0) break;
    }
    for (const int k : mine) {
      if (bang(k) > marginal * (1.0 + tau))
        spend[k] = mk.segments[k].cap;
      else if (bang(k) >= marginal * (1.0 - tau))
        free_segs.push_back(k);
    }
  }

  // Rows: budgets (Bn), goods (G), caps of free segments (F).
  // Columns: free spending (F), cap slack (F), +/- slack per budget and good row.
  const int F = static_cast<int>(free_segs.size());
  const int rows = Bn + G + F;
  const int cols = 2 * F + 2 * (Bn + G);
  Mat A = Mat::Zero(rows, cols);
  Vec b(rows), c = Vec::Zero(cols);
  for (int i = 0; i < Bn; ++i) b[i] = mk.budgets[i];
  for (int j = 0; j < G; ++j) b[Bn + j] = p[j];
  for (int k = 0; k < S; ++k) {
    b[mk.segments[k].buyer] -= spend[k];
    b[Bn + mk.segments[k].good] -= spend[k];
  }
  for (int f = 0; f < F; ++f) {
    const Segment& s = mk.segments[free_segs[f]];
    A(s.buyer, f) = 1.0;
    A(Bn + s.good, f) = 1.0;
    A(Bn + G + f, f) = 1.0;
    A(Bn + G + f, F + f) = 1.0;
    b[Bn + G + f] = s.cap;
  }
  for (int k = 0; k < Bn + G; ++k) {
    A(k, 2 * F + 2 * k) = 1.0;
    A(k, 2 * F + 2 * k + 1) = -1.0;
    // Relative slack: budget rows by the budget, good rows by the price.
    const double scale = k < Bn ? mk.budgets[k] : p[k - Bn];
    c[2 * F + 2 * k] = c[2 * F + 2 * k + 1] = 1.0 / scale;
  }
  const LpResult lp = solve_lp(A, b, c);
  if (lp.status != LpStatus::Optimal) throw InternalError("spending recovery LP failed");
  for (int f = 0; f < F; ++f) spend[free_segs[f]] = lp.x[f];
  return spend;
}

EquilibriumReport solve_fisher(const FisherMarket& mk, const MarketOptions& opt) {
  mk.validate();
  if (!(opt.eps_eq > 0.0)) throw ArgumentError("eps_eq must be positive");
  const int G = mk.goods, Bn = mk.buyers;
  const double total = mk.budgets.sum();
  // Numerical floor, assumed below every equilibrium price.
  const double p_lo = 1e-6 * total;
  double maxlog = 0.0;
  for (const auto& s : mk.segments) maxlog = std::max(maxlog, std::abs(std::log(s.rate)));
  // eta_j = 1 + log p_j; lambda_i = log(rate / p_j) - 1 on a marginal segment.
  const double B = 2.0 * (1.0 + std::abs(std::log(p_lo)) + std::abs(std::log(total)) + maxlog);

  // x = (eta, lambda) is minimized, y = p is maximized.
  Halfspaces hx(G + Bn), hy(G);
  for (int k = 0; k < G + Bn; ++k) hx.bounds(k, -B, B);
  for (int j = 0; j < G; ++j) hy.bounds(j, p_lo, total);
  HalfspaceOracle X = hx.oracle(), Y = hy.oracle();

  SaddleProblem prob;
  prob.n = G + Bn;
  prob.m = G;
  prob.X = &X;
  prob.Y = &Y;
  prob.first_order = [&](const Vec& x, const Vec& y) {
    Vec pt(2 * G + Bn);
    pt << y, x;
    const GameEval ev = fisher_game_oracle(mk, pt);
    Vec g(2 * G + Bn);
    g << ev.grad.tail(G + Bn), -ev.grad.head(G);
    return g;
  };
  double caps = 0.0;
  for (const auto& s : mk.segments) caps += s.cap;
  std::vector<double> per(G, total + caps);
  per.insert(per.end(), Bn, mk.budgets.maxCoeff() + caps);
  per.insert(per.end(), G, std::abs(std::log(p_lo)) + std::abs(std::log(total)) + 1.0 + B);
  prob.L = lipschitz_bound(per);
  prob.center = Vec::Zero(2 * G + Bn);
  prob.center.tail(G).setConstant(0.5 * (p_lo + total));
  prob.R = std::max(B, 0.5 * (total - p_lo));
  prob.r = std::min(B, 0.5 * (total - p_lo));
  prob.stop_on_certificate = false;
  prob.accept = [&](const Vec&, const Vec& y) {
    return verify_equilibrium_fisher(mk, y, recover_fisher_spending(mk, y, opt.eps_eq)).max() <= opt.eps_eq;
  };

  const SaddleResult sr = solve_saddle(prob, opt.eps_game, opt.params, opt.seed);
  EquilibriumReport rep;
  rep.prices = sr.y;
  rep.certificate = sr.certificate;
  rep.oracle_calls = sr.oracle_calls;
  rep.spending = recover_fisher_spending(mk, rep.prices, opt.eps_eq);
  rep.residuals = verify_equilibrium_fisher(mk, rep.prices, rep.spending);
  for (std::size_t k = 0; k < mk.segments.size(); ++k)
    rep.objective += rep.spending[k] * std::log(mk.segments[k].rate);
  rep.objective -= rep.prices.dot(rep.prices.array().log().matrix());
  rep.ok = rep.residuals.max() <= opt.eps_eq;
  return rep;
}

}  // namespace cutplane
