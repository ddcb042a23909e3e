#pragma once

#include <cstdint>
#include <vector>

#include "cutplane/convex.hpp"

namespace cutplane {

// Linear exchange market: agent i owns one unit of good i and values a unit
// of good j at u(i, j).
struct ExchangeMarket {
  Mat u;

  int agents() const { return static_cast<int>(u.rows()); }
  double max_utility() const { return u.maxCoeff(); }
  // Square, non-negative, every agent with an in-edge and an out-edge, and a
  // loop on every singleton strongly connected component.
  void validate() const;
};

struct Segment {
  int buyer = 0, good = 0;
  double rate = 0.0;  // utility per unit of good
  double cap = 0.0;   // most money the buyer spends on this segment
};

struct FisherMarket {
  int buyers = 0, goods = 0;
  Vec budgets;
  std::vector<Segment> segments;

  void validate() const;
};

struct Residuals {
  double clearing = 0.0;  // goods sold vs supply
  double budget = 0.0;    // money spent vs income or budget
  double bang = 0.0;      // relative bang-per-buck violation
  double max() const { return std::max({clearing, budget, bang}); }
};

struct EquilibriumReport {
  Vec prices;
  Mat allocation;  // exchange: x(i, j) units of good j to agent i
  Vec spending;    // Fisher: money per segment
  Residuals residuals;
  double objective = 0.0;  // convex-program objective at the recovered point
  double certificate = 0.0;
  long oracle_calls = 0;
  bool ok = false;  // residuals within eps_eq
};

struct MarketOptions {
  double eps_eq = 1e-2;
  double eps_game = 1e-2;
  VaidyaParams params;
  std::uint64_t seed = 0;
};

// Game value and gradient at (p, beta, lambda, eta) for
// sum_i p_i log(p_i / beta_i) - lambda^T p - eta^T p.
struct GameEval {
  double value = 0.0;
  Vec grad;  // (d/dp, d/dbeta, d/dlambda, d/deta)
};
GameEval ad_game_oracle(const ExchangeMarket& mk, const Vec& point);

// Price bound (n U)^n, at least 2 so the price box has an interior.
double ad_price_bound(const ExchangeMarket& mk);

// Residuals of (p, x) against the exchange equilibrium conditions.
Residuals verify_equilibrium_ad(const ExchangeMarket& mk, const Vec& p, const Mat& x, double tol = 1e-9);

// Money flows on near-best edges at prices p, closest to clearing.
Mat recover_exchange_allocation(const ExchangeMarket& mk, const Vec& p, double eps_eq);

EquilibriumReport solve_arrow_debreu(const ExchangeMarket& mk, const MarketOptions& opt);

// Value and gradient at (p, eta, lambda) for
// -sum p log p + eta^T p + lambda^T B + sum_s cap_s max(0, log rate_s - eta_j - lambda_i).
// The hinge subgradient is 0 at the kink.
GameEval fisher_game_oracle(const FisherMarket& mk, const Vec& point);

Residuals verify_equilibrium_fisher(const FisherMarket& mk, const Vec& p, const Vec& spending,
                                    double tol = 1e-9);

// Buyer-optimal spending at prices p, closest to clearing.
Vec recover_fisher_spending(const FisherMarket& mk, const Vec& p, double eps_eq);

EquilibriumReport solve_fisher(const FisherMarket& mk, const MarketOptions& opt);

}  // namespace cutplane
