#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cutplane/vaidya.hpp"

namespace cutplane {

struct SubgradientAnswer {
  double value = 0.0;
  Vec g;
};

class SubgradientOracle {
 public:
  virtual ~SubgradientOracle() = default;
  virtual int dim() const = 0;
  virtual SubgradientAnswer eval(const Vec& x) = 0;
};

class FunctionOracle : public SubgradientOracle {
 public:
  using Fn = std::function<SubgradientAnswer(const Vec&)>;
  FunctionOracle(int n, Fn fn) : n_(n), fn_(std::move(fn)) {}
  int dim() const override { return n_; }
  SubgradientAnswer eval(const Vec& x) override { return fn_(x); }

 private:
  int n_;
  Fn fn_;
};

// Axis box {lo <= x <= hi} as a separation oracle.
class BoxOracle : public SeparationOracle {
 public:
  BoxOracle(Vec lo, Vec hi);
  int dim() const override { return static_cast<int>(lo_.size()); }
  OracleAnswer query(const Vec& x) override;

 private:
  Vec lo_, hi_;
};

struct ConvexResult {
  Vec x;
  double value = 0.0;
  long oracle_calls = 0;
  long feasible_queries = 0;
  long budget = 0;
};

// Level-set reduction: feasible queries are cut by their subgradient halfspace,
// infeasible ones by the set's separator; returns the best feasible query.
// The budget is C_iter n log(2 n R / (alpha minwidth)).
ConvexResult minimize_convex(SubgradientOracle& f, SeparationOracle& S, double R, double alpha,
                             double minwidth, const VaidyaParams& params);

// min over X, max over Y of f(x, y), with f convex in x and concave in y.
struct SaddleProblem {
  int n = 0, m = 0;
  SeparationOracle* X = nullptr;
  SeparationOracle* Y = nullptr;
  // (grad_x f, -grad_y f) at an interior point.
  std::function<Vec(const Vec& x, const Vec& y)> first_order;
  double L = 1.0;  // Lipschitz bound
  double R = 1.0;  // X x Y lies in the box of half-width R around center
  double r = 1.0;  // X and Y each contain a ball of this radius
  Vec center;      // empty means the origin
  // Optional test of an averaged point (x, y); true ends the search early.
  std::function<bool(const Vec& x, const Vec& y)> accept;
  // End the search once the certificate reaches eps L r.
  bool stop_on_certificate = true;
};

struct TranscriptEntry {
  Vec z, g;
  bool feasible = false;
};

// The constraints still alive at the end: box faces first, then surviving cuts.
struct GameTranscript {
  std::vector<TranscriptEntry> entries;
  double beta = 0.0;
};

// gamma(z) = min_k (z_k - z)^T g_k.
double gap_value(const GameTranscript& t, const Vec& z);

struct Multipliers {
  Vec lambda;
  double value = 0.0;     // sum_k lambda_k z_k^T g_k
  double residual = 0.0;  // ||sum_k lambda_k g_k||_1
};

// The simplex weights making sum_k lambda_k gamma_k constant with the smallest
// constant. Throws InternalError if the LP has no solution or the residual
// exceeds eta_tol sqrt(dim) beta.
Multipliers lagrange_multipliers(const GameTranscript& t, double eta_tol = 1e-6);

struct SaddleResult {
  Vec x, y;
  // Upper bound on max_y f(x, y) - min_x f(x, y) from the multipliers.
  double certificate = 0.0;
  // Multiplier mass on feasible queries.
  double feasible_mass = 0.0;
  long oracle_calls = 0;
  long budget = 0;
  // A feasible query with zero gradient ended the run.
  bool exact = false;
  // The certificate reached eps L r before the budget ran out.
  bool certified_early = false;
  // SaddleProblem::accept took the averaged point before the budget ran out.
  bool accepted_early = false;
  double max_gradient_norm = 0.0;
  GameTranscript transcript;
  Multipliers multipliers;
};

// Cutting plane over X x Y for at most C_iter d log(54 d R / (eps r)) queries,
// d = n + m, then the multiplier-weighted average of the feasible queries.
// Stops early once the certificate is at most eps L r, or accept() holds, with
// feasible mass > 1/2.
SaddleResult solve_saddle(const SaddleProblem& prob, double eps, const VaidyaParams& params,
                          std::uint64_t seed);

}  // namespace cutplane
