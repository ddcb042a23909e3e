#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "cutplane/layered.hpp"
#include "cutplane/linalg.hpp"

namespace cutplane {

// Answer of a separation oracle: either x lies in K, or K is contained in
// {y : a^T y <= b} while a^T x >= b.
struct OracleAnswer {
  bool inside = false;
  Vec a;
  double b = 0.0;

  static OracleAnswer in() { return {true, Vec(), 0.0}; }
  static OracleAnswer cut(Vec a, double b) { return {false, std::move(a), b}; }
};

class SeparationOracle {
 public:
  virtual ~SeparationOracle() = default;
  virtual int dim() const = 0;
  virtual OracleAnswer query(const Vec& x) = 0;
};

class BallOracle : public SeparationOracle {
 public:
  BallOracle(Vec center, double radius);
  int dim() const override { return static_cast<int>(c_.size()); }
  OracleAnswer query(const Vec& x) override;
  const Vec& center() const { return c_; }
  double radius() const { return r_; }

 private:
  Vec c_;
  double r_;
};

// K = {x : G x <= h}.
class HalfspaceOracle : public SeparationOracle {
 public:
  HalfspaceOracle(Mat G, Vec h);
  int dim() const override { return static_cast<int>(G_.cols()); }
  OracleAnswer query(const Vec& x) override;

 private:
  Mat G_;
  Vec h_;
};

// Empty set: always answers with x_1 <= -2, which no point of the unit-box
// domain satisfies, so every query in the domain is cut.
class EmptySetOracle : public SeparationOracle {
 public:
  explicit EmptySetOracle(int n) : n_(n) {}
  int dim() const override { return n_; }
  OracleAnswer query(const Vec& x) override;

 private:
  int n_;
};

enum class LeverageMode { Layered, Exact };

struct VaidyaParams {
  double c1 = 1e-4;
  double delta = 0.1;
  double c2 = 1e-3;
  double damping = 0.1;
  int max_halvings = 6;
  // Bound on ||log s_new - log s||_2 for one Newton step; the weights are s^{-2}.
  double max_log_slack_step = 0.005;
  int max_newton_steps = 200;
  double C_iter = 40.0;
  // Overrides the C_iter budget when positive.
  long max_oracle_calls = 0;
  int search_iterations = 60;
  LeverageMode mode = LeverageMode::Layered;
  LayerParams layers;
  bool audit = false;

  void validate() const;
};

// Constants used by the acceptance suite and the CLI at desk scale.
VaidyaParams desk_vaidya_params(int n);

struct TraceRow {
  long iteration = 0;
  long oracle_calls = 0;
  double F = 0.0;
  double drift = 0.0;  // NaN unless auditing
  double wall = 0.0;
  int constraints = 0;
};

struct FoundPoint {
  Vec x;
};

struct NoBall {
  double eps = 0.0;
  double final_F = 0.0;
};

struct FeasibilityResult {
  std::variant<FoundPoint, NoBall> outcome;
  long oracle_calls = 0;
  long iterations = 0;
  long newton_steps = 0;
  long budget = 0;
  int max_constraints = 0;

  bool found() const { return std::holds_alternative<FoundPoint>(outcome); }
};

// F(x) = 0.5 log det(A^T S_x^{-2} A) for the polytope {x : A x >= b}.
double volumetric_value(const Mat& A, const Vec& b, const Vec& x);

// ||log s_new - log s||_2 <= bound.
bool check_slack_stability(const Vec& s, const Vec& s_new, double bound = 0.01);

struct NewtonDirection {
  Vec d;       // Q^{-1} A^T (sigma / s); the step is z + damping * d
  double gap;  // 0.5 g^T Q^{-1} g
};

NewtonDirection newton_direction(const Mat& A, const Vec& s, const Vec& sigma);

// z - damping * Q(z)^{-1} grad F(z) with Q built from the supplied leverage estimate.
Vec newton_step(const Mat& A, const Vec& b, const Vec& z, const Vec& sigma, double damping = 0.1);

// Polytope {x : A x >= b} starting from the box [-R, R]^n with the maintained
// volumetric center. The first 2n rows are the box and are never dropped.
class PolytopeState {
 public:
  PolytopeState(int n, double R, const VaidyaParams& params);

  int dim() const { return static_cast<int>(A_.cols()); }
  int rows() const { return static_cast<int>(A_.rows()); }
  int box_rows() const { return 2 * dim(); }
  const Mat& A() const { return A_; }
  const Vec& b() const { return b_; }
  const Vec& z() const { return z_; }
  Vec slacks() const { return A_ * z_ - b_; }
  const Vec& sigma() const;
  double F() const { return volumetric_value(A_, b_, z_); }
  const VaidyaParams& params() const { return params_; }

  // Newton steps until the gap proxy is at most c2. Returns the number of steps.
  int recenter();
  // Index of a non-box row with estimate below c1, if any (the smallest one).
  std::optional<int> drop_candidate() const;
  void drop_cut(int i);
  // Adds a row from a separator of the current center; returns the row's slack.
  // id tags the row so callers can follow it through later drops.
  double add_cut(const Vec& a, double b_sep, long id = -1);
  // Tags of the non-box rows, in row order.
  const std::vector<long>& row_ids() const { return ids_; }

  long newton_steps() const { return newton_steps_; }
  double drift() const;

 private:
  void apply(const UpdateAction& act);

  VaidyaParams params_;
  Mat A_;
  Vec b_, z_;
  std::vector<long> ids_;
  std::unique_ptr<LayeredMaintainer> layered_;
  Vec exact_sigma_;
  long newton_steps_ = 0;
};

using TraceCallback = std::function<void(const TraceRow&)>;

// Halfspace {y : a^T y <= b} returned by a cut rule.
struct Cut {
  Vec a;
  double b = 0.0;
};

// Maps the current center to a cut, or to nullopt to stop.
using CutRule = std::function<std::optional<Cut>(const Vec& z)>;

struct DriveStats {
  long oracle_calls = 0;
  long iterations = 0;
  bool stopped = false;  // the rule asked to stop before the budget ran out
};

// Recenter, drop, query, cut until the rule stops or budget queries are spent.
// on_step runs after every drop and every query.
DriveStats drive(PolytopeState& P, long budget, const CutRule& rule,
                 const std::function<void(const DriveStats&)>& on_step = {});

long iteration_budget(const VaidyaParams& p, int n, double R, double eps);

FeasibilityResult run_feasibility(SeparationOracle& oracle, double R, double eps,
                                  const VaidyaParams& params, const TraceCallback& trace = {});

}  // namespace cutplane
