#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

#include "json.hpp"

#include "cutplane/convex.hpp"
#include "cutplane/errors.hpp"
#include "cutplane/markets.hpp"

namespace cutplane::io {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// Malformed instance or config.
struct ParseError : Error {
  using Error::Error;
};

enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };
// From CUTPLANE_LOG: quiet, info (default) or debug, or 0/1/2.
LogLevel log_level();
void log(LogLevel level, const std::string& msg);

json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);

// Numbers may be given as JSON numbers or as decimal strings.
double number(const json& j, const char* what);
Vec vector_of(const json& j, const char* what);
Mat matrix_of(const json& j, const char* what);
json to_json(const Vec& v);
json to_json(const Mat& A);

// Shortest round-trip decimal, independent of the C locale.
std::string format_double(double x);

// Solver settings read from --config. Absent keys keep the desk defaults.
struct RunConfig {
  VaidyaParams params;
  bool params_set = false;
  double eps = 0.05;    // saddle accuracy
  double alpha = 0.01;  // convex range fraction
  double eps_eq = 1e-2;
  double eps_game = 1e-2;
};
RunConfig parse_config(const json& j, int dim);
RunConfig default_config(int dim);

struct BallSpec {
  Vec center;
  double radius = 0.0;
};
struct FeasibilityInstance {
  int n = 0;
  double R = 1.0, eps = 1e-3;
  std::string oracle;  // ball, halfspaces, empty
  BallSpec ball;
  Mat G;
  Vec h;
};
FeasibilityInstance parse_feasibility(const json& j);

// f(x, y) = (x - a)^T C (y - b) + rho_x/2 |x - a|^2 - rho_y/2 |y - b|^2 on boxes.
struct SaddleInstance {
  Mat C;
  Vec a, b;
  double rho_x = 0.0, rho_y = 0.0;
  Vec x_lo, x_hi, y_lo, y_hi;

  int n() const { return static_cast<int>(C.rows()); }
  int m() const { return static_cast<int>(C.cols()); }
  double value(const Vec& x, const Vec& y) const;
  Vec first_order(const Vec& x, const Vec& y) const;
  double lipschitz() const;
  // max_y f(x, y) - min_x f(x, y), exact since f separates by coordinate.
  double duality_gap(const Vec& x, const Vec& y) const;
};
SaddleInstance parse_saddle(const json& j);

struct ConvexInstance {
  std::string kind;  // quadratic, linear, max
  Vec center, c;
  Vec lo, hi;

  int n() const { return static_cast<int>(lo.size()); }
  SubgradientAnswer eval(const Vec& x) const;
  double min_value() const;
  double max_value() const;
};
ConvexInstance parse_convex(const json& j);

ExchangeMarket parse_market_ad(const json& j);
FisherMarket parse_market_fisher(const json& j);

struct BenchInstance {
  int n = 8, m = 64, K = 100;
  double step = 0.005;  // l2 norm of each log-weight step
};
BenchInstance parse_bench(const json& j);

json report_json(const FeasibilityResult& r);
json report_json(const EquilibriumReport& r);

// Per-iteration trace rows, flushed as they are written.
class TraceWriter {
 public:
  explicit TraceWriter(const std::string& path);
  ~TraceWriter();
  TraceWriter(const TraceWriter&) = delete;
  TraceWriter& operator=(const TraceWriter&) = delete;
  void write(const TraceRow& row);

 private:
  std::FILE* f_ = nullptr;
};

struct CommandArgs {
  std::string command, instance, config, out;
  std::optional<std::uint64_t> seed;
};

// Exit codes: 0 success, 2 solver-level failure (no ball, residuals too
// large), 1 errors (thrown).
int run_command(const CommandArgs& args);

}  // namespace cutplane::io
