#include "cutplane/io.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

namespace cutplane::io {

namespace {

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
  return j.at(key);
}

int integer(const json& j, const char* what) {
  const double v = number(j, what);
  if (v != std::round(v) || std::abs(v) > 1e9) throw ParseError(std::string(what) + " must be an integer");
  return static_cast<int>(v);
}

void check_keys(const json& j, const std::set<std::string>& allowed, const char* what) {
  if (!j.is_object()) throw ParseError(std::string(what) + " must be a JSON object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ParseError(std::string("unknown key '") + k + "' in " + what);
}

void check_header(const json& j, const char* type) {
  if (!j.is_object()) throw ParseError("instance must be a JSON object");
  if (integer(field(j, "schema_version"), "schema_version") != kSchemaVersion)
    throw ParseError("unsupported schema_version");
  if (!field(j, "type").is_string() || field(j, "type").get<std::string>() != type)
    throw ParseError(std::string("instance type must be '") + type + "'");
}

void check_box(const Vec& lo, const Vec& hi, const char* what) {
  if (lo.size() != hi.size() || lo.size() == 0) throw ParseError(std::string(what) + ": bounds differ in length");
  if (!((hi - lo).minCoeff() > 0.0)) throw ParseError(std::string(what) + ": empty box");
}

}  // namespace

LogLevel log_level() {
  const char* v = std::getenv("CUTPLANE_LOG");
  if (!v) return LogLevel::Info;
  const std::string s(v);
  if (s == "quiet" || s == "0") return LogLevel::Quiet;
  if (s == "debug" || s == "2") return LogLevel::Debug;
  return LogLevel::Info;
}

void log(LogLevel level, const std::string& msg) {
  if (static_cast<int>(level) > static_cast<int>(log_level())) return;
  std::fprintf(stderr, "cutplane: %s\n", msg.c_str());
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << j.dump(2) << '\n';
}

double number(const json& j, const char* what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size() || s.empty())
      throw ParseError(std::string(what) + ": '" + s + "' is not a decimal number");
    if (!std::isfinite(v)) throw ParseError(std::string(what) + " must be finite");
    return v;
  }
  throw ParseError(std::string(what) + " must be a number or a decimal string");
}

Vec vector_of(const json& j, const char* what) {
  if (!j.is_array()) throw ParseError(std::string(what) + " must be an array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(j[i], what);
  return v;
}

Mat matrix_of(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw ParseError(std::string(what) + " must be a non-empty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Mat A(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols || cols == 0)
      throw ParseError(std::string(what) + " rows must have equal positive length");
    A.row(static_cast<Eigen::Index>(i)) = vector_of(j[i], what).transpose();
  }
  return A;
}

json to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json to_json(const Mat& A) {
  json a = json::array();
  for (Eigen::Index i = 0; i < A.rows(); ++i) a.push_back(to_json(Vec(A.row(i).transpose())));
  return a;
}

std::string format_double(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

RunConfig default_config(int dim) {
  RunConfig c;
  c.params = desk_vaidya_params(dim);
  return c;
}

RunConfig parse_config(const json& j, int dim) {
  check_keys(j, {"schema_version", "c1", "delta", "c2", "damping", "C_iter", "max_oracle_calls", "mode",
                 "audit", "layers", "eps", "alpha", "eps_eq", "eps_game"},
             "config");
  if (integer(field(j, "schema_version"), "schema_version") != kSchemaVersion)
    throw ParseError("unsupported config schema_version");
  RunConfig c = default_config(dim);
  VaidyaParams& p = c.params;
  if (j.contains("c1")) p.c1 = number(j["c1"], "c1");
  if (j.contains("delta")) p.delta = number(j["delta"], "delta");
  if (j.contains("c2")) p.c2 = number(j["c2"], "c2");
  if (j.contains("damping")) p.damping = number(j["damping"], "damping");
  if (j.contains("C_iter")) p.C_iter = number(j["C_iter"], "C_iter");
  if (j.contains("max_oracle_calls")) p.max_oracle_calls = integer(j["max_oracle_calls"], "max_oracle_calls");
  if (j.contains("audit")) {
    if (!j["audit"].is_boolean()) throw ParseError("audit must be true or false");
    p.audit = j["audit"].get<bool>();
  }
  if (j.contains("mode")) {
    const std::string m = j["mode"].is_string() ? j["mode"].get<std::string>() : "";
    if (m == "exact")
      p.mode = LeverageMode::Exact;
    else if (m == "layered")
      p.mode = LeverageMode::Layered;
    else
      throw ParseError("mode must be 'exact' or 'layered'");
  }
  if (j.contains("layers")) {
    const json& l = j["layers"];
    check_keys(l, {"T_inn", "T_mid", "T_out", "eps_inn", "eps_mid", "eps_out", "r_out", "N", "eta", "phase_length"},
               "layers");
    LayerParams& L = p.layers;
    if (l.contains("T_inn")) L.T_inn = integer(l["T_inn"], "T_inn");
    if (l.contains("T_mid")) L.T_mid = integer(l["T_mid"], "T_mid");
    if (l.contains("T_out")) L.T_out = integer(l["T_out"], "T_out");
    if (l.contains("eps_inn")) L.eps_inn = number(l["eps_inn"], "eps_inn");
    if (l.contains("eps_mid")) L.eps_mid = number(l["eps_mid"], "eps_mid");
    if (l.contains("eps_out")) L.eps_out = number(l["eps_out"], "eps_out");
    if (l.contains("r_out")) L.r_out = integer(l["r_out"], "r_out");
    if (l.contains("N")) L.N = integer(l["N"], "N");
    if (l.contains("eta")) L.eta = number(l["eta"], "eta");
    if (l.contains("phase_length")) L.phase_length = integer(l["phase_length"], "phase_length");
    if (L.T_inn * L.T_mid > L.limits.max_actions) L.limits.max_actions = L.T_inn * L.T_mid;
  }
  if (j.contains("eps")) c.eps = number(j["eps"], "eps");
  if (j.contains("alpha")) c.alpha = number(j["alpha"], "alpha");
  if (j.contains("eps_eq")) c.eps_eq = number(j["eps_eq"], "eps_eq");
  if (j.contains("eps_game")) c.eps_game = number(j["eps_game"], "eps_game");
  c.params_set = true;
  try {
    p.validate();
  } catch (const ArgumentError& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  if (!(c.eps > 0.0) || c.eps > 0.5) throw ParseError("config: eps must lie in (0, 1/2]");
  if (!(c.alpha > 0.0) || !(c.alpha < 1.0)) throw ParseError("config: alpha must lie in (0, 1)");
  if (!(c.eps_eq > 0.0) || !(c.eps_game > 0.0) || c.eps_game > 0.5)
    throw ParseError("config: eps_eq must be positive and eps_game must lie in (0, 1/2]");
  return c;
}

FeasibilityInstance parse_feasibility(const json& j) {
  check_header(j, "feasibility");
  check_keys(j, {"schema_version", "type", "n", "R", "eps", "oracle"}, "feasibility instance");
  FeasibilityInstance in;
  in.n = integer(field(j, "n"), "n");
  in.R = number(field(j, "R"), "R");
  in.eps = number(field(j, "eps"), "eps");
  if (in.n < 1 || !(in.R > 0.0) || !(in.eps > 0.0)) throw ParseError("feasibility: n, R, eps must be positive");
  const json& o = field(j, "oracle");
  if (!field(o, "kind").is_string()) throw ParseError("oracle kind must be a string");
  in.oracle = o["kind"].get<std::string>();
  if (in.oracle == "ball") {
    check_keys(o, {"kind", "center", "radius"}, "ball oracle");
    in.ball.center = vector_of(field(o, "center"), "center");
    in.ball.radius = number(field(o, "radius"), "radius");
    if (in.ball.center.size() != in.n || !(in.ball.radius > 0.0)) throw ParseError("ball oracle: bad center or radius");
  } else if (in.oracle == "halfspaces") {
    check_keys(o, {"kind", "G", "h"}, "halfspace oracle");
    in.G = matrix_of(field(o, "G"), "G");
    in.h = vector_of(field(o, "h"), "h");
    if (in.G.cols() != in.n || in.G.rows() != in.h.size()) throw ParseError("halfspace oracle: size mismatch");
  } else if (in.oracle == "empty") {
    check_keys(o, {"kind"}, "empty oracle");
  } else {
    throw ParseError("oracle kind must be ball, halfspaces or empty");
  }
  return in;
}

double SaddleInstance::value(const Vec& x, const Vec& y) const {
  const Vec dx = x - a, dy = y - b;
  return dx.dot(C * dy) + 0.5 * rho_x * dx.squaredNorm() - 0.5 * rho_y * dy.squaredNorm();
}

Vec SaddleInstance::first_order(const Vec& x, const Vec& y) const {
  const Vec dx = x - a, dy = y - b;
  Vec g(n() + m());
  g << C * dy + rho_x * dx, -(C.transpose() * dx - rho_y * dy);
  return g;
}

double SaddleInstance::lipschitz() const {
  const double Dx = (x_hi - a).cwiseAbs().cwiseMax((x_lo - a).cwiseAbs()).norm();
  const double Dy = (y_hi - b).cwiseAbs().cwiseMax((y_lo - b).cwiseAbs()).norm();
  const double c = C.operatorNorm();
  const double gx = c * Dy + rho_x * Dx, gy = c * Dx + rho_y * Dy;
  return std::max(std::sqrt(gx * gx + gy * gy), 1e-12);
}

namespace {

// max over t in [lo, hi] of s t - rho/2 t^2, for t = coordinate minus shift.
double concave_max(double s, double rho, double lo, double hi) {
  auto q = [&](double t) { return s * t - 0.5 * rho * t * t; };
  double best = std::max(q(lo), q(hi));
  if (rho > 0.0) {
    const double t = std::clamp(s / rho, lo, hi);
    best = std::max(best, q(t));
  }
  return best;
}

}  // namespace

double SaddleInstance::duality_gap(const Vec& x, const Vec& y) const {
  // max_y: (x-a)^T C (y-b) - rho_y/2 |y-b|^2 + rho_x/2 |x-a|^2, coordinate by coordinate.
  const Vec dx = x - a, dy = y - b;
  double upper = 0.5 * rho_x * dx.squaredNorm();
  const Vec sy = C.transpose() * dx;
  for (int j = 0; j < m(); ++j) upper += concave_max(sy[j], rho_y, y_lo[j] - b[j], y_hi[j] - b[j]);
  // min_x: (x-a)^T C (y-b) + rho_x/2 |x-a|^2 - rho_y/2 |y-b|^2.
  double lower = -0.5 * rho_y * dy.squaredNorm();
  const Vec sx = C * dy;
  for (int i = 0; i < n(); ++i) lower -= concave_max(-sx[i], rho_x, x_lo[i] - a[i], x_hi[i] - a[i]);
  return upper - lower;
}

SaddleInstance parse_saddle(const json& j) {
  check_header(j, "saddle");
  check_keys(j, {"schema_version", "type", "C", "x_shift", "y_shift", "rho_x", "rho_y", "x_box", "y_box"},
             "saddle instance");
  SaddleInstance s;
  s.C = matrix_of(field(j, "C"), "C");
  s.a = j.contains("x_shift") ? vector_of(j["x_shift"], "x_shift") : Vec::Zero(s.n());
  s.b = j.contains("y_shift") ? vector_of(j["y_shift"], "y_shift") : Vec::Zero(s.m());
  s.rho_x = j.contains("rho_x") ? number(j["rho_x"], "rho_x") : 0.0;
  s.rho_y = j.contains("rho_y") ? number(j["rho_y"], "rho_y") : 0.0;
  const json& xb = field(j, "x_box");
  const json& yb = field(j, "y_box");
  s.x_lo = vector_of(field(xb, "lo"), "x_box.lo");
  s.x_hi = vector_of(field(xb, "hi"), "x_box.hi");
  s.y_lo = vector_of(field(yb, "lo"), "y_box.lo");
  s.y_hi = vector_of(field(yb, "hi"), "y_box.hi");
  check_box(s.x_lo, s.x_hi, "x_box");
  check_box(s.y_lo, s.y_hi, "y_box");
  if (s.a.size() != s.n() || s.x_lo.size() != s.n() || s.b.size() != s.m() || s.y_lo.size() != s.m())
    throw ParseError("saddle: dimensions disagree");
  if (s.rho_x < 0.0 || s.rho_y < 0.0) throw ParseError("saddle: rho_x and rho_y must be non-negative");
  return s;
}

SubgradientAnswer ConvexInstance::eval(const Vec& x) const {
  SubgradientAnswer a;
  if (kind == "quadratic") {
    a.value = (x - center).squaredNorm();
    a.g = 2.0 * (x - center);
  } else if (kind == "linear") {
    a.value = c.dot(x);
    a.g = c;
  } else {
    Eigen::Index i = 0;
    a.value = x.maxCoeff(&i);
    a.g = Vec::Zero(x.size());
    a.g[i] = 1.0;
  }
  return a;
}

double ConvexInstance::min_value() const {
  if (kind == "quadratic") return (center.cwiseMax(lo).cwiseMin(hi) - center).squaredNorm();
  if (kind == "linear") return c.cwiseProduct(lo).cwiseMin(c.cwiseProduct(hi)).sum();
  return lo.maxCoeff();
}

double ConvexInstance::max_value() const {
  if (kind == "quadratic") return (lo - center).cwiseAbs().cwiseMax((hi - center).cwiseAbs()).squaredNorm();
  if (kind == "linear") return c.cwiseProduct(lo).cwiseMax(c.cwiseProduct(hi)).sum();
  return hi.maxCoeff();
}

ConvexInstance parse_convex(const json& j) {
  check_header(j, "convex");
  check_keys(j, {"schema_version", "type", "objective", "box"}, "convex instance");
  ConvexInstance in;
  const json& b = field(j, "box");
  in.lo = vector_of(field(b, "lo"), "box.lo");
  in.hi = vector_of(field(b, "hi"), "box.hi");
  check_box(in.lo, in.hi, "box");
  const json& o = field(j, "objective");
  if (!field(o, "kind").is_string()) throw ParseError("objective kind must be a string");
  in.kind = o["kind"].get<std::string>();
  if (in.kind == "quadratic") {
    in.center = vector_of(field(o, "center"), "center");
    if (in.center.size() != in.n()) throw ParseError("quadratic center has the wrong length");
  } else if (in.kind == "linear") {
    in.c = vector_of(field(o, "c"), "c");
    if (in.c.size() != in.n()) throw ParseError("linear objective has the wrong length");
  } else if (in.kind != "max") {
    throw ParseError("objective kind must be quadratic, linear or max");
  }
  return in;
}

ExchangeMarket parse_market_ad(const json& j) {
  check_header(j, "market_ad");
  check_keys(j, {"schema_version", "type", "u"}, "market_ad instance");
  ExchangeMarket mk;
  mk.u = matrix_of(field(j, "u"), "u");
  try {
    mk.validate();
  } catch (const ArgumentError& e) {
    throw ParseError(e.what());
  }
  return mk;
}

FisherMarket parse_market_fisher(const json& j) {
  check_header(j, "market_fisher");
  check_keys(j, {"schema_version", "type", "buyers", "goods", "budgets", "segments"}, "market_fisher instance");
  FisherMarket mk;
  mk.buyers = integer(field(j, "buyers"), "buyers");
  mk.goods = integer(field(j, "goods"), "goods");
  mk.budgets = vector_of(field(j, "budgets"), "budgets");
  const json& segs = field(j, "segments");
  if (!segs.is_array()) throw ParseError("segments must be an array");
  for (const auto& s : segs) {
    check_keys(s, {"buyer", "good", "rate", "cap"}, "segment");
    mk.segments.push_back({integer(field(s, "buyer"), "buyer"), integer(field(s, "good"), "good"),
                           number(field(s, "rate"), "rate"), number(field(s, "cap"), "cap")});
  }
  try {
    mk.validate();
  } catch (const ArgumentError& e) {
    throw ParseError(e.what());
  }
  return mk;
}

BenchInstance parse_bench(const json& j) {
  check_header(j, "bench_leverage");
  check_keys(j, {"schema_version", "type", "n", "m", "K", "step"}, "bench instance");
  BenchInstance b;
  b.n = integer(field(j, "n"), "n");
  b.m = integer(field(j, "m"), "m");
  b.K = integer(field(j, "K"), "K");
  b.step = number(field(j, "step"), "step");
  if (b.n < 1 || b.m < b.n || b.K < 0 || !(b.step >= 0.0)) throw ParseError("bench: need 1 <= n <= m, K >= 0, step >= 0");
  return b;
}

json report_json(const FeasibilityResult& r) {
  json j;
  j["schema_version"] = kSchemaVersion;
  if (const auto* f = std::get_if<FoundPoint>(&r.outcome)) {
    j["outcome"] = "found";
    j["x"] = to_json(f->x);
  } else {
    const auto& nb = std::get<NoBall>(r.outcome);
    j["outcome"] = "no_ball";
    j["eps"] = nb.eps;
    j["final_F"] = nb.final_F;
  }
  j["oracle_calls"] = r.oracle_calls;
  j["iterations"] = r.iterations;
  j["newton_steps"] = r.newton_steps;
  j["budget"] = r.budget;
  j["max_constraints"] = r.max_constraints;
  return j;
}

json report_json(const EquilibriumReport& r) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["prices"] = to_json(r.prices);
  if (r.allocation.size() > 0) j["allocation"] = to_json(r.allocation);
  if (r.spending.size() > 0) j["spending"] = to_json(r.spending);
  j["residuals"] = {{"clearing", r.residuals.clearing}, {"budget", r.residuals.budget}, {"bang", r.residuals.bang}};
  j["objective"] = r.objective;
  j["certificate"] = r.certificate;
  j["oracle_calls"] = r.oracle_calls;
  j["ok"] = r.ok;
  return j;
}

TraceWriter::TraceWriter(const std::string& path) : f_(std::fopen(path.c_str(), "w")) {
  if (!f_) throw Error("cannot write " + path);
  std::fputs("iteration,oracle_calls,F,drift,wall,constraints\n", f_);
  std::fflush(f_);
}

TraceWriter::~TraceWriter() {
  if (f_) std::fclose(f_);
}

void TraceWriter::write(const TraceRow& row) {
  const std::string line = std::to_string(row.iteration) + ',' + std::to_string(row.oracle_calls) + ',' +
                           format_double(row.F) + ',' + format_double(row.drift) + ',' +
                           format_double(row.wall) + ',' + std::to_string(row.constraints) + '\n';
  std::fputs(line.c_str(), f_);
  std::fflush(f_);
}

namespace {

int cmd_feasibility(const json& inst, const RunConfig& cfg, const std::string& out) {
  const FeasibilityInstance in = parse_feasibility(inst);
  std::unique_ptr<SeparationOracle> oracle;
  if (in.oracle == "ball")
    oracle = std::make_unique<BallOracle>(in.ball.center, in.ball.radius);
  else if (in.oracle == "halfspaces")
    oracle = std::make_unique<HalfspaceOracle>(in.G, in.h);
  else
    oracle = std::make_unique<EmptySetOracle>(in.n);
  TraceWriter trace(out + "/trace.csv");
  const FeasibilityResult r =
      run_feasibility(*oracle, in.R, in.eps, cfg.params, [&](const TraceRow& row) { trace.write(row); });
  write_json_file(out + "/outcome.json", report_json(r));
  log(LogLevel::Info, std::string("feasibility: ") + (r.found() ? "found a point" : "no ball of radius eps") +
                          " after " + std::to_string(r.oracle_calls) + " oracle calls");
  return r.found() ? 0 : 2;
}

int cmd_saddle(const json& inst, const RunConfig& cfg, std::uint64_t seed, const std::string& out) {
  const SaddleInstance in = parse_saddle(inst);
  BoxOracle X(in.x_lo, in.x_hi), Y(in.y_lo, in.y_hi);
  SaddleProblem prob;
  prob.n = in.n();
  prob.m = in.m();
  prob.X = &X;
  prob.Y = &Y;
  prob.first_order = [&](const Vec& x, const Vec& y) { return in.first_order(x, y); };
  prob.L = in.lipschitz();
  Vec lo(prob.n + prob.m), hi(prob.n + prob.m);
  lo << in.x_lo, in.y_lo;
  hi << in.x_hi, in.y_hi;
  prob.center = 0.5 * (lo + hi);
  prob.R = 0.5 * (hi - lo).maxCoeff();
  prob.r = 0.5 * (hi - lo).minCoeff();
  const SaddleResult r = solve_saddle(prob, cfg.eps, cfg.params, seed);
  const double gap = in.duality_gap(r.x, r.y);
  const double bound = cfg.eps * prob.L * prob.r;
  json j;
  j["schema_version"] = kSchemaVersion;
  j["x"] = to_json(r.x);
  j["y"] = to_json(r.y);
  j["duality_gap"] = gap;
  j["gap_bound"] = bound;
  j["certificate"] = r.certificate;
  j["feasible_mass"] = r.feasible_mass;
  j["oracle_calls"] = r.oracle_calls;
  j["budget"] = r.budget;
  j["stationary"] = r.exact;
  j["certified_early"] = r.certified_early;
  j["ok"] = gap <= bound;
  write_json_file(out + "/report.json", j);
  log(LogLevel::Info, "saddle: duality gap " + format_double(gap) + " against bound " + format_double(bound));
  return gap <= bound ? 0 : 2;
}

int cmd_convex(const json& inst, const RunConfig& cfg, const std::string& out) {
  const ConvexInstance in = parse_convex(inst);
  FunctionOracle f(in.n(), [&](const Vec& x) { return in.eval(x); });
  BoxOracle S(in.lo, in.hi);
  const double R = std::max(in.lo.cwiseAbs().maxCoeff(), in.hi.cwiseAbs().maxCoeff());
  const ConvexResult r = minimize_convex(f, S, R, cfg.alpha, (in.hi - in.lo).minCoeff(), cfg.params);
  const double range = in.max_value() - in.min_value();
  const double excess = r.value - in.min_value();
  const bool ok = excess <= cfg.alpha * range;
  json j;
  j["schema_version"] = kSchemaVersion;
  j["x"] = to_json(r.x);
  j["value"] = r.value;
  j["min_value"] = in.min_value();
  j["range"] = range;
  j["excess"] = excess;
  j["oracle_calls"] = r.oracle_calls;
  j["budget"] = r.budget;
  j["ok"] = ok;
  write_json_file(out + "/report.json", j);
  log(LogLevel::Info, "convex: excess " + format_double(excess) + " against alpha * range " +
                          format_double(cfg.alpha * range));
  return ok ? 0 : 2;
}

MarketOptions market_options(const RunConfig& cfg, std::uint64_t seed) {
  MarketOptions o;
  o.eps_eq = cfg.eps_eq;
  o.eps_game = cfg.eps_game;
  o.params = cfg.params;
  o.seed = seed;
  return o;
}

int cmd_market(const EquilibriumReport& r, const std::string& out, const char* what) {
  write_json_file(out + "/report.json", report_json(r));
  log(LogLevel::Info, std::string(what) + ": largest residual " + format_double(r.residuals.max()));
  return r.ok ? 0 : 2;
}

int cmd_bench(const json& inst, const RunConfig& cfg, std::uint64_t seed, const std::string& out) {
  const BenchInstance b = parse_bench(inst);
  boost::random::mt19937_64 gen(seed);
  boost::random::normal_distribution<double> normal;
  Mat A(b.m, b.n);
  for (Eigen::Index j = 0; j < A.cols(); ++j)
    for (Eigen::Index i = 0; i < A.rows(); ++i) A(i, j) = normal(gen);
  Vec w = Vec::Ones(b.m);

  LayerParams lp = cfg.params.layers;
  lp.seed = seed;
  LayeredMaintainer layered(A, w, lp);
  SimpleOptions so;
  so.eps = lp.eps_inn;
  so.batch.eta = lp.eta;
  so.batch.phase_length = lp.phase_length;
  so.batch.limits = lp.limits;
  SimpleEstimator simple(A, w, so);

  std::ofstream csv(out + "/bench.csv"), timing(out + "/bench_timing.csv");
  if (!csv || !timing) throw Error("cannot write bench output in " + out);
  csv << "step,drift_simple,drift_layered\n" << std::flush;
  timing << "step,wall_exact,wall_simple,wall_layered\n" << std::flush;
  using clock = std::chrono::steady_clock;
  auto secs = [](clock::time_point a, clock::time_point z) { return std::chrono::duration<double>(z - a).count(); };
  for (int k = 1; k <= b.K; ++k) {
    Vec d(b.m);
    for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = normal(gen);
    if (d.norm() > 0.0) d *= b.step / d.norm();
    w = w.cwiseProduct(d.array().exp().matrix());
    const UpdateAction act = WeightUpdate{w};
    const auto t0 = clock::now();
    const Vec exact = leverage_scores_exact(A, w);
    const auto t1 = clock::now();
    simple.update({act});
    const auto t2 = clock::now();
    layered.update(act);
    const auto t3 = clock::now();
    csv << k << ',' << format_double((simple.query() - exact).norm()) << ','
        << format_double((layered.query() - exact).norm()) << '\n'
        << std::flush;
    timing << k << ',' << format_double(secs(t0, t1)) << ',' << format_double(secs(t1, t2)) << ','
           << format_double(secs(t2, t3)) << '\n'
           << std::flush;
  }
  log(LogLevel::Info, "bench_leverage: wrote " + std::to_string(b.K) + " steps");
  return 0;
}

int instance_dim(const json& inst, const std::string& command) {
  if (!inst.is_object()) throw ParseError("instance must be a JSON object");
  auto size_of = [&](const char* key) -> int {
    if (!inst.contains(key) || !inst[key].is_array()) return 1;
    return static_cast<int>(inst[key].size());
  };
  if (command == "feasibility" || command == "bench_leverage")
    return inst.contains("n") ? std::max(1, integer(inst["n"], "n")) : 1;
  if (command == "market_ad") return 4 * size_of("u");
  if (command == "market_fisher") {
    const int g = inst.contains("goods") ? integer(inst["goods"], "goods") : 1;
    const int b = inst.contains("buyers") ? integer(inst["buyers"], "buyers") : 1;
    return std::max(1, 2 * g + b);
  }
  if (command == "saddle" && inst.contains("C") && inst["C"].is_array() && !inst["C"].empty() &&
      inst["C"][0].is_array())
    return static_cast<int>(inst["C"].size() + inst["C"][0].size());
  if (command == "convex" && inst.contains("box") && inst["box"].is_object())
    return inst["box"].contains("lo") && inst["box"]["lo"].is_array() ? static_cast<int>(inst["box"]["lo"].size()) : 1;
  return 1;
}

}  // namespace

int run_command(const CommandArgs& args) {
  static const std::set<std::string> commands = {"feasibility", "saddle", "convex", "market_ad", "market_fisher",
                                                 "bench_leverage"};
  if (!commands.count(args.command)) throw ParseError("unknown command '" + args.command + "'");
  const json inst = read_json_file(args.instance);
  const int dim = instance_dim(inst, args.command);
  RunConfig cfg = args.config.empty() ? default_config(dim) : parse_config(read_json_file(args.config), dim);
  const bool randomized = cfg.params.mode == LeverageMode::Layered || args.command == "bench_leverage";
  if (randomized && !args.seed) throw ParseError("--seed is required for randomized runs");
  const std::uint64_t seed = args.seed.value_or(0);
  cfg.params.layers.seed = seed;
  std::filesystem::create_directories(args.out);
  log(LogLevel::Debug, "running " + args.command + " on " + args.instance);

  if (args.command == "feasibility") return cmd_feasibility(inst, cfg, args.out);
  if (args.command == "saddle") return cmd_saddle(inst, cfg, seed, args.out);
  if (args.command == "convex") return cmd_convex(inst, cfg, args.out);
  if (args.command == "market_ad")
    return cmd_market(solve_arrow_debreu(parse_market_ad(inst), market_options(cfg, seed)), args.out, "market_ad");
  if (args.command == "market_fisher")
    return cmd_market(solve_fisher(parse_market_fisher(inst), market_options(cfg, seed)), args.out,
                      "market_fisher");
  return cmd_bench(inst, cfg, seed, args.out);
}

}  // namespace cutplane::io
