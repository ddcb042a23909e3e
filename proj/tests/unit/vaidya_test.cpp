#include "doctest.h"

#include <cmath>

#include "cutplane/errors.hpp"
#include "cutplane/vaidya.hpp"
#include "test_util.hpp"

using namespace cutplane;

namespace {

VaidyaParams exact_params(int n) {
  VaidyaParams p = desk_vaidya_params(n);
  p.mode = LeverageMode::Exact;
  return p;
}

}  // namespace

TEST_SUITE("vaidya") {
  TEST_CASE("volumetric value of the unit box at the origin") {
    const int n = 3;
    Mat A(2 * n, n);
    A << Mat::Identity(n, n), -Mat::Identity(n, n);
    const Vec b = Vec::Constant(2 * n, -1.0);
    // A^T S^-2 A = 2 I, so F = (n/2) log 2.
    CHECK(volumetric_value(A, b, Vec::Zero(n)) == doctest::Approx(0.5 * n * std::log(2.0)));
    CHECK_THROWS_AS(volumetric_value(A, b, Vec::Constant(n, 2.0)), DomainError);
  }

  TEST_CASE("slack stability bound") {
    const Vec s = Vec::Ones(4);
    CHECK(check_slack_stability(s, s * 1.004, 0.01));
    CHECK_FALSE(check_slack_stability(s, s * 1.01, 0.01));
    Vec neg = s;
    neg[2] = -1.0;
    CHECK_FALSE(check_slack_stability(s, neg, 0.01));
    CHECK_THROWS_AS(check_slack_stability(s, Vec::Ones(3), 0.01), ArgumentError);
  }

  TEST_CASE("Newton direction vanishes at the center of a symmetric box") {
    Mat A(4, 2);
    A << 1, 0, 0, 1, -1, 0, 0, -1;
    const Vec s = Vec::Ones(4);
    const NewtonDirection nd = newton_direction(A, s, Vec::Constant(4, 0.5));
    CHECK(nd.d.norm() < 1e-15);
    CHECK(nd.gap < 1e-30);
    // Off center the step moves toward it.
    const Vec b = Vec::Constant(4, -1.0);
    const Vec z = Vec::Constant(2, 0.5);
    const Vec z1 = newton_step(A, b, z, leverage_scores_exact(A, (A * z - b).array().square().inverse().matrix()), 0.5);
    CHECK(z1.norm() < z.norm());
  }

  TEST_CASE("cuts, drops and row tags") {
    PolytopeState P(2, 1.0, exact_params(2));
    CHECK(P.rows() == 4);
    CHECK(P.box_rows() == 4);
    Vec a(2);
    a << 1.0, 0.0;
    const double slack = P.add_cut(a, 0.0, 10);
    CHECK(slack > 0.0);
    CHECK(P.rows() == 5);
    CHECK(P.row_ids() == std::vector<long>{10});
    CHECK(P.slacks().minCoeff() > 0.0);
    // The new row gets the target leverage.
    const Vec s = P.slacks();
    const Vec lev = leverage_scores_exact(P.A(), s.array().square().inverse().matrix());
    const double target = 0.5 * std::sqrt(P.params().delta * P.params().c1);
    CHECK(lev[4] == doctest::Approx(target).epsilon(1e-6));
    CHECK_THROWS_AS(P.drop_cut(0), ArgumentError);
    P.add_cut(Vec::Unit(2, 1), 0.0, 11);
    P.drop_cut(4);
    CHECK(P.row_ids() == std::vector<long>{11});
  }

  TEST_CASE("separators that miss the center are rejected") {
    PolytopeState P(2, 1.0, exact_params(2));
    // K lies in {a^T y <= b}; a^T z = 0 < 0.5 means the center is not cut.
    CHECK_THROWS_AS(P.add_cut(Vec::Unit(2, 0), 0.5), ProtocolError);
    CHECK_NOTHROW(P.add_cut(Vec::Unit(2, 0), -0.5));
    CHECK_THROWS_AS(P.add_cut(Vec::Zero(2), 0.0), ProtocolError);
    CHECK_THROWS_AS(P.add_cut(Vec::Ones(3), 0.0), ProtocolError);
  }

  TEST_CASE("recentering lowers the gap proxy below c2") {
    PolytopeState P(2, 1.0, exact_params(2));
    // Each cut enters at a small target leverage, so the gap stays below c2
    // for a while; stacked cuts on one side must eventually move the center.
    int cuts = 0;
    while (P.z()[0] == 0.0 && cuts < 400) {
      P.add_cut(Vec::Unit(2, 0), P.z()[0]);
      ++cuts;
      P.recenter();
      const NewtonDirection nd = newton_direction(P.A(), P.slacks(), P.sigma());
      REQUIRE(nd.gap <= P.params().c2);
    }
    CHECK(P.z()[0] < 0.0);
    CHECK(cuts > 1);
  }

  TEST_CASE("finds a small ball") {
    Vec c(2);
    c << 0.4, -0.3;
    BallOracle ball(c, 0.05);
    std::vector<TraceRow> rows;
    const FeasibilityResult r = run_feasibility(ball, 1.0, 1e-3, exact_params(2),
                                                [&](const TraceRow& row) { rows.push_back(row); });
    REQUIRE(r.found());
    CHECK((std::get<FoundPoint>(r.outcome).x - c).norm() <= 0.05);
    CHECK(r.oracle_calls <= r.budget);
    CHECK(static_cast<long>(rows.size()) == r.iterations);
    CHECK(rows.back().oracle_calls == r.oracle_calls);
    CHECK(std::isnan(rows.back().drift));
  }

  TEST_CASE("halfspace oracle and a found point inside") {
    Mat G(3, 2);
    G << 1, 1, -1, 0, 0, -1;
    const Vec h = Vec::Constant(3, 0.4);
    HalfspaceOracle K(G, h);
    const FeasibilityResult r = run_feasibility(K, 1.0, 1e-3, exact_params(2));
    REQUIRE(r.found());
    CHECK((G * std::get<FoundPoint>(r.outcome).x - h).maxCoeff() <= 0.0);
  }

  TEST_CASE("empty set exhausts the budget") {
    EmptySetOracle empty(2);
    VaidyaParams p = exact_params(2);
    p.max_oracle_calls = 40;
    const FeasibilityResult r = run_feasibility(empty, 1.0, 1e-3, p);
    CHECK_FALSE(r.found());
    CHECK(r.oracle_calls == 40);
    CHECK(std::get<NoBall>(r.outcome).eps == 1e-3);
  }

  TEST_CASE("layered mode is reproducible under a seed") {
    BallOracle ball(Vec::Constant(2, 0.3), 0.05);
    VaidyaParams p = desk_vaidya_params(2);
    p.layers.seed = 4;
    const FeasibilityResult a = run_feasibility(ball, 1.0, 1e-3, p);
    const FeasibilityResult b = run_feasibility(ball, 1.0, 1e-3, p);
    REQUIRE(a.found());
    CHECK(a.oracle_calls == b.oracle_calls);
    CHECK(std::get<FoundPoint>(a.outcome).x == std::get<FoundPoint>(b.outcome).x);
  }

  TEST_CASE("drive stops when the rule says so") {
    PolytopeState P(2, 1.0, exact_params(2));
    int seen = 0;
    const DriveStats st = drive(P, 100, [&](const Vec& z) -> std::optional<Cut> {
      if (++seen == 3) return std::nullopt;
      return Cut{Vec::Unit(2, 0), z[0]};
    });
    CHECK(st.stopped);
    CHECK(st.oracle_calls == 3);
  }

  TEST_CASE("budget and parameter checks") {
    VaidyaParams p = desk_vaidya_params(4);
    CHECK(iteration_budget(p, 4, 1.0, 1e-3) ==
          static_cast<long>(std::ceil(240.0 * 4 * std::log(4000.0))));
    p.max_oracle_calls = 7;
    CHECK(iteration_budget(p, 4, 1.0, 1e-3) == 7);
    VaidyaParams bad;
    bad.c1 = -1.0;
    CHECK_THROWS_AS(bad.validate(), ArgumentError);
    bad = VaidyaParams{};
    bad.damping = 1.5;
    CHECK_THROWS_AS(bad.validate(), ArgumentError);
    CHECK_THROWS_AS(BallOracle(Vec::Zero(2), 0.0), ArgumentError);
    CHECK_THROWS_AS(PolytopeState(0, 1.0, VaidyaParams{}), ArgumentError);
  }
}
