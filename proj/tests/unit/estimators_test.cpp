#include "doctest.h"

#include <cmath>

#include "cutplane/errors.hpp"
#include "cutplane/estimators.hpp"
#include "test_util.hpp"

using namespace cutplane;

TEST_SUITE("estimators") {
  TEST_CASE("simple estimator stays within a few eps of exact") {
    testutil::Rng g(51);
    Mat A;
    Vec w;
    testutil::mixed_instance(g, 32, 4, A, w);
    SimpleOptions opt;
    opt.eps = 1e-3;
    SimpleEstimator est(A, w, opt);
    Mat Ak = A;
    Vec wk = w;
    double worst = 0.0;
    for (int step = 0; step < 30; ++step) {
      const UpdateAction act = testutil::small_action(g, Ak, wk);
      apply_action(Ak, wk, act);
      est.update({act});
      REQUIRE(est.A() == Ak);
      worst = std::max(worst, (est.query() - leverage_scores_exact(Ak, wk)).norm());
    }
    CHECK(worst <= 5.0 * opt.eps);
  }

  TEST_CASE("update returns the change in the estimate") {
    testutil::Rng g(52);
    const Mat A = g.matrix(20, 3);
    const Vec w = g.weights(20, 0.3);
    SimpleEstimator est(A, w);
    const Vec before = est.query();
    const Vec w1 = testutil::log_step(g, w, 0.005);
    const Vec delta = est.update({WeightUpdate{w1}});
    CHECK((est.query() - before - delta).norm() < 1e-15);
    CHECK(est.update({}).norm() == 0.0);
  }

  TEST_CASE("refine replaces the estimate and checks its length") {
    testutil::Rng g(53);
    const Mat A = g.matrix(10, 2);
    SimpleEstimator est(A, Vec::Ones(10));
    est.refine(Vec::Constant(10, 0.2));
    CHECK(est.query() == Vec::Constant(10, 0.2));
    CHECK_THROWS_AS(est.refine(Vec::Ones(3)), ArgumentError);
  }

  TEST_CASE("unsketched path quadrature reproduces the exact change") {
    testutil::Rng g(54);
    // eta 0.3 drops every weight change from the batched part, so the path
    // terms carry the whole step.
    for (int trial = 0; trial < 8; ++trial) {
      const Mat A = g.matrix(8, 3);
      Vec w = g.weights(8, 0.3);
      ComplicatedOptions opt;
      opt.sketch = false;
      opt.N = 12;
      opt.eps = 0.02;
      opt.batch.check_assumptions = false;
      opt.batch.eta = trial % 2 == 0 ? 0.0 : 0.3;
      ComplicatedEstimator est(A, w, opt);
      for (int step = 0; step < 3; ++step) {
        w = testutil::log_step(g, w, 0.05);
        est.update({WeightUpdate{w}});
        CHECK((est.query() - leverage_scores_exact(A, w)).norm() < 1e-6);
      }
    }
  }

  TEST_CASE("sketched estimator is reproducible under its seed") {
    testutil::Rng g(55);
    const Mat A = g.matrix(16, 3);
    const Vec w = g.weights(16, 0.3);
    const Vec w1 = testutil::log_step(g, w, 0.01);
    ComplicatedOptions opt;
    opt.eps = 0.002;
    opt.r = 4;
    opt.N = 3;
    opt.seed = 77;
    ComplicatedEstimator a(A, w, opt), b(A, w, opt);
    opt.seed = 78;
    ComplicatedEstimator c(A, w, opt);
    a.update({WeightUpdate{w1}});
    b.update({WeightUpdate{w1}});
    c.update({WeightUpdate{w1}});
    CHECK(a.query() == b.query());
    CHECK(a.update_count() == 1);
    CHECK((a.query() - leverage_scores_exact(A, w1)).norm() < 1e-2);
    CHECK((c.query() - leverage_scores_exact(A, w1)).norm() < 1e-2);
  }

  TEST_CASE("structural replay keeps the projection rows aligned") {
    testutil::Rng g(56);
    const Mat A = g.matrix(12, 3);
    ProjectionState pm(A, Vec::Ones(12), 0.01);
    replay_structure(pm, {InsertRow{g.vector(3), 0.1}, DeleteRow{2}, WeightUpdate{Vec::Ones(12)}});
    CHECK(pm.rows() == 12);
    CHECK(pm.A().row(2) == A.row(3));
  }

  TEST_CASE("bad options") {
    ComplicatedOptions opt;
    opt.r = 0;
    CHECK_THROWS_AS(ComplicatedEstimator(Mat::Identity(3, 2), Vec::Ones(3), opt), ArgumentError);
    opt.r = 2;
    opt.N = 0;
    CHECK_THROWS_AS(ComplicatedEstimator(Mat::Identity(3, 2), Vec::Ones(3), opt), ArgumentError);
  }
}
