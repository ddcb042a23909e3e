#include "doctest.h"

#include <cmath>

#include "cutplane/errors.hpp"
#include "cutplane/projection.hpp"
#include "test_util.hpp"

using namespace cutplane;

namespace {

bool sandwiched(const ProjectionState& pm) {
  for (int i = 0; i < pm.rows(); ++i) {
    const double w = pm.w()[i], v = pm.v()[i];
    if (w < (1.0 - pm.eps()) * v - 1e-15 || w > (1.0 + pm.eps()) * v + 1e-15) return false;
  }
  return true;
}

double inverse_error(const ProjectionState& pm) {
  const Mat M = pm.gram_v();
  return (pm.Minv() * M - Mat::Identity(M.rows(), M.cols())).norm();
}

}  // namespace

TEST_SUITE("projection") {
  TEST_CASE("small moves keep v and large moves replace it") {
    testutil::Rng g(31);
    const Mat A = g.matrix(20, 4);
    const Vec w = g.weights(20, 0.3);
    ProjectionState pm(A, w, 0.05);
    Vec w1 = w;
    w1[0] *= 1.01;
    pm.update(w1);
    CHECK(pm.last_drift_count() == 0);
    CHECK(pm.v() == w);
    w1[1] *= 1.2;
    pm.update(w1);
    CHECK(pm.last_drift_count() == 1);
    CHECK(pm.v()[1] == w1[1]);
    CHECK(pm.v()[0] == w[0]);
    CHECK(sandwiched(pm));
    CHECK(inverse_error(pm) < 1e-10);
  }

  TEST_CASE("random walk keeps the sandwich and the inverse") {
    testutil::Rng g(32);
    const Mat A = g.matrix(30, 5);
    Vec w = g.weights(30, 0.5);
    ProjectionState pm(A, w, 0.02);
    for (int step = 0; step < 200; ++step) {
      w = testutil::log_step(g, w, 0.05);
      pm.update(w);
      REQUIRE(sandwiched(pm));
    }
    CHECK(inverse_error(pm) < 1e-9);
    CHECK(pm.woodbury_count() > 0);
    CHECK(pm.refactor_count() > 1);
  }

  TEST_CASE("insert and remove track the inverse") {
    testutil::Rng g(33);
    const Mat A = g.matrix(10, 3);
    ProjectionState pm(A, g.weights(10, 0.3), 0.01);
    pm.insert(g.vector(3), 0.7);
    CHECK(pm.rows() == 11);
    CHECK(pm.w()[10] == 0.7);
    CHECK(inverse_error(pm) < 1e-10);
    pm.remove(4);
    pm.remove(0);
    CHECK(pm.rows() == 9);
    CHECK(inverse_error(pm) < 1e-10);
    CHECK(pm.A().row(0) == A.row(1));
    CHECK_THROWS_AS(pm.remove(9), ArgumentError);
    ProjectionState tiny(Mat::Identity(2, 2), Vec::Ones(2), 0.0);
    CHECK_THROWS_AS(tiny.remove(0), GeometryError);
  }

  TEST_CASE("tau and the squared projection match dense formulas") {
    testutil::Rng g(34);
    const Mat A = g.matrix(7, 3);
    const Vec w = g.weights(7, 0.3);
    const ProjectionState pm(A, w, 0.0);
    const Mat Q = A * (A.transpose() * w.asDiagonal() * A).inverse() * A.transpose();
    CHECK((pm.tau() - Q.diagonal()).norm() < 1e-12);
    CHECK((pm.q_matrix() - Q).norm() < 1e-12);
    const Vec d = g.vector(7);
    CHECK((pm.q2_apply(d) - Q.cwiseProduct(Q) * d).norm() < 1e-12);
  }

  TEST_CASE("bad tolerances") {
    CHECK_THROWS_AS(ProjectionState(Mat::Identity(2, 2), Vec::Ones(2), 1.0), ArgumentError);
    CHECK_THROWS_AS(ProjectionState(Mat::Identity(2, 2), Vec::Ones(2), -0.1), ArgumentError);
    CHECK_THROWS_AS(ProjectionState(Mat::Identity(2, 2), Vec::Zero(2), 0.1), ArgumentError);
  }
}
