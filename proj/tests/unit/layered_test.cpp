#include "doctest.h"

#include <cmath>

#include "cutplane/errors.hpp"
#include "cutplane/layered.hpp"
#include "test_util.hpp"

using namespace cutplane;

namespace {

LayerParams small_layers() {
  LayerParams p = desk_profile(3);
  p.T_inn = 2;
  p.T_mid = 2;
  p.T_out = 2;
  p.seed = 5;
  return p;
}

}  // namespace

TEST_SUITE("layered") {
  TEST_CASE("cascade counters and restart") {
    testutil::Rng g(61);
    const Mat A = g.matrix(30, 3);
    Vec w = g.weights(30, 0.3);
    LayeredMaintainer lm(A, w, small_layers());
    const Cascade expected[] = {Cascade::Inner, Cascade::Middle, Cascade::Inner, Cascade::Outer,
                                Cascade::Inner, Cascade::Middle, Cascade::Inner, Cascade::Restart};
    for (Cascade c : expected) {
      w = testutil::log_step(g, w, 0.005);
      CHECK(lm.update(WeightUpdate{w}) == c);
    }
    CHECK(lm.restarts() == 1);
    CHECK(lm.ctr_inn() == 0);
    CHECK(lm.acts_mid().empty());
    CHECK(lm.acts_out().empty());
    CHECK((lm.query() - leverage_scores_exact(A, w)).norm() < 1e-12);
  }

  TEST_CASE("buffers hold the actions not yet consumed") {
    testutil::Rng g(62);
    const Mat A = g.matrix(20, 3);
    Vec w = Vec::Ones(20);
    LayeredMaintainer lm(A, w, small_layers());
    w = testutil::log_step(g, w, 0.005);
    lm.update(WeightUpdate{w});
    CHECK(lm.acts_mid().size() == 1);
    CHECK(lm.acts_out().size() == 1);
    w = testutil::log_step(g, w, 0.005);
    lm.update(WeightUpdate{w});
    CHECK(lm.acts_mid().empty());
    CHECK(lm.acts_out().size() == 2);
    CHECK(lm.middle().A() == lm.inner().A());
  }

  TEST_CASE("mixed stream stays close to exact") {
    testutil::Rng g(63);
    Mat A;
    Vec w;
    testutil::mixed_instance(g, 40, 4, A, w);
    LayerParams p = desk_profile(4);
    p.seed = 9;
    LayeredMaintainer lm(A, w, p);
    double worst = 0.0;
    for (int k = 0; k < 40; ++k) {
      const UpdateAction act = testutil::small_action(g, lm.A(), lm.w());
      lm.update(act);
      worst = std::max(worst, (lm.query() - leverage_scores_exact(lm.A(), lm.w())).norm());
    }
    CHECK(worst <= 0.1);
  }

  TEST_CASE("oversized actions are rejected without changing state") {
    testutil::Rng g(64);
    const Mat A = g.matrix(20, 3);
    const Vec w = Vec::Ones(20);
    LayeredMaintainer lm(A, w, small_layers());
    CHECK_THROWS_AS(lm.update(WeightUpdate{w * 2.0}), AssumptionViolation);
    CHECK(lm.ctr_inn() == 0);
    CHECK(lm.acts_mid().empty());
    CHECK(lm.w() == w);
  }

  TEST_CASE("profiles and parameter checks") {
    CHECK(desk_profile(16).r_out == 8);
    CHECK(desk_profile(1 << 14).r_out == static_cast<int>(std::ceil(std::pow(16384.0, 0.31))));
    const LayerParams a = asymptotic_profile(1000);
    CHECK(a.eps_out <= a.eps_mid);
    CHECK(a.eps_mid <= a.eps_inn);
    CHECK_NOTHROW(a.validate());
    LayerParams bad;
    bad.eps_out = 0.1;
    CHECK_THROWS_AS(bad.validate(), ArgumentError);
    LayerParams caps;
    caps.T_inn = 100;
    CHECK_THROWS_AS(LayeredMaintainer(Mat::Identity(3, 2), Vec::Ones(3), caps), ArgumentError);
  }
}
