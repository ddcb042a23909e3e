#include "doctest.h"

#include <cmath>

#include "cutplane/batched.hpp"
#include "cutplane/errors.hpp"
#include "test_util.hpp"

using namespace cutplane;

namespace {

// The l-infinity and l2 distances between log v and log w after T actions.
void check_log_bounds(const BatchResult& r, int T, double eta) {
  const Vec gap = (r.v.array().log() - r.w.array().log()).matrix();
  CHECK(gap.cwiseAbs().maxCoeff() <= T * -std::log1p(-eta) + 1e-12);
  CHECK(gap.norm() <= 0.01 * T + 1e-12);
}

}  // namespace

TEST_SUITE("batched") {
  TEST_CASE("monotone delta matches exact recomputation") {
    testutil::Rng g(41);
    const Mat A = g.matrix(15, 4);
    const Vec w = g.weights(15, 0.3);
    Vec up = w;
    up[2] *= 1.5;
    up[7] *= 1.1;
    up[11] *= 3.0;
    const Vec exact = leverage_scores_exact(A, up) - leverage_scores_exact(A, w);
    const ApproxInverse U{GramFactor(A, w).inverse(), 0.0}, Un{GramFactor(A, up).inverse(), 0.0};
    CHECK((monotone_lowrank_delta(A, w, up, U, Un, 1e-9) - exact).norm() < 1e-9);
    CHECK((monotone_lowrank_delta(A, up, w, Un, U, 1e-9) + exact).norm() < 1e-9);

    // Approximate inverses at nearby weights are refined to the target.
    const Vec wv = w * 1.01, upv = up * 0.995;
    const ApproxInverse Ua{GramFactor(A, wv).inverse(), 0.02}, Una{GramFactor(A, upv).inverse(), 0.02};
    CHECK((monotone_lowrank_delta(A, w, up, Ua, Una, 1e-8) - exact).norm() < 1e-8);
  }

  TEST_CASE("monotone delta with more changed rows than columns") {
    testutil::Rng g(42);
    const Mat A = g.matrix(12, 3);
    const Vec w = g.weights(12, 0.3);
    const Vec up = w * 1.3;
    const ApproxInverse U{GramFactor(A, w).inverse(), 0.0}, Un{GramFactor(A, up).inverse(), 0.0};
    const Vec exact = leverage_scores_exact(A, up) - leverage_scores_exact(A, w);
    CHECK((monotone_lowrank_delta(A, w, up, U, Un, 1e-9) - exact).norm() < 1e-9);
  }

  TEST_CASE("monotone delta rejects mixed directions") {
    Mat B(3, 2);
    B << 1, 0, 0, 1, 1, 1;
    Vec w = Vec::Ones(3), w2 = w;
    w2[0] = 2.0;
    w2[1] = 0.5;
    const ApproxInverse U{GramFactor(B, w).inverse(), 0.0}, U2{GramFactor(B, w2).inverse(), 0.0};
    CHECK_THROWS_AS(monotone_lowrank_delta(B, w, w2, U, U2, 1e-8), ArgumentError);
    CHECK(monotone_lowrank_delta(B, w, w, U, U, 1e-8).norm() == 0.0);
  }

  TEST_CASE("three weight updates on 24x8") {
    testutil::Rng g(43);
    const Mat A = g.matrix(24, 8);
    const Vec w0 = g.weights(24, 0.3);
    ActionSequence acts;
    Vec w = w0;
    for (int t = 0; t < 3; ++t) {
      w = testutil::log_step(g, w, 0.01);
      acts.push_back(WeightUpdate{w});
    }
    BatchOptions opt;
    const BatchResult r = batched_update(A, w0, acts, opt);
    const Vec exact = leverage_scores_exact(A, r.v) - leverage_scores_exact(A, w0);
    CHECK((r.c() - exact).norm() <= 1e-8);
    CHECK(r.w == w);
    check_log_bounds(r, 3, opt.eta);
  }

  TEST_CASE("mixed sequences of inserts, deletes and weight moves") {
    testutil::Rng g(44);
    for (int trial = 0; trial < 15; ++trial) {
      Mat A;
      Vec w;
      testutil::mixed_instance(g, 24, 4, A, w);
      const int T = 1 + g.index(8);
      ActionSequence acts;
      Mat Ak = A;
      Vec wk = w;
      for (int t = 0; t < T; ++t) {
        acts.push_back(testutil::small_action(g, Ak, wk));
        apply_action(Ak, wk, acts.back());
      }
      BatchOptions opt;
      const BatchResult r = batched_update(A, w, acts, opt);
      REQUIRE(r.A == Ak);
      CHECK(r.w == wk);
      const Vec got = r.advance(leverage_scores_exact(A, w));
      CHECK((got - leverage_scores_exact(Ak, r.v)).norm() <= 1e-8);
      check_log_bounds(r, T, opt.eta);
    }
  }

  TEST_CASE("an insert followed by its delete cancels") {
    testutil::Rng g(45);
    const Mat A = g.matrix(10, 3);
    const Vec w = Vec::Ones(10);
    const Vec a = g.vector(3);
    const double tau = a.dot(GramFactor(A, w).solve(a));
    const BatchResult r = batched_update(A, w, {InsertRow{a, 0.005 / tau}, DeleteRow{10}});
    CHECK(r.A == A);
    CHECK(r.c().norm() < 1e-12);
    CHECK(r.c_universe.size() == 11);
  }

  TEST_CASE("assumption checks") {
    testutil::Rng g(46);
    const Mat A = g.matrix(10, 3);
    const Vec w = Vec::Ones(10);
    CHECK_THROWS_AS(batched_update(A, w, {WeightUpdate{w * 1.5}}), AssumptionViolation);
    CHECK_THROWS_AS(batched_update(A, w, {InsertRow{g.vector(3), 10.0}}), AssumptionViolation);
    CHECK_THROWS_AS(batched_update(A, w, {DeleteRow{0}}), AssumptionViolation);
    BatchOptions lax;
    lax.check_assumptions = false;
    const BatchResult r = batched_update(A, w, {WeightUpdate{w * 1.5}}, lax);
    CHECK((r.c() - (leverage_scores_exact(A, r.v) - leverage_scores_exact(A, w))).norm() < 1e-8);
    CHECK(default_phase_length(2) == 4);
    CHECK(default_phase_length(1000) == static_cast<int>(std::ceil(std::pow(std::log(1000.0), 3))));
  }
}
