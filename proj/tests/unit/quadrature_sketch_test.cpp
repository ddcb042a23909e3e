#include "doctest.h"

#include <cmath>
#include <set>

#include "cutplane/errors.hpp"
#include "cutplane/quadrature.hpp"
#include "cutplane/sketch.hpp"
#include "test_util.hpp"

using namespace cutplane;

TEST_SUITE("quadrature") {
  TEST_CASE("rule integrates monomials up to degree 2N-1 exactly") {
    for (int N = 1; N <= 12; ++N) {
      const QuadratureRule q = gauss_rule(N);
      REQUIRE(q.size() == N);
      double total = 0.0;
      for (int i = 0; i < N; ++i) {
        CHECK(q.nodes[i] > 0.0);
        CHECK(q.nodes[i] < 1.0);
        CHECK(q.weights[i] > 0.0);
        total += q.weights[i];
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
      for (int k = 0; k <= 2 * N - 1; ++k) {
        const double got = integrate_1d([k](double x) { return std::pow(x, k); }, q);
        CHECK(std::abs(got - 1.0 / (k + 1)) < 1e-12);
      }
    }
  }

  TEST_CASE("nodes are symmetric about one half") {
    const QuadratureRule q = gauss_rule(7);
    for (int i = 0; i < 7; ++i) {
      CHECK(q.nodes[i] + q.nodes[6 - i] == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(q.weights[i] == doctest::Approx(q.weights[6 - i]).epsilon(1e-12));
    }
    CHECK(q.nodes[3] == 0.5);
  }

  TEST_CASE("one-node rule is the midpoint") {
    const QuadratureRule q = gauss_rule(1);
    CHECK(q.nodes[0] == 0.5);
    CHECK(q.weights[0] == 1.0);
  }

  TEST_CASE("tensor rule on an exponential") {
    const QuadratureRule q = gauss_rule(5);
    const double got =
        integrate_tensor([](const std::vector<double>& x) { return std::exp(x[0] + x[1] + x[2]); }, 3, q);
    CHECK(std::abs(got - std::pow(std::exp(1.0) - 1.0, 3)) < 1e-10);
  }

  TEST_CASE("bad input") {
    CHECK_THROWS_AS(gauss_rule(0), ArgumentError);
    CHECK_THROWS_AS(integrate_tensor([](const std::vector<double>&) { return 1.0; }, 0, gauss_rule(2)),
                    ArgumentError);
    CHECK_THROWS_AS(integrate_1d([](double) { return std::nan(""); }, gauss_rule(2)), EvaluationError);
  }
}

TEST_SUITE("sketch") {
  TEST_CASE("same seed gives the same matrix") {
    const GaussianSketch a(4, 10, 99), b(4, 10, 99), c(4, 10, 100);
    CHECK(a.matrix() == b.matrix());
    CHECK(a.matrix() != c.matrix());
  }

  TEST_CASE("entries have variance 1/r") {
    const GaussianSketch R(50, 2000, 5);
    const double var = R.matrix().squaredNorm() / static_cast<double>(R.matrix().size());
    CHECK(var == doctest::Approx(1.0 / 50).epsilon(0.05));
    CHECK(std::abs(R.matrix().mean()) < 0.01);
  }

  TEST_CASE("sketched inner product is unbiased with variance at most 3/r |x|^2 |y|^2") {
    testutil::Rng g(21);
    const int m = 12, r = 4, trials = 4000;
    const Vec x = g.vector(m), y = g.vector(m);
    double sum = 0.0, sq = 0.0;
    for (int t = 0; t < trials; ++t) {
      const double v = sketched_inner(GaussianSketch(r, m, derive_seed(7, {std::uint64_t(t)})), x, y);
      sum += v;
      sq += v * v;
    }
    const double mean = sum / trials, var = sq / trials - mean * mean;
    const double bound = 3.0 / r * x.squaredNorm() * y.squaredNorm();
    CHECK(std::abs(mean - x.dot(y)) < 4.0 * std::sqrt(bound / trials));
    CHECK(var <= 1.3 * bound);
  }

  TEST_CASE("derived seeds differ across labels and masters") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t m = 0; m < 4; ++m)
      for (std::uint64_t a = 0; a < 8; ++a)
        for (std::uint64_t b = 0; b < 8; ++b) seen.insert(derive_seed(m, {a, b}));
    CHECK(seen.size() == 4u * 8u * 8u);
    CHECK(derive_seed(3, {1, 2}) != derive_seed(3, {2, 1}));
    CHECK(derive_seed(3, {1}) == derive_seed(3, {1}));
  }

  TEST_CASE("dimension checks") {
    CHECK_THROWS_AS(GaussianSketch(0, 3, 1), ArgumentError);
    const GaussianSketch R(2, 3, 1);
    CHECK_THROWS_AS(R.apply(Vec(Vec::Ones(4))), ArgumentError);
  }
}
