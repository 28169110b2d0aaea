#include <doctest.h>

#include <cmath>
#include <random>

#include "mmchain/mspace.hpp"
#include "oracles.hpp"

using namespace mmchain;

TEST_SUITE("mspace") {

TEST_CASE("grid spaces") {
  const auto s = MetricMeasureSpace::grid({2, 3, GridSpec::Metric::linf, {}});
  CHECK(s.size() == 9);
  CHECK(s.id() == "grid2d_3");
  CHECK(s.distance(0, 8) == 1.0);
  CHECK(diameter(s) == 1.0);
  const auto l2 = MetricMeasureSpace::grid({2, 3, GridSpec::Metric::l2, {}});
  CHECK(l2.distance(0, 8) == doctest::Approx(std::sqrt(2.0)));
  CHECK(l2.coordinates()->rows() == 9);
}

TEST_CASE("space validation") {
  Eigen::MatrixXd bad(3, 3);
  bad << 0, 1, 5, 1, 0, 1, 5, 1, 0;
  CHECK_THROWS_AS(MetricMeasureSpace(bad, {1.0 / 3, 1.0 / 3, 1.0 / 3}), ValidationError);
  Eigen::MatrixXd ok(2, 2);
  ok << 0, 1, 1, 0;
  CHECK_THROWS(MetricMeasureSpace(ok, {0.7, 0.7}));
  CHECK_THROWS_AS(metric_measure_space_from_json({{"kind", "grid"}, {"dim", 1}, {"per_side", 3}, {"colour", 1}}),
                  ArgumentError);
}

TEST_CASE("closed balls") {
  Eigen::MatrixXd d(3, 3);
  d << 0, 1, 2, 1, 0, 1, 2, 1, 0;
  const MetricMeasureSpace s(d, {0.5, 0.25, 0.25});
  CHECK(ball_measure(s, 0, 0.0) == 0.5);
  CHECK(ball_measure(s, 0, 1.0) == 0.75);
  CHECK(ball_measure(s, 0, 1.999) == 0.75);
  CHECK(ball_measure(s, 0, 2.0) == 1.0);
}

TEST_CASE("exact cover agrees with exhaustive search") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 10);
    const auto d = oracle::random_metric(n, rng, trial % 2 == 0);
    for (double eps : {0.0, 0.3, 0.7, 1.0, 2.0, 3.0}) {
      const auto exact = exact_cover(d, eps);
      CHECK(exact.count == oracle::brute_force_cover(d, eps));
      CHECK(greedy_cover(d, eps).count >= exact.count);
    }
  }
}

TEST_CASE("covering numbers are nonincreasing in eps") {
  std::mt19937_64 rng(23);
  for (std::size_t n : {5u, 20u, 40u}) {
    const auto d = oracle::random_metric(n, rng);
    const MetricMeasureSpace s(d, oracle::random_weights(n, rng));
    const EntropyCurve curve(s);
    std::size_t prev = n + 1;
    for (double eps : linspace(1e-9, 1.2 * diameter(s), 200)) {
      const auto c = curve.count(eps);
      CHECK(c <= prev);
      CHECK(c == covering_number(s, eps).count);
      prev = c;
    }
    CHECK(curve.count(diameter(s)) == 1);
    CHECK(curve.count(0.0) == n);
  }
}

TEST_CASE("theta fit certificate replays") {
  const auto s = MetricMeasureSpace::grid({1, 11, GridSpec::Metric::l2, {}});
  const auto fit = fit_theta(s);
  CHECK(fit.theta > 0.0);
  CHECK(fit.c_theta > 0.0);
  CHECK(replay_certificate(s, fit));
  for (double r : default_r_grid(s)) {
    for (std::size_t x = 0; x < s.size(); ++x) {
      const double m = ball_measure(s, x, r);
      CHECK(m * m >= std::pow(r, fit.theta) / fit.c_theta * (1 - 1e-12));
    }
  }
}

}
