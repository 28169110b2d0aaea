#include <doctest.h>

#include <cmath>
#include <random>

#include "mmchain/chaining.hpp"
#include "mmchain/fieldsim.hpp"
#include "oracles.hpp"

using namespace mmchain;

namespace {

MetricMeasureSpace two_point() {
  Eigen::MatrixXd d(2, 2);
  d << 0, 1, 1, 0;
  return MetricMeasureSpace(d, {0.5, 0.5}, "two_point");
}

}  // namespace

TEST_SUITE("chaining") {

TEST_CASE("two-point w-distance is 48 for the quadratic Young function") {
  const auto s = two_point();
  const DistanceMatrix d(s.distances(), DistanceMatrix::Provenance::given);
  CHECK(w_distance(s, YoungFunction::power(2), d, 1.0, 0, 1) == 48.0);
  CHECK(w_distance(s, YoungFunction::power(2), d, 1.0, 1, 1) == 0.0);
  CHECK_THROWS_AS(w_distance(s, YoungFunction::power(2), d, 0.0, 0, 1), ArgumentError);
}

TEST_CASE("w-distance matches adaptive quadrature") {
  std::mt19937_64 rng(41);
  const std::vector<YoungFunction> phis{YoungFunction::power(2), YoungFunction::power(3.5),
                                        YoungFunction::exp_quadratic(), YoungFunction::exp_power(1.0)};
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + static_cast<std::size_t>(trial % 9);
    const auto d = oracle::random_metric(n, rng);
    const auto m = oracle::random_weights(n, rng);
    const MetricMeasureSpace s(d, m);
    const DistanceMatrix dm(d, DistanceMatrix::Provenance::given);
    const auto& phi = phis[static_cast<std::size_t>(trial) % phis.size()];
    const double v = 0.1 + trial;
    const WDistance w(s, phi, dm);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double ref = oracle::w_quadrature(d, m, phi, v, i, j);
        CHECK(w(v, i, j) == doctest::Approx(ref).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("w with V = 1 is a metric") {
  std::mt19937_64 rng(43);
  const auto d = oracle::random_metric(12, rng);
  const MetricMeasureSpace s(d, oracle::random_weights(12, rng));
  const DistanceMatrix dm(d, DistanceMatrix::Provenance::given);
  CHECK_NOTHROW(DistanceMatrix(WDistance(s, YoungFunction::exp_quadratic(), dm).matrix(1.0),
                               DistanceMatrix::Provenance::w_metric));
  const auto verdict = minorizing_verdict(s, YoungFunction::exp_quadratic(), dm);
  CHECK(verdict.is_minorizing);
  CHECK(verdict.max_w == verdict.w_matrix.maxCoeff());
}

TEST_CASE("V functional on two points") {
  const auto s = two_point();
  const DistanceMatrix d(s.distances(), DistanceMatrix::Provenance::given);
  const std::vector<double> f{0.0, 1.0};
  CHECK(v_functional(f, s, YoungFunction::power(2), d) == 0.5);
  CHECK(v_functional(f, s, YoungFunction::power(2), d, DiagonalPolicy::condition) == 1.0);
  const std::vector<double> flat{2.0, 2.0};
  CHECK(v_functional(flat, s, YoungFunction::power(2), d) == 0.0);
}

TEST_CASE("increments are controlled by w at V(f) for any function") {
  std::mt19937_64 rng(47);
  std::normal_distribution<double> g;
  const std::vector<YoungFunction> phis{YoungFunction::power(2), YoungFunction::power(4),
                                        YoungFunction::exp_quadratic()};
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 15);
    const auto d = oracle::random_metric(n, rng);
    const MetricMeasureSpace s(d, oracle::random_weights(n, rng));
    const DistanceMatrix dm(d, DistanceMatrix::Provenance::given);
    std::vector<double> f(n);
    for (auto& x : f) x = 0.3 * g(rng);
    const auto& phi = phis[static_cast<std::size_t>(trial) % phis.size()];
    const double v = v_functional(f, s, phi, dm);
    REQUIRE(std::isfinite(v));
    if (v == 0.0) continue;
    const WDistance w(s, phi, dm);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) CHECK(std::abs(f[i] - f[j]) <= w(v, i, j));
    }
  }
}

TEST_CASE("natural distance gives conditioned Z unit mean on its own ensemble") {
  const auto s = MetricMeasureSpace::grid({1, 6, GridSpec::Metric::l2, {}});
  CovarianceModel cov;
  cov.kind = CovarianceModel::Kind::squared_exponential;
  const auto paths = simulate_gaussian_field(s, cov, 5000, 3);
  for (const auto& phi : {YoungFunction::power(2), YoungFunction::exp_quadratic()}) {
    const auto d = natural_distance(paths, phi);
    CHECK(d.warnings.empty());
    const auto z = v_per_path(paths, s, phi, d, DiagonalPolicy::condition);
    CHECK(mean_with_error(z).mean == doctest::Approx(1.0).epsilon(1e-7));
  }
}

TEST_CASE("degenerate field is flagged") {
  SamplePaths p;
  p.values = Eigen::MatrixXd::Ones(10, 3);
  const auto d = natural_distance(p, YoungFunction::power(2));
  CHECK(d.warnings.size() == 1);
  CHECK(d.values().maxCoeff() == 0.0);
}

TEST_CASE("common distance is the entrywise max") {
  Eigen::MatrixXd a(2, 2), b(2, 2);
  a << 0, 1, 1, 0;
  b << 0, 2, 2, 0;
  const std::vector<DistanceMatrix> ds{DistanceMatrix(a, DistanceMatrix::Provenance::given),
                                       DistanceMatrix(b, DistanceMatrix::Provenance::given)};
  CHECK(common_distance(ds)(0, 1) == 2.0);
}

}
