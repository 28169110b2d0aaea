#include <doctest.h>

#include <cmath>
#include <atomic>
#include <numeric>

#include "mmchain/common.hpp"

using namespace mmchain;

TEST_SUITE("common") {

TEST_CASE("geomspace and linspace hit both endpoints") {
  const auto g = geomspace(1e-3, 1e3, 7);
  REQUIRE(g.size() == 7);
  CHECK(g.front() == 1e-3);
  CHECK(g.back() == 1e3);
  CHECK(g[3] == doctest::Approx(1.0));
  const auto l = linspace(-1.0, 1.0, 5);
  CHECK(l == std::vector<double>{-1.0, -0.5, 0.0, 0.5, 1.0});
}

TEST_CASE("compensated sum recovers cancelled low-order terms") {
  const std::vector<double> v{1e16, 1.0, -1e16, 1.0};
  CHECK(compensated_sum(v) == 2.0);
}

TEST_CASE("parallel_for visits every index once and is schedule independent") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), Execution{8}, [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));

  std::vector<double> a(257), b(257);
  parallel_for(a.size(), Execution{1}, [&](std::size_t i) { a[i] = std::sin(static_cast<double>(i)); });
  parallel_for(b.size(), Execution{8}, [&](std::size_t i) { b[i] = std::sin(static_cast<double>(i)); });
  CHECK(a == b);
}

TEST_CASE("parallel_for rethrows a worker exception") {
  CHECK_THROWS_AS(parallel_for(100, Execution{4},
                               [](std::size_t i) {
                                 if (i == 57) throw DomainError("boom");
                               }),
                  DomainError);
}

TEST_CASE("probability vectors") {
  const std::vector<double> ok{0.25, 0.75};
  CHECK_NOTHROW(require_probability_vector(ok));
  const std::vector<double> neg{-0.1, 1.1};
  CHECK_THROWS_AS(require_probability_vector(neg), ArgumentError);
  const std::vector<double> short_sum{0.5, 0.4};
  CHECK_THROWS_AS(require_probability_vector(short_sum), ArgumentError);
}

TEST_CASE("mean with standard error") {
  const std::vector<double> v{1, 2, 3, 4};
  const auto m = mean_with_error(v);
  CHECK(m.mean == 2.5);
  CHECK(m.standard_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
}

}
