#include <doctest.h>

#include <cmath>
#include <random>

#include "mmchain/orlicz.hpp"
#include "mmchain/sample_paths.hpp"

using namespace mmchain;

namespace {

std::vector<double> normal_samples(std::size_t n, std::uint64_t seed, double sigma = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sigma);
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

YoungFunction convex_table() {
  std::vector<double> z{0, 0.5, 1, 1.5, 2, 3, 4};
  std::vector<double> v;
  for (double x : z) v.push_back(x * x + x * x * x / 3.0);
  return YoungFunction::tabulated(z, v);
}

}  // namespace

TEST_SUITE("orlicz") {

TEST_CASE("power family norm is the weighted L_p norm") {
  const std::vector<double> s{1.0, -2.0, 3.0};
  const std::vector<double> w{0.5, 0.25, 0.25};
  for (double p : {1.0, 2.0, 3.5}) {
    const double expect = std::pow(0.5 + 0.25 * std::pow(2.0, p) + 0.25 * std::pow(3.0, p), 1.0 / p);
    CHECK(luxemburg_norm(s, w, YoungFunction::power(p)) == doctest::Approx(expect).epsilon(1e-14));
  }
}

TEST_CASE("modular equals one at the returned norm") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> size(1, 300);
  std::vector<YoungFunction> family{YoungFunction::exp_quadratic(), YoungFunction::exp_power(1.0),
                                    YoungFunction::exp_power(1.7), convex_table(), YoungFunction::power(3.0)};
  for (int trial = 0; trial < 40; ++trial) {
    const auto s = normal_samples(static_cast<std::size_t>(size(rng)), 100 + trial, 0.01 + trial);
    const auto& phi = family[static_cast<std::size_t>(trial) % family.size()];
    const double c = luxemburg_norm(s, phi);
    REQUIRE(c > 0.0);
    CHECK(std::abs(orlicz_modular(s, {}, phi, c) - 1.0) <= 1e-8);
  }
}

TEST_CASE("norm is absolutely homogeneous and zero only for zero") {
  const auto s = normal_samples(200, 9);
  const auto phi = YoungFunction::exp_quadratic();
  std::vector<double> scaled(s);
  for (auto& x : scaled) x *= -3.0;
  CHECK(luxemburg_norm(scaled, phi) == doctest::Approx(3.0 * luxemburg_norm(s, phi)).epsilon(1e-9));
  const std::vector<double> zeros(10, 0.0);
  CHECK(luxemburg_norm(zeros, phi) == 0.0);
}

TEST_CASE("Gaussian norms match their closed forms") {
  const auto s = normal_samples(400000, 21);
  // E X^2 = 1, E X^4 = 3, E exp(X^2 / (2 c^2)) = 2 at c = 2 / sqrt(3).
  CHECK(luxemburg_norm(s, YoungFunction::power(2)) == doctest::Approx(1.0).epsilon(0.01));
  CHECK(luxemburg_norm(s, YoungFunction::power(4)) == doctest::Approx(std::pow(3.0, 0.25)).epsilon(0.01));
  CHECK(luxemburg_norm(s, YoungFunction::exp_quadratic()) == doctest::Approx(2.0 / std::sqrt(3.0)).epsilon(0.03));
}

TEST_CASE("tabulated Young functions") {
  const auto phi = convex_table();
  for (double z : {0.25, 1.0, 2.7}) CHECK(phi.inverse(phi(z)) == doctest::Approx(z).epsilon(1e-10));
  CHECK(phi.inverse(1e9) == 4.0);
  CHECK_THROWS_AS(phi(4.5), RangeError);
  CHECK_THROWS_AS(YoungFunction::tabulated({0, 1, 2}, {0, 2, 3}), ValidationError);
  CHECK_THROWS_AS(YoungFunction::tabulated({0.1, 1}, {0, 1}), ValidationError);
}

TEST_CASE("invalid parameters and configs are rejected") {
  CHECK_THROWS_AS(YoungFunction::power(0.5), ArgumentError);
  CHECK_THROWS_AS(YoungFunction::exp_power(0.9), ArgumentError);
  CHECK_THROWS_AS(young_function_from_json({{"family", "power"}, {"p", 2}, {"extra", 1}}), ArgumentError);
  CHECK_THROWS_AS(young_function_from_json({{"family", "nope"}}), ArgumentError);
  const auto phi = young_function_from_json({{"family", "exp_power"}, {"q", 1.5}});
  CHECK(phi.family() == YoungFunction::Family::exp_power);
  CHECK(phi(1.0) == doctest::Approx(std::expm1(1.0 / 1.5)));
}

TEST_CASE("conjugate of y^2/2 is x^2/2") {
  const auto g = ConvexGridFunction::sample(linspace(-20, 20, 4001), [](double y) { return 0.5 * y * y; });
  const auto x = linspace(-5, 5, 101);
  const auto gs = fenchel_conjugate(g, x);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(gs.values()[i] - 0.5 * x[i] * x[i]) <= 1e-4);
}

TEST_CASE("biconjugate recovers a convex grid function") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    // Random convex function: max of affine pieces plus a quadratic.
    std::vector<std::pair<double, double>> pieces(5);
    for (auto& [a, b] : pieces) a = 4 * u(rng) - 2, b = u(rng);
    const double q = u(rng);
    const auto g = ConvexGridFunction::sample(linspace(-3, 3, 241), [&](double y) {
      double m = q * y * y;
      for (const auto& [a, b] : pieces) m = std::max(m, a * y + b);
      return m;
    });
    const auto xg = linspace(-10, 10, 801);
    const auto gs = fenchel_conjugate(g, xg);
    const auto gss = fenchel_conjugate(gs, g.abscissae());
    const double tol = biconjugate_tolerance(g, xg);
    REQUIRE(std::isfinite(tol));
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(gss.values()[i] <= g.values()[i] + 1e-12);
      CHECK(g.values()[i] - gss.values()[i] <= tol);
    }
  }
}

TEST_CASE("convex minorant lies below the points and is convex") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto x = linspace(0, 1, 50);
  std::vector<double> y(x.size());
  for (auto& v : y) v = u(rng);
  const auto m = convex_minorant(x, y);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(m.values()[i] <= y[i] + 1e-15);
  CHECK_NOTHROW(ConvexGridFunction(m.abscissae(), m.values()));
  // Endpoints of the minorant touch the data.
  CHECK(m.values().front() == y.front());
  CHECK(m.values().back() == y.back());
}

TEST_CASE("delta-2 constants") {
  const auto eq = delta2_constant(YoungFunction::exp_quadratic(), 1e-3, 1e6);
  CHECK_FALSE(eq.diverging);
  CHECK(eq.value > 0.5);
  CHECK(eq.value <= 1.0);
  const auto pw = delta2_constant(YoungFunction::power(2), 1e-3, 1e6);
  CHECK(pw.diverging);
}

TEST_CASE("natural Young function of a Gaussian field is close to lambda^2/2") {
  SamplePaths paths;
  const auto s = normal_samples(200000, 33);
  paths.values = Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
  const auto grid = linspace(-2, 2, 41);
  const auto nat = natural_phi(paths, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double lam = nat.phi.abscissae()[i];
    CHECK(nat.phi.values()[i] == doctest::Approx(0.5 * lam * lam).epsilon(0.02).scale(0.02));
  }
  CHECK(nat.phi(0.0) == 0.0);
}

}
