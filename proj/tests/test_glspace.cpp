#include <doctest.h>

#include <cmath>
#include <random>

#include "mmchain/glspace.hpp"

using namespace mmchain;

TEST_SUITE("glspace") {

TEST_CASE("point-mass fundamental function is delta^(1/r)") {
  for (double r : {1.0, 2.0, 3.7}) {
    const auto psi = PsiFunction::point_mass(r);
    for (double d : {1e-6, 0.01, 0.3, 1.0}) CHECK(fundamental_function(psi, d) == std::pow(d, 1.0 / r));
  }
}

TEST_CASE("power psi values and support") {
  const auto psi = PsiFunction::power(2.0, 1.0, 10.0);
  CHECK(psi(4.0).value() == doctest::Approx(2.0));
  CHECK_FALSE(psi(1.0).has_value());
  CHECK_FALSE(psi(10.0).has_value());
  const auto grid = psi.interior_grid();
  CHECK(grid.front() > 1.0);
  CHECK(grid.back() < 10.0);
  CHECK(std::is_sorted(grid.begin(), grid.end()));
}

TEST_CASE("moments of a two-atom variable") {
  const std::vector<double> s{1.0, 3.0};
  const std::vector<double> w{0.75, 0.25};
  const std::vector<double> p{1.0, 2.0, 4.0};
  const auto prof = empirical_moments(s, w, p);
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(prof.moments[i] == doctest::Approx(std::pow(0.75 + 0.25 * std::pow(3.0, p[i]), 1.0 / p[i])));
  }
  CHECK(prof.warnings.empty());
}

TEST_CASE("Gpsi norm picks the largest ratio, smallest p on ties") {
  MomentProfile prof;
  prof.p_grid = {2.0, 4.0, 8.0};
  prof.moments = {1.0, 2.0, 2.0 * std::sqrt(2.0)};
  const auto n = gpsi_norm(prof, PsiFunction::power(2.0));
  CHECK(n.value == doctest::Approx(1.0));
  CHECK(n.argmax == 4.0);
}

TEST_CASE("theta-damped psi needs room above theta") {
  CHECK_THROWS_AS(psi_theta(PsiFunction::power(2.0, 1.0, 2.0), 3.0), SupportError);
  const auto d = psi_theta(PsiFunction::power(2.0), 1.0);
  CHECK(d(4.0).value() == doctest::Approx(0.75 * 2.0));
}

TEST_CASE("psi from a quadratic log-MGF is sqrt(p/2)") {
  const auto phi = ConvexGridFunction::sample(linspace(0, 30, 3001), [](double l) { return 0.5 * l * l; });
  const auto psi = psi_from_bphi(phi);
  for (double p : {2.0, 5.0, 50.0, 300.0}) CHECK(psi(p).value() == doctest::Approx(std::sqrt(p / 2.0)).epsilon(1e-3));
}

TEST_CASE("tail bound from a Gpsi norm is a nonincreasing probability") {
  const auto psi = PsiFunction::power(2.0);
  double prev = 1.0;
  for (double z : {1.0, 2.0, 4.0, 8.0, 16.0}) {
    const double t = tail_bound_from_gpsi(psi, 1.0, z);
    CHECK(t <= 1.0);
    CHECK(t >= 0.0);
    CHECK(t <= prev + 1e-15);
    prev = t;
  }
  CHECK(prev < 1e-10);
}

TEST_CASE("envelope is the pointwise max") {
  const auto a = PsiFunction::power(2.0);
  const auto b = PsiFunction::power(3.0, 1.0, kInf, 1.5);
  const auto e = PsiFunction::envelope({a, b});
  for (double p : {1.5, 3.0, 30.0}) CHECK(e(p).value() == doctest::Approx(std::max(*a(p), *b(p))));
}

TEST_CASE("psi configs round-trip through JSON") {
  const auto psi = psi_function_from_json({{"family", "theta_damped"}, {"theta", 1.0},
                                           {"base", {{"family", "power"}, {"q", 2}}}});
  CHECK(psi.kind() == PsiFunction::Kind::theta_damped);
  nlohmann::json j = psi;
  const auto back = psi_function_from_json(j);
  CHECK(*back(5.0) == doctest::Approx(*psi(5.0)));
  CHECK_THROWS_AS(psi_function_from_json({{"family", "power"}, {"q", 2}, {"bogus", 0}}), ArgumentError);
}

}
