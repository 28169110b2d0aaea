#include <doctest.h>

#include <cmath>

#include "mmchain/fieldsim.hpp"
#include "oracles.hpp"

using namespace mmchain;

namespace {

MetricMeasureSpace line(std::size_t n) { return MetricMeasureSpace::grid({1, n, GridSpec::Metric::l2, {}}); }

}  // namespace

TEST_SUITE("fieldsim") {

TEST_CASE("simulation does not depend on the thread count") {
  const auto s = line(9);
  CovarianceModel cov;
  cov.kind = CovarianceModel::Kind::brownian_like;
  const auto a = simulate_gaussian_field(s, cov, 3001, 99, Execution{1});
  const auto b = simulate_gaussian_field(s, cov, 3001, 99, Execution{8});
  CHECK(a.values == b.values);
  const auto c = simulate_gaussian_field(s, cov, 3001, 100, Execution{1});
  CHECK(a.values != c.values);
}

TEST_CASE("sample covariance reproduces the model") {
  const auto s = line(5);
  CovarianceModel cov;
  cov.kind = CovarianceModel::Kind::squared_exponential;
  const auto r = cov.matrix(s);
  const auto p = simulate_gaussian_field(s, cov, 40000, 5);
  const Eigen::MatrixXd emp = p.values.transpose() * p.values / static_cast<double>(p.paths());
  // Entry SE is at most sqrt(2 / n) for unit variances.
  CHECK((emp - r).cwiseAbs().maxCoeff() < 5.0 * std::sqrt(2.0 / 40000.0));
}

TEST_CASE("covariance factorization") {
  Eigen::MatrixXd r(2, 2);
  r << 1, 1, 1, 1;
  const auto f = factorize(r);
  CHECK((f.factor * f.factor.transpose() - r).cwiseAbs().maxCoeff() < 1e-14);
  Eigen::MatrixXd bad(2, 2);
  bad << 1, 2, 2, 1;
  CHECK_THROWS_AS(factorize(bad), ValidationError);
  Eigen::MatrixXd asym(2, 2);
  asym << 1, 0.5, 0.4, 1;
  CHECK_THROWS_AS(factorize(asym), ValidationError);
}

TEST_CASE("Brownian covariance needs coordinates") {
  Eigen::MatrixXd d(2, 2);
  d << 0, 1, 1, 0;
  const MetricMeasureSpace s(d, {0.5, 0.5});
  CovarianceModel cov;
  cov.kind = CovarianceModel::Kind::brownian_like;
  CHECK_THROWS_AS(cov.matrix(s), ArgumentError);
  CHECK(cov.matrix(line(3))(1, 2) == 0.5);
}

TEST_CASE("modulus is monotone in delta and tails are monotone in u") {
  const auto s = line(11);
  CovarianceModel cov;
  cov.kind = CovarianceModel::Kind::brownian_like;
  const auto p = simulate_gaussian_field(s, cov, 500, 8);
  const DistanceMatrix d(s.distances(), DistanceMatrix::Provenance::given);
  std::vector<double> prev(p.paths(), 0.0);
  for (double delta : {0.05, 0.1, 0.2, 0.5, 1.0}) {
    const auto m = empirical_modulus(p, d, delta);
    for (std::size_t i = 0; i < prev.size(); ++i) CHECK(m.per_path[i] >= prev[i]);
    prev = m.per_path;
  }
  CHECK(empirical_modulus(p, d, 0.05).no_pairs);
  const auto u = linspace(-1, 3, 17);
  const auto t = empirical_tail(p, u, false);
  const auto t2 = empirical_tail(p, u, true);
  for (std::size_t i = 1; i < u.size(); ++i) CHECK(t.probability[i] <= t.probability[i - 1]);
  for (std::size_t i = 0; i < u.size(); ++i) CHECK(t2.probability[i] >= t.probability[i]);
  CHECK(tail_curve_csv(t).rfind("u,empirical,se\n", 0) == 0);
}

TEST_CASE("normalization divides by the largest pointwise norm") {
  const auto s = line(4);
  CovarianceModel cov;
  cov.variance = 4.0;
  const auto p = simulate_gaussian_field(s, cov, 2000, 4);
  const auto phi = YoungFunction::exp_quadratic();
  const auto n = normalize_unit_orlicz(p, phi);
  double mx = 0.0;
  for (std::size_t x = 0; x < s.size(); ++x) mx = std::max(mx, luxemburg_norm(n.paths.column(x), phi));
  CHECK(mx == doctest::Approx(1.0).epsilon(1e-9));
  SamplePaths zero;
  zero.values = Eigen::MatrixXd::Zero(5, 2);
  CHECK_THROWS_AS(normalize_unit_orlicz(zero, phi), DomainError);
}

TEST_CASE("verdict classification") {
  CHECK(classify_upper_bound(0.5, 0.4, 0.01) == Verdict::holds);
  CHECK(classify_upper_bound(0.5, 0.52, 0.01) == Verdict::holds_within_slack);
  CHECK(classify_upper_bound(0.5, 0.6, 0.01) == Verdict::violated);
  CHECK(classify_equality(1.0, 1.02, 0.01) == Verdict::holds);
  CHECK(classify_equality(1.0, 1.05, 0.01) == Verdict::violated);
}

TEST_CASE("Kolmogorov-Smirnov statistic with ties") {
  CHECK(ks_two_sample({1, 2, 3}, {1, 2, 3}) == 0.0);
  CHECK(ks_two_sample({1, 2}, {3, 4}) == 1.0);
  CHECK(ks_two_sample({1, 1, 2, 2}, {1, 2, 2, 2}) == doctest::Approx(0.25));
  CHECK_THROWS_AS(ks_two_sample({}, {1.0}), ArgumentError);
}

TEST_CASE("Arnold-Imkeller check on a Brownian path ensemble") {
  const auto s = line(11);
  CovarianceModel cov;
  cov.kind = CovarianceModel::Kind::brownian_like;
  const auto p = simulate_gaussian_field(s, cov, 4000, 12);
  for (const auto& phi : {YoungFunction::power(2), YoungFunction::exp_quadratic()}) {
    const auto rep = verify_arnold_imkeller(p, s, phi);
    CHECK(rep.passed());
    CHECK(rep.metrics.at("violation_fraction") == 0.0);
    CHECK(rep.metrics.at("mean_z") == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(rep.metrics.at("mean_z_offdiagonal") == doctest::Approx(1.0 - 1.0 / 11.0).epsilon(1e-7));
  }
}

TEST_CASE("constant field passes vacuously") {
  const auto s = line(3);
  SamplePaths p;
  p.values = Eigen::MatrixXd::Constant(50, 3, 2.5);
  const auto rep = verify_arnold_imkeller(p, s, YoungFunction::power(2));
  CHECK(rep.passed());
  CHECK(rep.metrics.at("violations") == 0.0);
  CHECK(rep.warnings.size() == 1);
}

TEST_CASE("sums of one draw have the base law") {
  BaseField b;
  b.points = 2;
  b.rho = 0.5;
  const auto s = clt_sup_samples(b, 1, 100000, 3, 0);
  double low = 0.0;
  for (double v : s) low += v == -1.0;
  // max(eta_1, eta_2) = -1 iff both are -1, probability (1 + rho) / 4.
  const double q = 0.375;
  CHECK(std::abs(low / 1e5 - q) < 5.0 * std::sqrt(q * (1 - q) / 1e5));
}

TEST_CASE("sup law at n = 4 matches exact enumeration") {
  BaseField b;
  b.points = 2;
  b.rho = 0.5;
  const std::size_t n_paths = 100000;
  auto s = clt_sup_samples(b, 4, n_paths, 21, 0);
  std::sort(s.begin(), s.end());
  const auto law = oracle::two_point_rademacher_sup_law(4, 0.5);
  double cdf = 0.0;
  double worst = 0.0;
  for (const auto& [x, p] : law) {
    cdf += p;
    const double emp = static_cast<double>(std::upper_bound(s.begin(), s.end(), x + 1e-12) - s.begin()) / n_paths;
    worst = std::max(worst, std::abs(emp - cdf));
  }
  // DKW band at false-alarm rate 1e-6.
  CHECK(worst < std::sqrt(std::log(2e6) / (2.0 * n_paths)));
}

TEST_CASE("Gaussian base field is at the noise floor for every n") {
  BaseField b;
  b.kind = BaseField::Kind::gaussian;
  CovarianceModel cov;
  cov.kind = CovarianceModel::Kind::squared_exponential;
  b.gaussian_covariance = cov.matrix(line(4));
  const std::vector<std::size_t> ns{1, 4, 16};
  const auto res = clt_experiment(b, ns, 20000, 5, 0.03);
  for (const auto& row : res.rows) CHECK(row.ks < 1.95 * std::sqrt(2.0 / 20000.0));
  CHECK(res.report.warnings.empty());
}

}
