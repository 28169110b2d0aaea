#include "mmchain/fieldsim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mmchain/io.hpp"

namespace mmchain {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string num(double v) { return format_number(v); }

}  // namespace

std::mt19937_64 path_engine(std::uint64_t seed, std::uint64_t path, std::uint64_t stream) {
  const std::uint64_t key = splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x51ed2701ULL) ^
                                       splitmix64(path * 0x2545f4914f6cdd1dULL + 1));
  return std::mt19937_64(key);
}

// ---------------------------------------------------------------------------

std::string covariance_name(CovarianceModel::Kind kind) {
  switch (kind) {
    case CovarianceModel::Kind::squared_exponential:
      return "squared_exponential";
    case CovarianceModel::Kind::brownian_like:
      return "brownian_like";
    case CovarianceModel::Kind::independent:
      return "independent";
    case CovarianceModel::Kind::custom:
      return "custom";
  }
  return "unknown";
}

Eigen::MatrixXd CovarianceModel::matrix(const MetricMeasureSpace& space) const {
  const auto n = static_cast<Eigen::Index>(space.size());
  if (!(variance >= 0.0) || !std::isfinite(variance)) throw ArgumentError("covariance variance must be >= 0");
  Eigen::MatrixXd r(n, n);
  switch (kind) {
    case Kind::independent:
      r = variance * Eigen::MatrixXd::Identity(n, n);
      break;
    case Kind::squared_exponential: {
      if (!(length_scale > 0.0)) throw ArgumentError("squared_exponential needs length_scale > 0");
      const auto& d = space.distances();
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
          r(i, j) = variance * std::exp(-0.5 * d(i, j) * d(i, j) / (length_scale * length_scale));
        }
      }
      break;
    }
    case Kind::brownian_like: {
      if (!space.coordinates()) throw ArgumentError("brownian_like covariance needs grid coordinates");
      const auto& c = *space.coordinates();
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
          double prod = variance;
          for (Eigen::Index k = 0; k < c.cols(); ++k) prod *= std::min(c(i, k), c(j, k));
          r(i, j) = prod;
        }
      }
      break;
    }
    case Kind::custom:
      if (custom.rows() != n || custom.cols() != n) {
        throw ArgumentError("custom covariance does not match the space size");
      }
      r = custom;
      break;
  }
  return r;
}

CovarianceModel covariance_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ArgumentError("covariance config must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key != "kind" && key != "length_scale" && key != "variance" && key != "matrix") {
      throw ArgumentError("covariance: unknown key '" + key + "'");
    }
  }
  CovarianceModel m;
  const auto kind = j.value("kind", std::string("independent"));
  if (kind == "squared_exponential") {
    m.kind = CovarianceModel::Kind::squared_exponential;
  } else if (kind == "brownian_like") {
    m.kind = CovarianceModel::Kind::brownian_like;
  } else if (kind == "independent") {
    m.kind = CovarianceModel::Kind::independent;
  } else if (kind == "custom") {
    m.kind = CovarianceModel::Kind::custom;
    const auto rows = j.at("matrix").get<std::vector<std::vector<double>>>();
    const auto n = static_cast<Eigen::Index>(rows.size());
    m.custom.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != n) {
        throw ArgumentError("custom covariance must be square");
      }
      for (Eigen::Index k = 0; k < n; ++k) m.custom(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
    }
  } else {
    throw ArgumentError("unknown covariance kind '" + kind + "'");
  }
  m.length_scale = j.value("length_scale", m.length_scale);
  m.variance = j.value("variance", m.variance);
  return m;
}

CovarianceFactor factorize(const Eigen::MatrixXd& r) {
  const auto n = r.rows();
  if (r.cols() != n) throw ValidationError("covariance must be square");
  if (!r.allFinite()) throw ValidationError("covariance has non-finite entries");
  if ((r - r.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, r.cwiseAbs().maxCoeff())) {
    throw ValidationError("covariance is not symmetric");
  }
  CovarianceFactor out;
  if (n == 0) return out;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(r);
  if (ldlt.info() != Eigen::Success) throw ValidationError("covariance factorization failed");
  const double scale = std::max(1e-300, r.diagonal().cwiseAbs().maxCoeff());
  Eigen::VectorXd d = ldlt.vectorD();
  out.min_pivot = d.minCoeff();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (d(i) < 0.0) {
      if (d(i) < -1e-12 * scale) {
        throw ValidationError("covariance is not positive semidefinite: pivot " + num(d(i)));
      }
      d(i) = 0.0;
      ++out.clamped_pivots;
    }
  }
  const Eigen::MatrixXd l = ldlt.matrixL();
  Eigen::MatrixXd a = l * d.cwiseSqrt().asDiagonal();
  out.factor = ldlt.transpositionsP().transpose() * a;
  return out;
}

SamplePaths simulate_gaussian(const CovarianceFactor& factor, std::size_t n_paths, std::uint64_t seed,
                              std::uint64_t stream, const Execution& exec) {
  const auto n = factor.factor.rows();
  SamplePaths out;
  out.seed = seed;
  out.values.resize(static_cast<Eigen::Index>(n_paths), n);
  parallel_for(n_paths, exec, [&](std::size_t p) {
    auto eng = path_engine(seed, p, stream);
    std::normal_distribution<double> normal;
    Eigen::VectorXd z(n);
    for (Eigen::Index k = 0; k < n; ++k) z(k) = normal(eng);
    out.values.row(static_cast<Eigen::Index>(p)) = (factor.factor * z).transpose();
  });
  return out;
}

SamplePaths simulate_gaussian_field(const MetricMeasureSpace& space, const CovarianceModel& cov,
                                    std::size_t n_paths, std::uint64_t seed, const Execution& exec) {
  if (n_paths == 0) throw ArgumentError("simulation needs at least one path");
  auto paths = simulate_gaussian(factorize(cov.matrix(space)), n_paths, seed, 0, exec);
  paths.space_id = space.id();
  return paths;
}

// ---------------------------------------------------------------------------

namespace {

double nearest_rank(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
  idx = std::clamp<std::size_t>(idx, 1, sorted.size());
  return sorted[idx - 1];
}

}  // namespace

ModulusSummary empirical_modulus(const SamplePaths& paths, const DistanceMatrix& d, double delta) {
  if (!(delta > 0.0)) throw ArgumentError("modulus needs delta > 0");
  if (d.size() != paths.points()) throw ArgumentError("distance matrix does not match the paths");
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = i + 1; j < d.size(); ++j) {
      if (d(i, j) <= delta) pairs.emplace_back(i, j);
    }
  }
  ModulusSummary s;
  s.delta = delta;
  s.no_pairs = pairs.empty();
  s.per_path.assign(paths.paths(), 0.0);
  for (std::size_t p = 0; p < paths.paths(); ++p) {
    double m = 0.0;
    for (const auto& [i, j] : pairs) {
      m = std::max(m, std::abs(paths.values(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(i)) -
                               paths.values(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(j))));
    }
    s.per_path[p] = m;
  }
  const auto est = mean_with_error(s.per_path);
  s.mean = est.mean;
  s.standard_error = est.standard_error;
  auto sorted = s.per_path;
  std::sort(sorted.begin(), sorted.end());
  s.median = nearest_rank(sorted, 0.5);
  s.q90 = nearest_rank(sorted, 0.9);
  s.q99 = nearest_rank(sorted, 0.99);
  s.max = sorted.empty() ? 0.0 : sorted.back();
  return s;
}

TailCurve empirical_tail(const SamplePaths& paths, std::span<const double> u_grid, bool two_sided) {
  const std::size_t n = paths.paths();
  if (n == 0) throw ArgumentError("empirical_tail needs at least one path");
  std::vector<double> sup(n);
  for (std::size_t p = 0; p < n; ++p) {
    const auto row = paths.values.row(static_cast<Eigen::Index>(p));
    sup[p] = two_sided ? row.cwiseAbs().maxCoeff() : row.maxCoeff();
  }
  std::sort(sup.begin(), sup.end());
  TailCurve c;
  c.two_sided = two_sided;
  c.u.assign(u_grid.begin(), u_grid.end());
  const double dn = static_cast<double>(n);
  for (double u : u_grid) {
    const auto above = static_cast<double>(sup.end() - std::upper_bound(sup.begin(), sup.end(), u));
    const double q = above / dn;
    c.probability.push_back(q);
    c.standard_error.push_back(q == 0.0 || q == 1.0 ? 1.0 / dn : std::sqrt(q * (1.0 - q) / dn));
  }
  return c;
}

std::string tail_curve_csv(const TailCurve& curve, std::span<const double> bounds) {
  const bool with_bound = !bounds.empty();
  if (with_bound && bounds.size() != curve.u.size()) throw ArgumentError("bounds do not match the u grid");
  CsvTable t(with_bound ? std::vector<std::string>{"u", "empirical", "se", "bound"}
                        : std::vector<std::string>{"u", "empirical", "se"});
  for (std::size_t i = 0; i < curve.u.size(); ++i) {
    std::vector<double> row{curve.u[i], curve.probability[i], curve.standard_error[i]};
    if (with_bound) row.push_back(bounds[i]);
    t.add_row(row);
  }
  return t.str();
}

Normalized normalize_unit_orlicz(const SamplePaths& paths, const YoungFunction& phi) {
  double divisor = 0.0;
  for (std::size_t x = 0; x < paths.points(); ++x) divisor = std::max(divisor, luxemburg_norm(paths.column(x), phi));
  if (!(divisor > 0.0) || !std::isfinite(divisor)) {
    throw DomainError("normalization failure: the field has zero Orlicz norm at every point");
  }
  Normalized out{paths, divisor};
  out.paths.values /= divisor;
  return out;
}

// ---------------------------------------------------------------------------

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::holds:
      return "holds";
    case Verdict::holds_within_slack:
      return "holds_within_slack";
    case Verdict::violated:
      return "violated";
  }
  return "unknown";
}

Verdict classify_upper_bound(double bound, double empirical, double se) {
  if (bound >= empirical) return Verdict::holds;
  if (bound >= empirical - 3.0 * se) return Verdict::holds_within_slack;
  return Verdict::violated;
}

Verdict classify_equality(double target, double empirical, double se) {
  return std::abs(empirical - target) <= 3.0 * se ? Verdict::holds : Verdict::violated;
}

bool VerificationReport::passed() const {
  return std::none_of(checks.begin(), checks.end(), [](const Check& c) { return c.verdict == Verdict::violated; });
}

void to_json(nlohmann::json& j, const VerificationReport& r) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name},
                      {"bound", num(c.bound)},
                      {"empirical", num(c.empirical)},
                      {"se", num(c.se)},
                      {"verdict", verdict_name(c.verdict)}});
  }
  nlohmann::json metrics = nlohmann::json::object();
  for (const auto& [k, v] : r.metrics) metrics[k] = num(v);
  j = {{"name", r.name}, {"passed", r.passed()}, {"checks", checks}, {"metrics", metrics}, {"warnings", r.warnings}};
}

VerificationReport verify_arnold_imkeller(const SamplePaths& paths, const MetricMeasureSpace& space,
                                          const YoungFunction& phi, const Execution& exec) {
  return verify_arnold_imkeller(paths, space, phi, natural_distance(paths, phi, exec), exec);
}

VerificationReport verify_arnold_imkeller(const SamplePaths& paths, const MetricMeasureSpace& space,
                                          const YoungFunction& phi, const DistanceMatrix& d_phi,
                                          const Execution& exec, std::size_t max_pathwise) {
  const std::size_t n = space.size();
  if (paths.points() != n) throw ArgumentError("paths do not match the space size");
  VerificationReport rep;
  rep.name = "arnold_imkeller";

  const auto z = v_per_path(paths, space, phi, d_phi, DiagonalPolicy::exclude, exec);
  double diag = 0.0;
  for (double w : space.weights()) diag += w * w;
  const double off = 1.0 - diag;
  std::vector<double> z_cond(z.size());
  for (std::size_t p = 0; p < z.size(); ++p) z_cond[p] = z[p] / off;

  const WDistance wd(space, phi, d_phi);
  const std::size_t checked = std::min(paths.paths(), max_pathwise);
  std::vector<std::size_t> violations(checked, 0);
  std::vector<double> worst(checked, 0.0);
  parallel_for(checked, exec, [&](std::size_t p) {
    std::vector<double> cum;
    wd.cumulative(z[p], cum);
    const auto row = paths.values.row(static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double inc = std::abs(row(static_cast<Eigen::Index>(i)) - row(static_cast<Eigen::Index>(j)));
        const double w = wd.pair(cum, i, j);
        if (inc > 1.01 * w) ++violations[p];
        if (w > 0.0) worst[p] = std::max(worst[p], inc / w);
      }
    }
  });
  std::size_t total = 0;
  double max_ratio = 0.0;
  for (std::size_t p = 0; p < checked; ++p) {
    total += violations[p];
    max_ratio = std::max(max_ratio, worst[p]);
  }
  const double pairs = static_cast<double>(checked) * static_cast<double>(n * (n - 1) / 2);
  const double fraction = pairs > 0.0 ? static_cast<double>(total) / pairs : 0.0;

  const auto mean_excl = mean_with_error(z);
  const auto mean_cond = mean_with_error(z_cond);
  rep.metrics = {{"mean_z", mean_cond.mean},
                 {"se_z", mean_cond.standard_error},
                 {"mean_z_offdiagonal", mean_excl.mean},
                 {"expected_z_offdiagonal", off},
                 {"violation_fraction", fraction},
                 {"violations", static_cast<double>(total)},
                 {"pairs_checked", pairs},
                 {"max_increment_over_w", max_ratio}};
  rep.checks.push_back({"pathwise_violation_fraction", 0.0, fraction, 0.0,
                        total == 0 ? Verdict::holds : Verdict::violated});
  if (d_phi.values().maxCoeff() == 0.0) {
    rep.warnings.push_back("degenerate field: E Z check skipped");
  } else {
    rep.checks.push_back({"mean_z_unit", 1.0, mean_cond.mean, mean_cond.standard_error,
                          classify_equality(1.0, mean_cond.mean, mean_cond.standard_error)});
  }
  return rep;
}

VerificationReport verify_tail_bounds(const TailCurve& empirical, std::span<const BoundResult> bounds,
                                      const std::string& name) {
  if (bounds.size() != empirical.u.size()) throw ArgumentError("bounds do not match the tail curve");
  VerificationReport rep;
  rep.name = name;
  double min_slack = kInf;
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    const double b = bounds[i].value;
    const double e = empirical.probability[i];
    const double se = empirical.standard_error[i];
    rep.checks.push_back({name + "@u=" + num(empirical.u[i]), b, e, se, classify_upper_bound(b, e, se)});
    min_slack = std::min(min_slack, b - e);
  }
  rep.metrics["min_slack"] = min_slack;
  return rep;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ArgumentError("KS statistic needs two non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

// ---------------------------------------------------------------------------

std::string base_field_name(BaseField::Kind kind) {
  switch (kind) {
    case BaseField::Kind::gaussian:
      return "gaussian";
    case BaseField::Kind::rademacher_markov:
      return "rademacher_markov";
    case BaseField::Kind::sign_gaussian:
      return "sign_gaussian";
  }
  return "unknown";
}

Eigen::MatrixXd BaseField::covariance() const {
  switch (kind) {
    case Kind::gaussian:
      return gaussian_covariance;
    case Kind::rademacher_markov: {
      const auto n = static_cast<Eigen::Index>(points);
      Eigen::MatrixXd r(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) r(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
      }
      return r;
    }
    case Kind::sign_gaussian: {
      const auto& g = gaussian_covariance;
      Eigen::MatrixXd r(g.rows(), g.cols());
      for (Eigen::Index i = 0; i < g.rows(); ++i) {
        for (Eigen::Index j = 0; j < g.cols(); ++j) {
          const double c = g(i, j) / std::sqrt(g(i, i) * g(j, j));
          r(i, j) = 2.0 / std::numbers::pi * std::asin(std::clamp(c, -1.0, 1.0));
        }
      }
      return r;
    }
  }
  return {};
}

std::vector<double> clt_sup_samples(const BaseField& base, std::size_t n, std::size_t n_paths,
                                    std::uint64_t seed, std::uint64_t stream, const Execution& exec) {
  if (n == 0) throw ArgumentError("CLT sums need n >= 1");
  std::vector<double> out(n_paths);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  if (base.kind == BaseField::Kind::rademacher_markov) {
    const std::size_t k = base.points;
    if (k == 0) throw ArgumentError("Rademacher base field needs at least one point");
    if (!(base.rho >= -1.0 && base.rho <= 1.0)) throw ArgumentError("Rademacher correlation must lie in [-1, 1]");
    const double p_same = 0.5 * (1.0 + base.rho);
    const std::uint64_t threshold =
        p_same >= 1.0 ? ~std::uint64_t{0} : static_cast<std::uint64_t>(p_same * 18446744073709551616.0);
    parallel_for(n_paths, exec, [&](std::size_t p) {
      auto eng = path_engine(seed, p, stream);
      std::vector<long> s(k, 0);
      for (std::size_t i = 0; i < n; ++i) {
        long v = (eng() >> 63) ? 1 : -1;
        s[0] += v;
        for (std::size_t x = 1; x < k; ++x) {
          if (eng() >= threshold) v = -v;
          s[x] += v;
        }
      }
      out[p] = static_cast<double>(*std::max_element(s.begin(), s.end())) * scale;
    });
    return out;
  }
  const auto factor = factorize(base.gaussian_covariance);
  const auto k = factor.factor.rows();
  const bool sign = base.kind == BaseField::Kind::sign_gaussian;
  parallel_for(n_paths, exec, [&](std::size_t p) {
    auto eng = path_engine(seed, p, stream);
    std::normal_distribution<double> normal;
    Eigen::VectorXd z(k);
    Eigen::VectorXd s = Eigen::VectorXd::Zero(k);
    for (std::size_t i = 0; i < n; ++i) {
      for (Eigen::Index x = 0; x < k; ++x) z(x) = normal(eng);
      const Eigen::VectorXd g = factor.factor * z;
      if (sign) {
        for (Eigen::Index x = 0; x < k; ++x) s(x) += g(x) > 0.0 ? 1.0 : -1.0;
      } else {
        s += g;
      }
    }
    out[p] = s.maxCoeff() * scale;
  });
  return out;
}

CltResult clt_experiment(const BaseField& base, std::span<const std::size_t> n_list, std::size_t n_paths,
                         std::uint64_t seed, double threshold, const Execution& exec) {
  if (n_list.empty()) throw ArgumentError("CLT experiment needs at least one n");
  if (n_paths == 0) throw ArgumentError("CLT experiment needs at least one path");
  CltResult res;
  res.report.name = "clt_" + base_field_name(base.kind);

  // Centring and covariance of the base field from single draws.
  const std::size_t probe = std::min<std::size_t>(n_paths, 20000);
  const auto r = base.covariance();
  {
    const auto k = static_cast<std::size_t>(r.rows());
    std::vector<std::vector<double>> cols(k, std::vector<double>(probe));
    const auto gauss = base.kind == BaseField::Kind::rademacher_markov ? CovarianceFactor{}
                                                                       : factorize(base.gaussian_covariance);
    std::vector<Eigen::VectorXd> draws(probe);
    parallel_for(probe, exec, [&](std::size_t p) {
      auto eng = path_engine(seed, p, 999);
      Eigen::VectorXd v(static_cast<Eigen::Index>(k));
      if (base.kind == BaseField::Kind::rademacher_markov) {
        const double p_same = 0.5 * (1.0 + base.rho);
        std::uniform_real_distribution<double> unif;
        double cur = (eng() >> 63) ? 1.0 : -1.0;
        v(0) = cur;
        for (std::size_t x = 1; x < k; ++x) {
          if (unif(eng) >= p_same) cur = -cur;
          v(static_cast<Eigen::Index>(x)) = cur;
        }
      } else {
        std::normal_distribution<double> normal;
        Eigen::VectorXd z(static_cast<Eigen::Index>(k));
        for (auto& e : z) e = normal(eng);
        v = gauss.factor * z;
        if (base.kind == BaseField::Kind::sign_gaussian) v = v.unaryExpr([](double g) { return g > 0.0 ? 1.0 : -1.0; });
      }
      draws[p] = v;
    });
    double worst_mean = 0.0;
    double worst_cov = 0.0;
    for (std::size_t x = 0; x < k; ++x) {
      for (std::size_t p = 0; p < probe; ++p) cols[x][p] = draws[p](static_cast<Eigen::Index>(x));
      const auto m = mean_with_error(cols[x]);
      worst_mean = std::max(worst_mean, std::abs(m.mean));
      if (std::abs(m.mean) > 3.0 * m.standard_error && m.standard_error > 0.0) {
        res.report.warnings.push_back("base field mean at point " + std::to_string(x) + " is " + num(m.mean) +
                                      ", beyond 3 SE of zero");
      }
    }
    for (std::size_t x = 0; x < k; ++x) {
      for (std::size_t y = 0; y < k; ++y) {
        double acc = 0.0;
        for (std::size_t p = 0; p < probe; ++p) acc += cols[x][p] * cols[y][p];
        worst_cov = std::max(worst_cov, std::abs(acc / static_cast<double>(probe) -
                                                 r(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y))));
      }
    }
    res.report.metrics["base_max_abs_mean"] = worst_mean;
    res.report.metrics["base_max_cov_error"] = worst_cov;
  }

  auto limit_paths = simulate_gaussian(factorize(r), n_paths, seed, 1000, exec);
  std::vector<double> limit(n_paths);
  for (std::size_t p = 0; p < n_paths; ++p) limit[p] = limit_paths.values.row(static_cast<Eigen::Index>(p)).maxCoeff();

  for (std::size_t i = 0; i < n_list.size(); ++i) {
    const auto s = clt_sup_samples(base, n_list[i], n_paths, seed, 1 + i, exec);
    const double ks = ks_two_sample(s, limit);
    res.rows.push_back({n_list[i], ks});
    res.report.metrics["ks_n" + std::to_string(n_list[i])] = ks;
  }
  const auto& first = res.rows.front();
  const auto& last = res.rows.back();
  res.report.checks.push_back({"ks_below_threshold@n=" + std::to_string(last.n), threshold, last.ks, 0.0,
                               classify_upper_bound(threshold, last.ks, 0.0)});
  res.report.checks.push_back({"ks_not_above_smallest_n", first.ks, last.ks, 0.0,
                               classify_upper_bound(first.ks, last.ks, 0.0)});
  return res;
}

// ---------------------------------------------------------------------------

EntropyTailRun entropy_tail_pipeline(const SamplePaths& paths, const MetricMeasureSpace& space,
                                     const YoungFunction& phi, std::span<const double> u_grid,
                                     const Execution& exec) {
  EntropyTailRun run;
  const auto normalized = normalize_unit_orlicz(paths, phi);
  run.setup.divisor = normalized.divisor;
  const auto d_phi = natural_distance(normalized.paths, phi, exec);
  run.setup.diameter = diameter(space, &d_phi.values());
  run.setup.k = delta2_constant(phi, 1e-3, 1e6);
  if (run.setup.k.diverging) {
    throw DomainError("entropy tail bound needs a finite Delta-2 constant; " + phi.describe() +
                      " fails the Delta-2 condition");
  }
  run.setup.c2 = c2_constant(phi, run.setup.k.value);
  const DistanceMatrix w(WDistance(space, phi, d_phi).matrix(1.0), DistanceMatrix::Provenance::w_metric, "V=1");
  run.setup.w_matrix = w.values();
  const EntropyCurve curve(space, &w.values());
  run.setup.entropy_thresholds = curve.thresholds();
  run.setup.entropy_counts = curve.counts();
  run.setup.greedy = curve.greedy();
  const EntropyFunction entropy = [&curve](double delta) { return static_cast<double>(curve.count(delta)); };

  run.one_sided = empirical_tail(normalized.paths, u_grid, false);
  run.two_sided = empirical_tail(normalized.paths, u_grid, true);
  for (double u : u_grid) {
    run.one_sided_bounds.push_back(tail_bound_entropy(u, phi, run.setup.k, entropy, run.setup.diameter, false));
    run.two_sided_bounds.push_back(tail_bound_entropy(u, phi, run.setup.k, entropy, run.setup.diameter, true));
  }
  const auto one = verify_tail_bounds(run.one_sided, run.one_sided_bounds, "Q");
  const auto two = verify_tail_bounds(run.two_sided, run.two_sided_bounds, "Q_abs");
  run.report.name = "entropy_tail";
  run.report.checks = one.checks;
  run.report.checks.insert(run.report.checks.end(), two.checks.begin(), two.checks.end());
  run.report.metrics = {{"divisor", run.setup.divisor},
                        {"diameter", run.setup.diameter},
                        {"k_delta2", run.setup.k.value},
                        {"c2", run.setup.c2},
                        {"min_slack_one_sided", one.metrics.at("min_slack")},
                        {"min_slack_two_sided", two.metrics.at("min_slack")}};
  return run;
}

}  // namespace mmchain
