#include "mmchain/mspace.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <numeric>

#include "mmchain/io.hpp"

namespace mmchain {

void validate_distance_matrix(const Eigen::MatrixXd& d, double tol, const std::string& what) {
  const auto n = d.rows();
  if (d.cols() != n || n == 0) throw ValidationError(what + " must be a non-empty square matrix");
  double scale = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = d(i, j);
      if (std::isnan(v) || v < 0.0) throw ValidationError(what + " has a negative or NaN entry");
      if (v != d(j, i)) throw ValidationError(what + " is not symmetric");
      if (std::isfinite(v)) scale = std::max(scale, v);
    }
    if (d(i, i) != 0.0) throw ValidationError(what + " has a nonzero diagonal");
  }
  const double slack = tol * scale;
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double dik = d(i, k);
      if (std::isinf(dik)) continue;
      for (Eigen::Index j = i + 1; j < n; ++j) {
        if (d(i, j) > dik + d(k, j) + slack) {
          throw ValidationError(what + " violates the triangle inequality at (" +
                                std::to_string(i) + ", " + std::to_string(j) + ") via " +
                                std::to_string(k));
        }
      }
    }
  }
}

MetricMeasureSpace::MetricMeasureSpace(Eigen::MatrixXd dist, std::vector<double> weights,
                                       std::string id)
    : dist_(std::move(dist)), weights_(std::move(weights)), id_(std::move(id)) {
  if (static_cast<std::size_t>(dist_.rows()) != weights_.size()) {
    throw ArgumentError("distance matrix and weights differ in size");
  }
  validate_distance_matrix(dist_, 1e-12, "space distance matrix");
  for (double w : weights_) {
    if (!std::isfinite(w)) throw ArgumentError("weights must be finite");
  }
  require_probability_vector(weights_);
}

MetricMeasureSpace MetricMeasureSpace::grid(const GridSpec& spec, std::string id) {
  if (spec.dim == 0 || spec.per_side == 0) throw ArgumentError("grid needs dim >= 1 and per_side >= 1");
  std::size_t n = 1;
  for (std::size_t k = 0; k < spec.dim; ++k) n *= spec.per_side;
  Eigen::MatrixXd coords(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(spec.dim));
  const double step = spec.per_side > 1 ? 1.0 / static_cast<double>(spec.per_side - 1) : 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t rem = i;
    for (std::size_t k = 0; k < spec.dim; ++k) {
      coords(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          static_cast<double>(rem % spec.per_side) * step;
      rem /= spec.per_side;
    }
  }
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < d.rows(); ++j) {
      const Eigen::VectorXd diff = (coords.row(i) - coords.row(j)).transpose();
      const double v = spec.metric == GridSpec::Metric::l2 ? diff.norm() : diff.cwiseAbs().maxCoeff();
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  std::vector<double> w = spec.weights;
  if (w.empty()) w.assign(n, 1.0 / static_cast<double>(n));
  if (id.empty()) id = "grid" + std::to_string(spec.dim) + "d_" + std::to_string(spec.per_side);
  MetricMeasureSpace space(std::move(d), std::move(w), std::move(id));
  space.coords_ = std::move(coords);
  space.dim_ = spec.dim;
  return space;
}

MetricMeasureSpace metric_measure_space_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ArgumentError("space config must be an object");
  const auto kind = j.value("kind", std::string("grid"));
  for (const auto& [key, value] : j.items()) {
    static const std::vector<std::string> grid_keys = {"kind", "dim", "per_side", "metric", "weights", "id"};
    static const std::vector<std::string> matrix_keys = {"kind", "dist", "weights", "id"};
    const auto& allowed = kind == "grid" ? grid_keys : matrix_keys;
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ArgumentError("space: unknown key '" + key + "'");
    }
  }
  std::vector<double> weights;
  if (j.contains("weights") && !(j.at("weights").is_string() && j.at("weights") == "uniform")) {
    weights = j.at("weights").get<std::vector<double>>();
  }
  const auto id = j.value("id", std::string());
  if (kind == "grid") {
    GridSpec spec;
    spec.dim = j.value("dim", std::size_t{1});
    spec.per_side = j.value("per_side", std::size_t{11});
    const auto metric = j.value("metric", std::string("l2"));
    if (metric == "l2") {
      spec.metric = GridSpec::Metric::l2;
    } else if (metric == "linf") {
      spec.metric = GridSpec::Metric::linf;
    } else {
      throw ArgumentError("space: metric must be 'l2' or 'linf'");
    }
    spec.weights = std::move(weights);
    return MetricMeasureSpace::grid(spec, id);
  }
  if (kind == "matrix") {
    const auto rows = j.at("dist").get<std::vector<std::vector<double>>>();
    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd d(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != n) {
        throw ArgumentError("space: distance matrix must be square");
      }
      for (Eigen::Index k = 0; k < n; ++k) d(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
    }
    if (weights.empty()) weights.assign(rows.size(), 1.0 / static_cast<double>(rows.size()));
    return MetricMeasureSpace(std::move(d), std::move(weights), id.empty() ? "custom" : id);
  }
  throw ArgumentError("space: kind must be 'grid' or 'matrix'");
}

namespace {

const Eigen::MatrixXd& pick(const MetricMeasureSpace& space, const Eigen::MatrixXd* d) {
  if (!d) return space.distances();
  if (d->rows() != static_cast<Eigen::Index>(space.size()) || d->cols() != d->rows()) {
    throw ArgumentError("distance override does not match the space size");
  }
  return *d;
}

using Mask = std::vector<std::uint64_t>;

std::vector<Mask> ball_masks(const Eigen::MatrixXd& d, double eps) {
  const auto n = static_cast<std::size_t>(d.rows());
  const std::size_t words = (n + 63) / 64;
  std::vector<Mask> balls(n, Mask(words, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) <= eps) {
        balls[i][j / 64] |= std::uint64_t{1} << (j % 64);
      }
    }
  }
  return balls;
}

std::vector<double> distinct_finite_distances(const Eigen::MatrixXd& d) {
  std::vector<double> out{0.0};
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < d.cols(); ++j) {
      if (std::isfinite(d(i, j)) && d(i, j) > 0.0) out.push_back(d(i, j));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

double ball_measure(const MetricMeasureSpace& space, std::size_t x, double r,
                    const Eigen::MatrixXd* d) {
  const auto& dm = pick(space, d);
  if (x >= space.size()) throw ArgumentError("ball centre index out of range");
  double m = 0.0;
  for (std::size_t j = 0; j < space.size(); ++j) {
    if (dm(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(j)) <= r) m += space.weights()[j];
  }
  return std::min(m, 1.0);
}

CoverResult greedy_cover(const Eigen::MatrixXd& d, double eps) {
  const auto n = static_cast<std::size_t>(d.rows());
  const auto balls = ball_masks(d, eps);
  const std::size_t words = (n + 63) / 64;
  Mask uncovered(words, 0);
  for (std::size_t j = 0; j < n; ++j) uncovered[j / 64] |= std::uint64_t{1} << (j % 64);
  std::size_t remaining = n;
  CoverResult out;
  out.greedy = true;
  while (remaining > 0) {
    std::size_t best = 0;
    int best_gain = -1;
    for (std::size_t i = 0; i < n; ++i) {
      int gain = 0;
      for (std::size_t w = 0; w < words; ++w) gain += std::popcount(balls[i][w] & uncovered[w]);
      if (gain > best_gain) {
        best_gain = gain;
        best = i;
      }
    }
    for (std::size_t w = 0; w < words; ++w) uncovered[w] &= ~balls[best][w];
    remaining -= static_cast<std::size_t>(best_gain);
    out.centers.push_back(best);
  }
  out.count = out.centers.size();
  return out;
}

CoverResult exact_cover(const Eigen::MatrixXd& d, double eps) {
  const auto n = static_cast<std::size_t>(d.rows());
  if (n > 64) throw ArgumentError("exact cover supports at most 64 points");
  std::vector<std::uint64_t> balls(n);
  {
    const auto masks = ball_masks(d, eps);
    for (std::size_t i = 0; i < n; ++i) balls[i] = masks[i][0];
  }
  const std::uint64_t full = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
  CoverResult best = greedy_cover(d, eps);
  best.greedy = false;
  std::vector<std::size_t> chosen;

  std::function<void(std::uint64_t)> search = [&](std::uint64_t covered) {
    if (covered == full) {
      if (chosen.size() < best.count) {
        best.count = chosen.size();
        best.centers = chosen;
      }
      return;
    }
    const std::uint64_t open = full & ~covered;
    const int left = std::popcount(open);
    int max_gain = 0;
    for (std::size_t i = 0; i < n; ++i) max_gain = std::max(max_gain, std::popcount(balls[i] & open));
    const std::size_t lower = chosen.size() + static_cast<std::size_t>((left + max_gain - 1) / max_gain);
    if (lower >= best.count) return;
    const int e = std::countr_zero(open);
    std::vector<std::pair<int, std::size_t>> cands;
    for (std::size_t i = 0; i < n; ++i) {
      if (balls[i] >> e & 1U) cands.emplace_back(-std::popcount(balls[i] & open), i);
    }
    std::sort(cands.begin(), cands.end());
    for (const auto& [neg_gain, i] : cands) {
      chosen.push_back(i);
      search(covered | balls[i]);
      chosen.pop_back();
    }
  };
  search(0);
  std::sort(best.centers.begin(), best.centers.end());
  return best;
}

CoverResult covering_number(const MetricMeasureSpace& space, double eps, const Eigen::MatrixXd* d) {
  if (!(eps > 0.0)) throw ArgumentError("covering radius must be positive");
  const auto& dm = pick(space, d);
  if (d) validate_distance_matrix(dm, 1e-9, "covering distance override");
  if (space.size() <= kExactCoverLimit) return exact_cover(dm, eps);
  // Any greedy cover at a smaller radius also covers at eps; keep the best so
  // the count is nonincreasing in eps.
  CoverResult best = greedy_cover(dm, eps);
  for (double t : distinct_finite_distances(dm)) {
    if (t > eps) break;
    auto c = greedy_cover(dm, t);
    if (c.count < best.count) best = std::move(c);
  }
  return best;
}

double entropy(const MetricMeasureSpace& space, double eps, const Eigen::MatrixXd* d) {
  return std::log(static_cast<double>(covering_number(space, eps, d).count));
}

double diameter(const MetricMeasureSpace& space, const Eigen::MatrixXd* d) {
  const auto& dm = pick(space, d);
  return space.size() <= 1 ? 0.0 : dm.maxCoeff();
}

EntropyCurve::EntropyCurve(const MetricMeasureSpace& space, const Eigen::MatrixXd* d) {
  const auto& dm = pick(space, d);
  if (d) validate_distance_matrix(dm, 1e-9, "entropy distance override");
  thresholds_ = distinct_finite_distances(dm);
  greedy_ = space.size() > kExactCoverLimit;
  counts_.resize(thresholds_.size());
  std::size_t running = space.size();
  for (std::size_t k = 0; k < thresholds_.size(); ++k) {
    const auto c = greedy_ ? greedy_cover(dm, thresholds_[k]) : exact_cover(dm, thresholds_[k]);
    running = std::min(running, c.count);
    counts_[k] = running;
  }
}

std::size_t EntropyCurve::count(double eps) const {
  if (!(eps >= 0.0)) throw ArgumentError("covering radius must be nonnegative");
  auto it = std::upper_bound(thresholds_.begin(), thresholds_.end(), eps);
  return counts_[static_cast<std::size_t>(it - thresholds_.begin()) - 1];
}

std::vector<double> default_r_grid(const MetricMeasureSpace& space) {
  auto dist = distinct_finite_distances(space.distances());
  std::vector<double> out;
  for (std::size_t i = 1; i < dist.size(); ++i) {
    if (i > 1) out.push_back(0.5 * (dist[i - 1] + dist[i]));
    out.push_back(dist[i]);
  }
  return out;
}

namespace {

// Smallest ball measure at each r over all centres, with the argmin centre.
double min_ball_measure(const MetricMeasureSpace& space, double r) {
  double m = kInf;
  for (std::size_t x = 0; x < space.size(); ++x) m = std::min(m, ball_measure(space, x, r));
  return m;
}

void check_r_grid(const std::vector<double>& r_grid) {
  if (r_grid.empty()) throw ArgumentError("theta fit needs a non-empty r grid");
  for (double r : r_grid) {
    if (!(r > 0.0) || r > 1.0) throw ArgumentError("theta fit r grid must lie in (0, 1]");
  }
}

}  // namespace

double theta_constant(const MetricMeasureSpace& space, double theta, const std::vector<double>& r_grid) {
  check_r_grid(r_grid);
  double c = 0.0;
  for (double r : r_grid) {
    const double m = min_ball_measure(space, r);
    if (m <= 0.0) {
      throw DomainError("measure not theta-regular on grid: a ball of radius " + format_number(r) +
                        " has zero measure");
    }
    c = std::max(c, std::pow(r, theta) / (m * m));
  }
  return c;
}

ThetaFit fit_theta(const MetricMeasureSpace& space, std::vector<double> r_grid,
                   const std::optional<PsiFunction>& psi) {
  if (r_grid.empty()) {
    for (double r : default_r_grid(space)) {
      if (r <= 1.0) r_grid.push_back(r);
    }
    if (r_grid.empty()) r_grid.push_back(1.0);
  }
  check_r_grid(r_grid);
  std::vector<double> min_measure(r_grid.size());
  for (std::size_t k = 0; k < r_grid.size(); ++k) {
    min_measure[k] = min_ball_measure(space, r_grid[k]);
    if (min_measure[k] <= 0.0) {
      throw DomainError("measure not theta-regular on grid: a ball of radius " +
                        format_number(r_grid[k]) + " has zero measure");
    }
  }
  const double diam = diameter(space);
  if (!(diam > 0.0)) throw DomainError("theta fit needs a space with positive diameter");
  const PsiFunction base = psi.value_or(PsiFunction::power(2.0));
  const double top = space.ambient_dim() ? 2.0 * static_cast<double>(*space.ambient_dim()) : 20.0;

  ThetaFit fit;
  fit.theta_grid = geomspace(0.1, top, 64);
  fit.objective_grid.assign(fit.theta_grid.size(), kInf);
  bool any = false;
  for (std::size_t t = 0; t < fit.theta_grid.size(); ++t) {
    const double theta = fit.theta_grid[t];
    double c = 0.0;
    for (std::size_t k = 0; k < r_grid.size(); ++k) {
      c = std::max(c, std::pow(r_grid[k], theta) / (min_measure[k] * min_measure[k]));
    }
    double objective = kInf;
    try {
      const auto damped = psi_theta(base, theta);
      objective = 12.0 * diam * fundamental_sup(damped, 4.0 * c * std::pow(diam, -theta)).value;
    } catch (const SupportError&) {
      continue;
    }
    fit.objective_grid[t] = objective;
    if (!any || objective < fit.objective) {
      fit.objective = objective;
      fit.theta = theta;
      fit.c_theta = c;
      any = true;
    }
  }
  if (!any) throw SupportError("no theta in the scan leaves psi_theta a non-empty support");

  for (double r : r_grid) {
    for (std::size_t x = 0; x < space.size(); ++x) {
      const double m = ball_measure(space, x, r);
      fit.certificate.push_back({r, x, m * m - std::pow(r, fit.theta) / fit.c_theta});
    }
  }
  return fit;
}

bool replay_certificate(const MetricMeasureSpace& space, const ThetaFit& fit) {
  for (const auto& row : fit.certificate) {
    const double m = ball_measure(space, row.x, row.r);
    if (m * m < std::pow(row.r, fit.theta) / fit.c_theta - 1e-12) return false;
  }
  return true;
}

}  // namespace mmchain
