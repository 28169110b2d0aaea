#include "mmchain/chaining.hpp"

#include <algorithm>
#include <cmath>

#include "mmchain/io.hpp"

namespace mmchain {

DistanceMatrix::DistanceMatrix(Eigen::MatrixXd values, Provenance provenance, std::string detail)
    : values_(std::move(values)), provenance_(provenance), detail_(std::move(detail)) {
  validate_distance_matrix(values_, kDerivedTriangleTol, provenance_name(provenance_) + " distance");
}

std::string provenance_name(DistanceMatrix::Provenance p) {
  switch (p) {
    case DistanceMatrix::Provenance::given:
      return "given";
    case DistanceMatrix::Provenance::natural:
      return "natural";
    case DistanceMatrix::Provenance::w_metric:
      return "w_metric";
    case DistanceMatrix::Provenance::common_envelope:
      return "common_envelope";
  }
  return "unknown";
}

std::string distance_matrix_csv(const DistanceMatrix& d) {
  CsvTable t({"i", "j", "distance"});
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = i + 1; j < d.size(); ++j) {
      t.add_row({std::to_string(i), std::to_string(j), format_number(d(i, j))});
    }
  }
  return t.str();
}

DistanceMatrix natural_distance(const SamplePaths& paths, const YoungFunction& phi,
                                const Execution& exec) {
  const std::size_t n = paths.points();
  if (n < 2) throw ArgumentError("natural_distance needs at least two points");
  if (paths.paths() == 0) throw ArgumentError("natural_distance needs at least one path");
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  std::vector<double> norms(pairs.size());
  parallel_for(pairs.size(), exec, [&](std::size_t k) {
    const auto a = paths.column(pairs[k].first);
    const auto b = paths.column(pairs[k].second);
    std::vector<double> inc(a.size());
    for (std::size_t p = 0; p < a.size(); ++p) inc[p] = a[p] - b[p];
    norms[k] = luxemburg_norm(inc, phi);
  });
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  bool degenerate = true;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(pairs[k].first);
    const auto j = static_cast<Eigen::Index>(pairs[k].second);
    d(i, j) = d(j, i) = norms[k];
    degenerate = degenerate && norms[k] == 0.0;
  }
  DistanceMatrix out(std::move(d), DistanceMatrix::Provenance::natural, phi.describe());
  if (degenerate) out.warnings.push_back("degenerate field: every increment is zero");
  return out;
}

namespace {

struct PairTerm {
  std::size_t i;
  std::size_t j;
  double weight;
  double inv_distance;
};

std::vector<PairTerm> pair_terms(const MetricMeasureSpace& space, const DistanceMatrix& d,
                                 DiagonalPolicy policy) {
  const std::size_t n = space.size();
  if (d.size() != n) throw ArgumentError("distance matrix does not match the space size");
  double diag = 0.0;
  for (double w : space.weights()) diag += w * w;
  const double off = 1.0 - diag;
  double norm = 1.0;
  if (policy == DiagonalPolicy::condition) {
    if (!(off > 0.0)) throw DomainError("off-diagonal mass is zero; V cannot be conditioned");
    norm = 1.0 / off;
  }
  std::vector<PairTerm> terms;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // Ordered pairs (i, j) and (j, i) contribute equally.
      const double w = 2.0 * space.weights()[i] * space.weights()[j] * norm;
      if (w == 0.0) continue;
      const double dij = d(i, j);
      terms.push_back({i, j, w, dij > 0.0 ? 1.0 / dij : kInf});
    }
  }
  return terms;
}

double v_sum(std::span<const double> f, const std::vector<PairTerm>& terms, const YoungFunction& phi) {
  double sum = 0.0;
  for (const auto& t : terms) {
    const double inc = std::abs(f[t.i] - f[t.j]);
    if (inc == 0.0) continue;
    if (std::isinf(t.inv_distance)) return kInf;
    const double z = inc * t.inv_distance;
    if (z > phi.domain_end()) return kInf;
    sum += t.weight * phi(z);
  }
  return sum;
}

}  // namespace

double v_functional(std::span<const double> values, const MetricMeasureSpace& space,
                    const YoungFunction& phi, const DistanceMatrix& d, DiagonalPolicy policy) {
  if (values.size() != space.size()) throw ArgumentError("function values do not match the space size");
  return v_sum(values, pair_terms(space, d, policy), phi);
}

std::vector<double> v_per_path(const SamplePaths& paths, const MetricMeasureSpace& space,
                               const YoungFunction& phi, const DistanceMatrix& d,
                               DiagonalPolicy policy, const Execution& exec) {
  if (paths.points() != space.size()) throw ArgumentError("paths do not match the space size");
  const auto terms = pair_terms(space, d, policy);
  std::vector<double> z(paths.paths());
  const auto n = static_cast<Eigen::Index>(paths.points());
  parallel_for(paths.paths(), exec, [&](std::size_t p) {
    std::vector<double> row(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) row[static_cast<std::size_t>(i)] = paths.values(static_cast<Eigen::Index>(p), i);
    z[p] = v_sum(row, terms, phi);
  });
  return z;
}

// ---------------------------------------------------------------------------

WDistance::WDistance(const MetricMeasureSpace& space, const YoungFunction& phi, const DistanceMatrix& d)
    : phi_(phi), n_(space.size()) {
  if (d.size() != n_) throw ArgumentError("distance matrix does not match the space size");
  offset_.resize(n_ + 1, 0);
  rank_.resize(n_ * n_);
  std::vector<std::pair<double, std::size_t>> row(n_);
  for (std::size_t x = 0; x < n_; ++x) {
    for (std::size_t y = 0; y < n_; ++y) row[y] = {d(x, y), y};
    std::sort(row.begin(), row.end());
    offset_[x] = radius_.size();
    double mass = 0.0;
    std::size_t k = 0;
    while (k < n_) {
      const double r = row[k].first;
      const std::size_t level = radius_.size() - offset_[x];
      while (k < n_ && row[k].first == r) {
        mass += space.weights()[row[k].second];
        rank_[x * n_ + row[k].second] = level;
        ++k;
      }
      radius_.push_back(r);
      mass_.push_back(std::min(mass, 1.0));
    }
  }
  offset_[n_] = radius_.size();
}

double WDistance::level_integrand(double v, double mass) const {
  if (mass <= 0.0) return phi_.inverse(kInf);
  return phi_.inverse(4.0 * v / (mass * mass));
}

void WDistance::cumulative(double v, std::vector<double>& out) const {
  if (!(v >= 0.0)) throw ArgumentError("w-distance needs V >= 0");
  out.assign(radius_.size(), 0.0);
  for (std::size_t x = 0; x < n_; ++x) {
    double acc = 0.0;
    for (std::size_t k = offset_[x]; k + 1 < offset_[x + 1]; ++k) {
      const double length = radius_[k + 1] - radius_[k];
      const double h = level_integrand(v, mass_[k]);
      if (h > 0.0 && length > 0.0) acc += h * length;
      out[k + 1] = acc;
    }
  }
}

double WDistance::pair(const std::vector<double>& c, std::size_t x1, std::size_t x2) const {
  if (x1 == x2) return 0.0;
  return 6.0 * (c[offset_[x1] + rank_[x1 * n_ + x2]] + c[offset_[x2] + rank_[x2 * n_ + x1]]);
}

double WDistance::operator()(double v, std::size_t x1, std::size_t x2) const {
  if (x1 >= n_ || x2 >= n_) throw ArgumentError("w-distance point index out of range");
  if (x1 == x2) return 0.0;
  std::vector<double> c;
  cumulative(v, c);
  return pair(c, x1, x2);
}

Eigen::MatrixXd WDistance::matrix(double v) const {
  std::vector<double> c;
  cumulative(v, c);
  const auto n = static_cast<Eigen::Index>(n_);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      const double val = pair(c, i, j);
      w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = val;
      w(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = val;
    }
  }
  return w;
}

double w_distance(const MetricMeasureSpace& space, const YoungFunction& phi, const DistanceMatrix& d,
                  double v, std::size_t x1, std::size_t x2) {
  if (!(v > 0.0)) throw ArgumentError("w_distance needs V > 0");
  return WDistance(space, phi, d)(v, x1, x2);
}

MinorizingVerdict minorizing_verdict(const MetricMeasureSpace& space, const YoungFunction& phi,
                                     const DistanceMatrix& d) {
  MinorizingVerdict out;
  out.v = 1.0;
  out.w_matrix = WDistance(space, phi, d).matrix(out.v);
  out.max_w = space.size() > 1 ? out.w_matrix.maxCoeff() : 0.0;
  out.is_minorizing = std::isfinite(out.max_w);
  // On a finite space the pairwise sup is a max, so the two notions agree.
  out.is_majorizing = out.is_minorizing;
  return out;
}

void to_json(nlohmann::json& j, const MinorizingVerdict& verdict) {
  std::vector<std::vector<std::string>> rows;
  for (Eigen::Index i = 0; i < verdict.w_matrix.rows(); ++i) {
    std::vector<std::string> row;
    for (Eigen::Index k = 0; k < verdict.w_matrix.cols(); ++k) row.push_back(format_number(verdict.w_matrix(i, k)));
    rows.push_back(std::move(row));
  }
  j = {{"v", verdict.v},
       {"is_minorizing", verdict.is_minorizing},
       {"is_majorizing", verdict.is_majorizing},
       {"max_w", format_number(verdict.max_w)},
       {"w_matrix", rows}};
}

DistanceMatrix common_distance(std::span<const DistanceMatrix> distances) {
  if (distances.empty()) throw ArgumentError("common_distance needs at least one matrix");
  Eigen::MatrixXd out = distances.front().values();
  for (const auto& d : distances) {
    if (d.values().rows() != out.rows()) throw ArgumentError("common_distance inputs differ in shape");
    out = out.cwiseMax(d.values());
  }
  return DistanceMatrix(std::move(out), DistanceMatrix::Provenance::common_envelope);
}

}  // namespace mmchain
