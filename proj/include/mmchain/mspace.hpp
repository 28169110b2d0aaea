#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mmchain/common.hpp"
#include "mmchain/glspace.hpp"

namespace mmchain {

/// Throws ValidationError unless d is square, symmetric, zero on the diagonal,
/// nonnegative and satisfies the triangle inequality within
/// tol * max(1, largest finite entry). Infinite entries are allowed.
void validate_distance_matrix(const Eigen::MatrixXd& d, double tol, const std::string& what);

/// Regular grid on [0,1]^dim with per_side points per axis.
struct GridSpec {
  enum class Metric { l2, linf };
  std::size_t dim = 1;
  std::size_t per_side = 11;
  Metric metric = Metric::l2;
  /// Empty means uniform weights.
  std::vector<double> weights;
};

/// Finite metric space with a probability measure, validated on construction.
class MetricMeasureSpace {
 public:
  MetricMeasureSpace(Eigen::MatrixXd dist, std::vector<double> weights, std::string id = "custom");

  static MetricMeasureSpace grid(const GridSpec& spec, std::string id = "");

  std::size_t size() const noexcept { return weights_.size(); }
  double distance(std::size_t i, std::size_t j) const {
    return dist_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  const Eigen::MatrixXd& distances() const noexcept { return dist_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::string& id() const noexcept { return id_; }
  /// Rows are points; present only for grid spaces.
  const std::optional<Eigen::MatrixXd>& coordinates() const noexcept { return coords_; }
  std::optional<std::size_t> ambient_dim() const noexcept { return dim_; }

 private:
  Eigen::MatrixXd dist_;
  std::vector<double> weights_;
  std::string id_;
  std::optional<Eigen::MatrixXd> coords_;
  std::optional<std::size_t> dim_;
};

MetricMeasureSpace metric_measure_space_from_json(const nlohmann::json& j);

/// m(B(r, x)) with the closed ball taken in `d` (the space metric when null).
double ball_measure(const MetricMeasureSpace& space, std::size_t x, double r,
                    const Eigen::MatrixXd* d = nullptr);

struct CoverResult {
  std::size_t count = 0;
  bool greedy = false;
  std::vector<std::size_t> centers;
};

/// Number of closed eps-balls centred at points of the space needed to cover
/// it. Exact for n <= kExactCoverLimit, otherwise the best greedy cover over
/// radii up to eps (flagged).
inline constexpr std::size_t kExactCoverLimit = 24;
CoverResult covering_number(const MetricMeasureSpace& space, double eps,
                            const Eigen::MatrixXd* d = nullptr);

/// Greedy max-coverage cover at radius eps, without the monotone repair.
CoverResult greedy_cover(const Eigen::MatrixXd& d, double eps);
/// Exact minimum cover by branch and bound (n <= 64).
CoverResult exact_cover(const Eigen::MatrixXd& d, double eps);

double entropy(const MetricMeasureSpace& space, double eps, const Eigen::MatrixXd* d = nullptr);

double diameter(const MetricMeasureSpace& space, const Eigen::MatrixXd* d = nullptr);

/// eps -> N(X, d, eps) precomputed at every distinct distance, so repeated
/// queries are lookups. Nonincreasing by construction.
class EntropyCurve {
 public:
  EntropyCurve(const MetricMeasureSpace& space, const Eigen::MatrixXd* d = nullptr);

  std::size_t count(double eps) const;
  bool greedy() const noexcept { return greedy_; }
  const std::vector<double>& thresholds() const noexcept { return thresholds_; }
  const std::vector<std::size_t>& counts() const noexcept { return counts_; }

 private:
  std::vector<double> thresholds_;
  std::vector<std::size_t> counts_;
  bool greedy_ = false;
};

/// Sorted distinct positive distances plus the midpoints between them.
std::vector<double> default_r_grid(const MetricMeasureSpace& space);

struct ThetaCertificateRow {
  double r = 0.0;
  std::size_t x = 0;
  /// m(B(r,x))^2 - r^theta / C(theta); nonnegative up to 1e-12.
  double slack = 0.0;
};

struct ThetaFit {
  double theta = 0.0;
  double c_theta = 0.0;
  double objective = 0.0;
  std::vector<ThetaCertificateRow> certificate;
  std::vector<double> theta_grid;
  std::vector<double> objective_grid;
};

/// Smallest C with m(B(r,x))^2 >= r^theta / C for all r in r_grid and all x.
double theta_constant(const MetricMeasureSpace& space, double theta, const std::vector<double>& r_grid);

/// Scans 64 log-spaced theta values in [0.1, 2k] for ambient dimension k
/// ([0.1, 20] when unknown) and keeps the one minimizing
/// 12 D fundamental(psi_theta, 4 C(theta) D^{-theta}); psi defaults to sqrt(p).
ThetaFit fit_theta(const MetricMeasureSpace& space, std::vector<double> r_grid = {},
                   const std::optional<PsiFunction>& psi = {});

/// Recomputes every certificate row from scratch and checks the inequality.
bool replay_certificate(const MetricMeasureSpace& space, const ThetaFit& fit);

}  // namespace mmchain
