#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mmchain/common.hpp"
#include "mmchain/mspace.hpp"
#include "mmchain/orlicz.hpp"
#include "mmchain/sample_paths.hpp"

namespace mmchain {

/// Relative tolerance used when checking the triangle inequality of derived
/// distance matrices.
inline constexpr double kDerivedTriangleTol = 1e-9;

class DistanceMatrix {
 public:
  enum class Provenance { given, natural, w_metric, common_envelope };

  /// Validates symmetry, zero diagonal, nonnegativity and the triangle
  /// inequality within kDerivedTriangleTol.
  DistanceMatrix(Eigen::MatrixXd values, Provenance provenance, std::string detail = {});

  const Eigen::MatrixXd& values() const noexcept { return values_; }
  Provenance provenance() const noexcept { return provenance_; }
  const std::string& detail() const noexcept { return detail_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  std::vector<std::string> warnings;

 private:
  Eigen::MatrixXd values_;
  Provenance provenance_;
  std::string detail_;
};

std::string provenance_name(DistanceMatrix::Provenance p);

/// Long-form CSV with columns i, j, distance over i < j.
std::string distance_matrix_csv(const DistanceMatrix& d);

/// d(i, j) = Luxemburg norm of the per-path increments |xi(x_i) - xi(x_j)|.
DistanceMatrix natural_distance(const SamplePaths& paths, const YoungFunction& phi,
                                const Execution& exec = {});

/// How the diagonal x1 = x2 of the double integral is treated. On a space
/// with atoms the diagonal carries m x m mass sum_i m_i^2.
enum class DiagonalPolicy {
  /// Sum over ordered pairs i != j with weights m_i m_j.
  exclude,
  /// Same sum divided by the off-diagonal mass 1 - sum_i m_i^2.
  condition,
};

/// V(d) for one function on the space: sum over ordered pairs i != j of
/// m_i m_j Phi(|f_i - f_j| / d_ij). A zero distance with a nonzero increment
/// gives +inf.
double v_functional(std::span<const double> values, const MetricMeasureSpace& space,
                    const YoungFunction& phi, const DistanceMatrix& d,
                    DiagonalPolicy policy = DiagonalPolicy::exclude);

/// The per-path value Z of V(d) for every path.
std::vector<double> v_per_path(const SamplePaths& paths, const MetricMeasureSpace& space,
                               const YoungFunction& phi, const DistanceMatrix& d,
                               DiagonalPolicy policy, const Execution& exec = {});

/// Exact evaluation of
///   w(x1, x2) = 6 int_0^{d(x1,x2)} [Phi^{-1}(4V / m(B(r,x1))^2) + Phi^{-1}(4V / m(B(r,x2))^2)] dr
/// with balls taken in d. r -> m(B(r, x)) is a step function with jumps at the
/// sorted distances from x, so the integral is a finite sum.
class WDistance {
 public:
  WDistance(const MetricMeasureSpace& space, const YoungFunction& phi, const DistanceMatrix& d);

  double operator()(double v, std::size_t x1, std::size_t x2) const;
  Eigen::MatrixXd matrix(double v) const;

  /// Fills `cumulative` with int_0^{r} Phi^{-1}(4V / m(B(s,x))^2) ds at every
  /// breakpoint r of every x; pair() then answers in O(1).
  void cumulative(double v, std::vector<double>& cumulative) const;
  double pair(const std::vector<double>& cumulative, std::size_t x1, std::size_t x2) const;

  std::size_t size() const noexcept { return n_; }

 private:
  double level_integrand(double v, double mass) const;

  YoungFunction phi_;
  std::size_t n_ = 0;
  std::vector<std::size_t> offset_;
  std::vector<double> radius_;
  std::vector<double> mass_;
  std::vector<std::size_t> rank_;
};

double w_distance(const MetricMeasureSpace& space, const YoungFunction& phi, const DistanceMatrix& d,
                  double v, std::size_t x1, std::size_t x2);

struct MinorizingVerdict {
  double v = 1.0;
  bool is_minorizing = false;
  bool is_majorizing = false;
  double max_w = 0.0;
  Eigen::MatrixXd w_matrix;
};

/// w with V = 1 over every pair; minorizing iff every entry is finite.
MinorizingVerdict minorizing_verdict(const MetricMeasureSpace& space, const YoungFunction& phi,
                                     const DistanceMatrix& d);

void to_json(nlohmann::json& j, const MinorizingVerdict& verdict);

/// Entrywise maximum.
DistanceMatrix common_distance(std::span<const DistanceMatrix> distances);

}  // namespace mmchain
