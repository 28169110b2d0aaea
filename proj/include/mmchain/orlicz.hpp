#pragma once

#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mmchain/common.hpp"
#include "mmchain/sample_paths.hpp"

namespace mmchain {

/// A Young-Orlicz function: continuous, convex, strictly increasing on
/// [0, inf) with Phi(0) = 0 and Phi(z) -> inf.
///
/// Parametric families have closed-form values and inverses. The tabulated
/// family interpolates (z, Phi(z)) with a monotone piecewise cubic so the
/// interpolant stays strictly increasing between the knots.
class YoungFunction {
 public:
  enum class Family { power, exp_power, exp_quadratic, tabulated };

  /// Phi(z) = z^p, p >= 1.
  static YoungFunction power(double p);
  /// Phi(z) = exp(z^q / q) - 1, q >= 1.
  static YoungFunction exp_power(double q);
  /// Phi(z) = exp(z^2 / 2) - 1.
  static YoungFunction exp_quadratic();
  /// Knots must start at (0, 0) and be strictly increasing in both columns.
  static YoungFunction tabulated(std::vector<double> z, std::vector<double> values);

  Family family() const noexcept { return family_; }
  /// p for power, q for exp_power; 2 for exp_quadratic; 0 for tabulated.
  double parameter() const noexcept { return param_; }

  double operator()(double z) const;
  /// sup{z >= 0 : Phi(z) <= w}. For the tabulated family the result is capped
  /// at the top of the table.
  double inverse(double w) const;

  /// Largest z where Phi is defined (inf for parametric families).
  double domain_end() const noexcept;
  bool has_finite_inverse_cap() const noexcept { return family_ == Family::tabulated; }

  const std::vector<double>& knots() const noexcept { return z_; }
  const std::vector<double>& knot_values() const noexcept { return v_; }

  std::string describe() const;

 private:
  struct Table;

  YoungFunction(Family f, double param) : family_(f), param_(param) {}
  void validate_shape() const;

  Family family_;
  double param_ = 0.0;
  std::vector<double> z_;
  std::vector<double> v_;
  std::shared_ptr<const Table> table_;
};

void to_json(nlohmann::json& j, const YoungFunction& phi);
void from_json(const nlohmann::json& j, YoungFunction& phi);
YoungFunction young_function_from_json(const nlohmann::json& j);

double eval_phi(const YoungFunction& phi, double z);
double invert_phi(const YoungFunction& phi, double w);

/// Weighted Orlicz modular sum_i w_i Phi(|s_i| / c). Empty weights mean equal
/// weights 1/n.
double orlicz_modular(std::span<const double> samples,
                      std::span<const double> weights,
                      const YoungFunction& phi, double c);

/// Luxemburg norm inf{c > 0 : sum_i w_i Phi(|s_i| / c) <= 1}.
///
/// Returns 0 iff every sample is 0. Otherwise the modular equals 1 at the
/// returned c to within 1e-8. Empty weights mean equal weights.
double luxemburg_norm(std::span<const double> samples,
                      std::span<const double> weights,
                      const YoungFunction& phi);
double luxemburg_norm(std::span<const double> samples, const YoungFunction& phi);

/// Piecewise-linear function on a strictly increasing grid. When constructed
/// with validation, the slopes must be nondecreasing (discrete convexity).
class ConvexGridFunction {
 public:
  static constexpr double kConvexitySlack = 1e-12;

  ConvexGridFunction(std::vector<double> x, std::vector<double> y,
                     bool validate_convexity = true);

  template <class F>
  static ConvexGridFunction sample(std::vector<double> x, F&& f) {
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
    return ConvexGridFunction(std::move(x), std::move(y));
  }

  const std::vector<double>& abscissae() const noexcept { return x_; }
  const std::vector<double>& values() const noexcept { return y_; }
  std::size_t size() const noexcept { return x_.size(); }
  double front() const { return x_.front(); }
  double back() const { return x_.back(); }

  /// Linear interpolation; RangeError outside the grid hull.
  double operator()(double x) const;

 private:
  std::vector<double> x_;
  std::vector<double> y_;
};

void to_json(nlohmann::json& j, const ConvexGridFunction& g);
ConvexGridFunction convex_grid_function_from_json(const nlohmann::json& j);

/// Greatest convex minorant of the points (x_i, y_i) evaluated back on x.
ConvexGridFunction convex_minorant(std::vector<double> x, std::vector<double> y);

/// g*(x) = sup_y (x y - g(y)) over the grid of g, evaluated on x_grid.
ConvexGridFunction fenchel_conjugate(const ConvexGridFunction& g,
                                     std::span<const double> x_grid);

/// Pointwise gap bound between g and its discrete biconjugate through x_grid:
/// (max x spacing) * (max y spacing), plus slack for the slopes outside the
/// x_grid hull.
double biconjugate_tolerance(const ConvexGridFunction& g,
                             std::span<const double> x_grid);

struct Delta2Estimate {
  double value = 0.0;
  bool diverging = false;
  double arg_x = 0.0;
  double arg_y = 0.0;
  /// Relative growth of the running sup across the last octave of the hull.
  double boundary_growth = 0.0;
};

/// sup over a log grid in [lo, hi]^2 of Phi^{-1}(xy) / (Phi^{-1}(x) + Phi^{-1}(y)).
/// Flags divergence when the sup still grows by more than 1% across the last
/// octave below hi.
Delta2Estimate delta2_constant(const YoungFunction& phi, double lo, double hi,
                               std::size_t points_per_decade = 32);

struct NaturalPhi {
  ConvexGridFunction phi;
  std::vector<std::string> warnings;
};

/// lambda -> log max_x mean_paths exp(lambda * xi(x)), on a grid symmetric
/// about zero, projected onto its greatest convex minorant.
NaturalPhi natural_phi(const SamplePaths& paths, std::span<const double> lambda_grid);

}  // namespace mmchain
