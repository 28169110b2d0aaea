#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmchain/common.hpp"
#include "mmchain/orlicz.hpp"

namespace mmchain {

/// Largest p used when a support is unbounded above.
inline constexpr double kPMax = 1e4;
/// Number of points in the geometric p grid over a support interior.
inline constexpr std::size_t kPGridPoints = 512;

/// Support of a psi function. Open (lower, upper) unless closed is set;
/// a point support has lower == upper and is always closed.
struct Support {
  double lower = 1.0;
  double upper = kInf;
  bool closed = false;

  bool is_point() const noexcept { return lower == upper; }
  bool contains(double p) const noexcept {
    return closed ? (p >= lower && p <= upper) : (p > lower && p < upper);
  }
};

/// Generator of a Grand Lebesgue space: a positive function on its support,
/// infinite (absent) outside.
class PsiFunction {
 public:
  enum class Kind { power, point_mass, tabulated, theta_damped, rosenthal, envelope };

  /// psi(p) = scale * p^{1/q} on (lower, upper).
  static PsiFunction power(double q, double lower = 1.0, double upper = kInf, double scale = 1.0);
  /// psi(r) = scale, absent elsewhere; the Gpsi norm is the L_r norm for scale 1.
  static PsiFunction point_mass(double r, double scale = 1.0);
  /// Linear interpolation on the closed hull of the knots.
  static PsiFunction tabulated(std::vector<double> p, std::vector<double> values);
  /// (1 - theta/p) psi(p) on (max(A, theta), B).
  static PsiFunction theta_damped(const PsiFunction& base, double theta);
  /// [p / log(p + 1)] psi(p), same support.
  static PsiFunction rosenthal(const PsiFunction& base);
  /// Pointwise max over members, on the intersection of their supports.
  static PsiFunction envelope(std::vector<PsiFunction> members);

  Kind kind() const noexcept { return kind_; }
  const Support& support() const noexcept { return support_; }
  double parameter() const noexcept { return param_; }
  double scale() const noexcept { return scale_; }

  std::optional<double> operator()(double p) const;

  /// Grid used for every sup or inf over p: the support point for point masses,
  /// otherwise kPGridPoints geometric points strictly inside the support with
  /// relative margins 1e-6, capped at kPMax.
  std::vector<double> interior_grid() const;

  std::string describe() const;

  friend void to_json(nlohmann::json& j, const PsiFunction& psi);

 private:
  PsiFunction(Kind kind, Support support) : kind_(kind), support_(support) {}
  void check_positive() const;

  Kind kind_;
  Support support_;
  double param_ = 0.0;
  double scale_ = 1.0;
  std::vector<double> knots_;
  std::vector<double> values_;
  std::shared_ptr<const std::vector<PsiFunction>> bases_;
};

PsiFunction psi_function_from_json(const nlohmann::json& j);

/// |f|_p on a grid of exponents, with the delta-method standard error of each
/// moment when it came from samples.
struct MomentProfile {
  std::vector<double> p_grid;
  std::vector<double> moments;
  std::vector<double> standard_errors;
  std::vector<std::string> warnings;
};

/// moments[i] = (sum_j w_j |s_j|^{p_i})^{1/p_i}. A drop in p beyond 3 SE is
/// recorded as a warning. Empty weights mean equal weights.
MomentProfile empirical_moments(std::span<const double> samples, std::span<const double> weights,
                                std::span<const double> p_grid);

std::string moment_profile_csv(const MomentProfile& profile);

struct GpsiNorm {
  double value = 0.0;
  double argmax = 0.0;
};

/// max over profile exponents inside the support of |f|_p / psi(p); ties go
/// to the smallest p.
GpsiNorm gpsi_norm(const MomentProfile& profile, const PsiFunction& psi);

struct FundamentalValue {
  double value = 0.0;
  double argmax = 0.0;
  bool argument_above_one = false;
};

/// sup_p delta^{1/p} / psi(p) over the interior grid, delta in (0, 1].
double fundamental_function(const PsiFunction& psi, double delta);

/// Same sup for any delta > 0; flags delta > 1.
FundamentalValue fundamental_sup(const PsiFunction& psi, double delta);

/// psi_F(p) = max over profiles of |xi(t)|_p, tabulated on the shared grid.
PsiFunction natural_psi(std::span<const MomentProfile> profiles);

/// Throws SupportError when B <= max(A, theta).
PsiFunction psi_theta(const PsiFunction& psi, double theta);

/// psi(p) = p / phi^{-1}(p) tabulated on [2, p_max], with phi^{-1} the inverse
/// of the increasing branch of phi on its grid. p_max defaults to the largest
/// value of phi on that branch.
PsiFunction psi_from_bphi(const ConvexGridFunction& phi, std::optional<double> p_max = {});

PsiFunction rosenthal_psi(const PsiFunction& psi);

/// min(1, 2 exp(-h*(log(z / norm)))) with h(p) = p log psi(p) conjugated on
/// the interior grid. Requires z >= norm > 0.
double tail_bound_from_gpsi(const PsiFunction& psi, double norm, double z);

/// Orlicz function reconstructed from psi: exp(h*(log|u|)) for |u| > 3 and
/// small_u_constant * u^2 below.
double orlicz_from_psi(const PsiFunction& psi, double u, double small_u_constant);

}  // namespace mmchain
