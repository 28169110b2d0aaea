#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmchain/common.hpp"
#include "mmchain/glspace.hpp"
#include "mmchain/orlicz.hpp"

namespace mmchain {

enum class FormulaId {
  holder_lp,
  holder_gpsi,
  sup_norm_gpsi,
  sup_norm_lp,
  entropy_tail,
  entropy_tail_two_sided,
  logconvex_tail,
  subgaussian_poly_tail,
  exp_entropy_tail,
};

std::string formula_name(FormulaId id);

/// Grid scanned by an inf/sup bound and the position of the optimum.
struct OptimizerTrace {
  std::vector<double> grid;
  std::vector<double> values;
  double argopt = 0.0;
  std::size_t index = 0;
};

struct BoundResult {
  double value = 0.0;
  FormulaId formula = FormulaId::holder_lp;
  std::map<std::string, double> inputs;
  std::optional<OptimizerTrace> trace;
  std::vector<std::string> notes;
};

void to_json(nlohmann::json& j, const BoundResult& r);

/// delta -> covering number N(X, w, delta).
using EntropyFunction = std::function<double(double)>;

/// 12 (4 Z C)^{1/p} d^{1 - theta/p} / (1 - theta/p), with Z a caller-chosen
/// level of the unit-mean variable (1 for the mean, 1/alpha for Markov).
BoundResult holder_bound_lp(double p, double theta, double c_theta, double d12, double z_quantile);

/// 12 d fundamental(psi_theta, 4 C d^{-theta}); arguments above 1 use the same
/// sup formula and are noted.
BoundResult holder_bound_gpsi(const PsiFunction& psi, double theta, double c_theta, double d12);

/// min anchor norm + 12 D fundamental(psi_theta, 4 C D^{-theta}). Point-mass
/// psi is reported as the L_r form.
BoundResult sup_norm_bound(const PsiFunction& psi, double theta, double c_theta, double diameter,
                           std::span<const double> anchor_norms);

/// C_2 = Phi^{-1}(1) / (54 K^2).
double c2_constant(const YoungFunction& phi, double k_delta2);

/// inf over 256 log-spaced delta in [D 1e-6, D) of
/// N(delta) / Phi(u / (1 + delta / C_2)); doubled when two-sided; capped at 1.
/// Requires u >= 2 and a finite Delta-2 constant.
BoundResult tail_bound_entropy(double u, const YoungFunction& phi, const Delta2Estimate& k,
                               const EntropyFunction& entropy, double diameter, bool two_sided,
                               std::size_t delta_points = 256);

/// Central difference of log Phi with step u * 1e-6.
double log_phi_derivative(const YoungFunction& phi, double u);

/// (1 - gamma)^{-1} N(delta_0) / Phi(u) with delta_0 = C_2 gamma / (u [log Phi]'(u)).
BoundResult tail_bound_logconvex(double u, const YoungFunction& phi, double gamma, double c2,
                                 const EntropyFunction& entropy, double diameter);

/// C_3 C_2^{-kappa} kappa^{-kappa} (kappa + 1)^{kappa + 1} u^{2 kappa} exp(-u^2 / 2),
/// valid when C_2 kappa / ((kappa + 1) u^2) <= D.
BoundResult tail_bound_subgaussian_poly(double u, double c2, double c3, double kappa, double diameter);

/// Constants of the exponential-entropy bound exp(-u^2/2 + C_6 u^{2 beta / (beta + 1)}).
struct ExpEntropyConstants {
  double beta = 1.0;
  double c2 = 1.0;
  double c4 = 1.0;
  double c5 = 1.0;
  double c7 = 5.0;
  double diameter = 1.0;
};

/// Log of the entropy bound for N(eps) = C_4 exp(C_5 eps^{-beta}) and the
/// exp-quadratic Phi, minimized over a dense log grid of delta.
double exp_entropy_log_optimum(double u, const ExpEntropyConstants& c, std::size_t delta_points = 10000);

/// Smallest C_6 such that the closed form dominates the dense-grid optimum on
/// 64 points of [C_7, 2 C_7].
double fit_c6(const ExpEntropyConstants& c);

BoundResult tail_bound_exp_entropy(double u, const ExpEntropyConstants& c, std::optional<double> c6 = {});

/// Envelope of a log-MGF over normalized sums, sup over n in 1..2^16.
/// verbatim: n^{-1/2} zeta(lambda / n); corrected: n zeta(lambda / sqrt(n)).
inline constexpr std::size_t kCltMaxN = std::size_t{1} << 16;
double clt_envelope(const ConvexGridFunction& zeta, double lambda, bool corrected);

/// Theta(u) = exp(zetabar*(u)) - 1 tabulated on u_grid, where zetabar is the
/// envelope sampled on lambda_grid.
YoungFunction theta_orlicz(const ConvexGridFunction& zeta, std::span<const double> lambda_grid,
                           std::span<const double> u_grid, bool corrected);

/// CSV with columns u, bound, delta_star, formula_id.
std::string bound_curve_csv(std::span<const double> u_grid, std::span<const BoundResult> results);

}  // namespace mmchain
