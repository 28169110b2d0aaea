#include "mmchain/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "mmchain/io.hpp"

namespace mmchain {

std::string formula_name(FormulaId id) {
  switch (id) {
    case FormulaId::holder_lp:
      return "holder_lp";
    case FormulaId::holder_gpsi:
      return "holder_gpsi";
    case FormulaId::sup_norm_gpsi:
      return "sup_norm_gpsi";
    case FormulaId::sup_norm_lp:
      return "sup_norm_lp";
    case FormulaId::entropy_tail:
      return "entropy_tail";
    case FormulaId::entropy_tail_two_sided:
      return "entropy_tail_two_sided";
    case FormulaId::logconvex_tail:
      return "logconvex_tail";
    case FormulaId::subgaussian_poly_tail:
      return "subgaussian_poly_tail";
    case FormulaId::exp_entropy_tail:
      return "exp_entropy_tail";
  }
  return "unknown";
}

void to_json(nlohmann::json& j, const BoundResult& r) {
  nlohmann::json inputs = nlohmann::json::object();
  for (const auto& [k, v] : r.inputs) inputs[k] = format_number(v);
  j = {{"value", format_number(r.value)},
       {"formula", formula_name(r.formula)},
       {"inputs", inputs},
       {"notes", r.notes}};
  if (r.trace) {
    std::vector<std::string> grid;
    std::vector<std::string> values;
    for (double g : r.trace->grid) grid.push_back(format_number(g));
    for (double v : r.trace->values) values.push_back(format_number(v));
    j["trace"] = {{"grid", grid},
                  {"values", values},
                  {"argopt", format_number(r.trace->argopt)},
                  {"index", r.trace->index}};
  }
}

namespace {

std::string num(double v) { return format_number(v); }

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw DomainError(std::string(name) + " must be positive and finite, got " + num(v));
  }
}

// Shared body of the Hoelder and sup-norm bounds.
struct ModulusTerm {
  double value;
  FundamentalValue fundamental;
};

ModulusTerm modulus_term(const PsiFunction& psi, double theta, double c_theta, double d) {
  const auto damped = psi_theta(psi, theta);
  const auto f = fundamental_sup(damped, 4.0 * c_theta * std::pow(d, -theta));
  return {12.0 * d * f.value, f};
}

}  // namespace

BoundResult holder_bound_lp(double p, double theta, double c_theta, double d12, double z_quantile) {
  if (!(theta >= 0.0)) throw DomainError("holder_bound_lp needs theta >= 0");
  if (!(p > theta)) {
    throw DomainError("holder_bound_lp requires p > theta (p=" + num(p) + ", theta=" + num(theta) + ")");
  }
  require_positive(c_theta, "C(theta)");
  require_positive(z_quantile, "Z quantile");
  if (!(d12 >= 0.0)) throw DomainError("holder_bound_lp needs d >= 0");
  BoundResult r;
  r.formula = FormulaId::holder_lp;
  r.inputs = {{"p", p}, {"theta", theta}, {"c_theta", c_theta}, {"d", d12}, {"z_quantile", z_quantile}};
  const double gap = 1.0 - theta / p;
  r.value = 12.0 * std::pow(z_quantile, 1.0 / p) * std::pow(4.0, 1.0 / p) *
            std::pow(c_theta, 1.0 / p) * std::pow(d12, gap) / gap;
  return r;
}

BoundResult holder_bound_gpsi(const PsiFunction& psi, double theta, double c_theta, double d12) {
  require_positive(theta, "theta");
  require_positive(c_theta, "C(theta)");
  require_positive(d12, "d");
  const auto term = modulus_term(psi, theta, c_theta, d12);
  BoundResult r;
  r.formula = FormulaId::holder_gpsi;
  r.value = term.value;
  r.inputs = {{"theta", theta}, {"c_theta", c_theta}, {"d", d12},
              {"fundamental_argument", 4.0 * c_theta * std::pow(d12, -theta)}};
  r.trace = OptimizerTrace{{}, {}, term.fundamental.argmax, 0};
  if (term.fundamental.argument_above_one) {
    r.notes.push_back("fundamental function argument exceeds 1; sup formula evaluated as is");
  }
  return r;
}

BoundResult sup_norm_bound(const PsiFunction& psi, double theta, double c_theta, double diameter,
                           std::span<const double> anchor_norms) {
  if (anchor_norms.empty()) throw ArgumentError("sup_norm_bound needs at least one anchor norm");
  require_positive(theta, "theta");
  require_positive(c_theta, "C(theta)");
  require_positive(diameter, "D");
  const double anchor = *std::min_element(anchor_norms.begin(), anchor_norms.end());
  const auto term = modulus_term(psi, theta, c_theta, diameter);
  BoundResult r;
  r.formula = psi.kind() == PsiFunction::Kind::point_mass ? FormulaId::sup_norm_lp : FormulaId::sup_norm_gpsi;
  r.value = anchor + term.value;
  r.inputs = {{"theta", theta}, {"c_theta", c_theta}, {"diameter", diameter}, {"min_anchor", anchor}};
  r.trace = OptimizerTrace{{}, {}, term.fundamental.argmax, 0};
  if (term.fundamental.argument_above_one) {
    r.notes.push_back("fundamental function argument exceeds 1; sup formula evaluated as is");
  }
  return r;
}

double c2_constant(const YoungFunction& phi, double k_delta2) {
  require_positive(k_delta2, "Delta-2 constant K");
  return phi.inverse(1.0) / (54.0 * k_delta2 * k_delta2);
}

BoundResult tail_bound_entropy(double u, const YoungFunction& phi, const Delta2Estimate& k,
                               const EntropyFunction& entropy, double diameter, bool two_sided,
                               std::size_t delta_points) {
  if (!(u >= 2.0)) throw DomainError("entropy tail bound needs u >= 2, got " + num(u));
  if (k.diverging || !std::isfinite(k.value) || !(k.value > 0.0)) {
    throw DomainError("entropy tail bound needs a finite Delta-2 constant K; " + phi.describe() +
                      " fails the Delta-2 condition");
  }
  require_positive(diameter, "D");
  if (delta_points < 2) throw ArgumentError("delta grid needs at least two points");
  const double c2 = c2_constant(phi, k.value);
  OptimizerTrace trace;
  trace.grid = geomspace(diameter * 1e-6, diameter * (1.0 - 1e-9), delta_points);
  trace.values.resize(trace.grid.size());
  double best = kInf;
  for (std::size_t i = 0; i < trace.grid.size(); ++i) {
    const double delta = trace.grid[i];
    const double v = entropy(delta) / phi(u / (1.0 + delta / c2));
    trace.values[i] = v;
    if (v < best) {
      best = v;
      trace.argopt = delta;
      trace.index = i;
    }
  }
  BoundResult r;
  r.formula = two_sided ? FormulaId::entropy_tail_two_sided : FormulaId::entropy_tail;
  const double raw = two_sided ? 2.0 * best : best;
  r.value = std::min(1.0, raw);
  r.inputs = {{"u", u}, {"k_delta2", k.value}, {"c2", c2}, {"diameter", diameter},
              {"delta_star", trace.argopt}, {"uncapped", raw}};
  r.trace = std::move(trace);
  return r;
}

double log_phi_derivative(const YoungFunction& phi, double u) {
  require_positive(u, "u");
  const double h = u * 1e-6;
  return (std::log(phi(u + h)) - std::log(phi(u - h))) / (2.0 * h);
}

BoundResult tail_bound_logconvex(double u, const YoungFunction& phi, double gamma, double c2,
                                 const EntropyFunction& entropy, double diameter) {
  if (!(gamma > 0.0) || !(gamma < 1.0)) throw DomainError("gamma must lie in (0, 1)");
  if (!(u >= 2.0)) throw DomainError("log-convex tail bound needs u >= 2");
  require_positive(c2, "C_2");
  require_positive(diameter, "D");
  // Log-convexity of Phi on [2, u] via second differences on a fine grid.
  const auto grid = linspace(2.0, std::max(u, 2.0 + 1e-3), 65);
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    const double a = std::log(phi(grid[i - 1]));
    const double b = std::log(phi(grid[i]));
    const double c = std::log(phi(grid[i + 1]));
    if (a + c - 2.0 * b < -1e-12 * std::max(1.0, std::abs(b))) {
      throw DomainError(phi.describe() + " is not logarithmically convex on [2, u]");
    }
  }
  const double slope = log_phi_derivative(phi, u);
  const double delta0 = c2 * gamma / (u * slope);
  if (!(delta0 < diameter)) {
    throw DomainError("log-convex tail bound is not valid at u=" + num(u) + ": delta_0=" +
                      num(delta0) + " >= D=" + num(diameter));
  }
  BoundResult r;
  r.formula = FormulaId::logconvex_tail;
  const double raw = entropy(delta0) / ((1.0 - gamma) * phi(u));
  r.value = std::min(1.0, raw);
  r.inputs = {{"u", u}, {"gamma", gamma}, {"c2", c2}, {"diameter", diameter},
              {"delta0", delta0}, {"log_phi_slope", slope}, {"uncapped", raw}};
  return r;
}

BoundResult tail_bound_subgaussian_poly(double u, double c2, double c3, double kappa, double diameter) {
  require_positive(u, "u");
  require_positive(c2, "C_2");
  require_positive(c3, "C_3");
  require_positive(kappa, "kappa");
  require_positive(diameter, "D");
  const double delta0 = c2 * kappa / ((kappa + 1.0) * u * u);
  if (delta0 > diameter) {
    throw DomainError("polynomial-entropy tail bound is not valid at u=" + num(u) + ": delta_0=" +
                      num(delta0) + " > D=" + num(diameter));
  }
  const double log_raw = std::log(c3) - kappa * std::log(c2) - kappa * std::log(kappa) +
                         (kappa + 1.0) * std::log(kappa + 1.0) + 2.0 * kappa * std::log(u) - 0.5 * u * u;
  const double raw = std::exp(log_raw);
  BoundResult r;
  r.formula = FormulaId::subgaussian_poly_tail;
  r.value = std::min(1.0, raw);
  r.inputs = {{"u", u}, {"c2", c2}, {"c3", c3}, {"kappa", kappa}, {"diameter", diameter},
              {"delta0", delta0}, {"gamma0", kappa / (kappa + 1.0)}, {"uncapped", raw}};
  return r;
}

namespace {

double log_exp_quadratic(double z) {
  const double h = 0.5 * z * z;
  return h > 30.0 ? h + std::log1p(-std::exp(-h)) : std::log(std::expm1(h));
}

void check_exp_constants(const ExpEntropyConstants& c) {
  require_positive(c.beta, "beta");
  require_positive(c.c2, "C_2");
  require_positive(c.c4, "C_4");
  require_positive(c.c5, "C_5");
  require_positive(c.c7, "C_7");
  require_positive(c.diameter, "D");
}

}  // namespace

double exp_entropy_log_optimum(double u, const ExpEntropyConstants& c, std::size_t delta_points) {
  check_exp_constants(c);
  const auto grid = geomspace(c.diameter * 1e-6, c.diameter * (1.0 - 1e-9), delta_points);
  double best = kInf;
  for (double delta : grid) {
    const double v = std::log(c.c4) + c.c5 * std::pow(delta, -c.beta) -
                     log_exp_quadratic(u / (1.0 + delta / c.c2));
    best = std::min(best, v);
  }
  return best;
}

double fit_c6(const ExpEntropyConstants& c) {
  check_exp_constants(c);
  const double expo = 2.0 * c.beta / (c.beta + 1.0);
  double c6 = -kInf;
  for (double u : linspace(c.c7, 2.0 * c.c7, 64)) {
    c6 = std::max(c6, (exp_entropy_log_optimum(u, c) + 0.5 * u * u) / std::pow(u, expo));
  }
  return c6;
}

BoundResult tail_bound_exp_entropy(double u, const ExpEntropyConstants& c, std::optional<double> c6) {
  check_exp_constants(c);
  if (!(u >= c.c7)) throw DomainError("exponential-entropy tail bound needs u >= C_7=" + num(c.c7));
  const double fitted = c6.value_or(fit_c6(c));
  const double expo = 2.0 * c.beta / (c.beta + 1.0);
  const double log_raw = -0.5 * u * u + fitted * std::pow(u, expo);
  BoundResult r;
  r.formula = FormulaId::exp_entropy_tail;
  r.value = std::min(1.0, std::exp(log_raw));
  r.inputs = {{"u", u}, {"beta", c.beta}, {"c2", c.c2}, {"c4", c.c4}, {"c5", c.c5},
              {"c6", fitted}, {"c7", c.c7}, {"diameter", c.diameter}, {"log_uncapped", log_raw}};
  if (!c6) r.notes.push_back("C_6 fitted on [C_7, 2 C_7]");
  return r;
}

namespace {

// Three-point Lagrange interpolation on the nodes nearest x. The corrected
// envelope multiplies zeta(lambda / sqrt(n)) by n, which turns the kink of
// linear interpolation at small arguments into growth like sqrt(n); quadratic
// pieces reproduce the curvature at the origin instead.
double quadratic_eval(const ConvexGridFunction& g, double x) {
  const auto& xs = g.abscissae();
  const auto& ys = g.values();
  if (xs.size() < 3) return g(x);
  if (x < xs.front() || x > xs.back()) return g(x);
  const auto it = std::lower_bound(xs.begin(), xs.end(), x);
  auto k = static_cast<std::size_t>(it - xs.begin());
  k = std::clamp<std::size_t>(k == 0 ? 0 : k - 1, 0, xs.size() - 3);
  if (k + 3 < xs.size() && std::abs(xs[k + 3] - x) < std::abs(x - xs[k])) ++k;
  double s = 0.0;
  for (std::size_t i = k; i < k + 3; ++i) {
    double l = ys[i];
    for (std::size_t j = k; j < k + 3; ++j) {
      if (j != i) l *= (x - xs[j]) / (xs[i] - xs[j]);
    }
    s += l;
  }
  return s;
}

}  // namespace

double clt_envelope(const ConvexGridFunction& zeta, double lambda, bool corrected) {
  double best = zeta(lambda);
  for (std::size_t n = 2; n <= kCltMaxN; ++n) {
    const double dn = static_cast<double>(n);
    const double v = corrected ? dn * quadratic_eval(zeta, lambda / std::sqrt(dn))
                               : quadratic_eval(zeta, lambda / dn) / std::sqrt(dn);
    best = std::max(best, v);
  }
  return best;
}

YoungFunction theta_orlicz(const ConvexGridFunction& zeta, std::span<const double> lambda_grid,
                           std::span<const double> u_grid, bool corrected) {
  std::vector<double> lambdas(lambda_grid.begin(), lambda_grid.end());
  std::vector<double> env(lambdas.size());
  for (std::size_t i = 0; i < lambdas.size(); ++i) env[i] = clt_envelope(zeta, lambdas[i], corrected);
  const auto hull = convex_minorant(std::move(lambdas), std::move(env));
  const auto conj = fenchel_conjugate(hull, u_grid);
  std::vector<double> z(u_grid.begin(), u_grid.end());
  std::vector<double> values(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) values[i] = std::expm1(conj.values()[i]);
  return YoungFunction::tabulated(std::move(z), std::move(values));
}

std::string bound_curve_csv(std::span<const double> u_grid, std::span<const BoundResult> results) {
  if (u_grid.size() != results.size()) throw ArgumentError("u grid and bound results differ in length");
  CsvTable t({"u", "bound", "delta_star", "formula_id"});
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    const double delta = r.trace ? r.trace->argopt : (r.inputs.count("delta0") ? r.inputs.at("delta0") : std::nan(""));
    t.add_row({format_number(u_grid[i]), format_number(r.value), format_number(delta), formula_name(r.formula)});
  }
  return t.str();
}

}  // namespace mmchain
