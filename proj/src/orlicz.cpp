#include "mmchain/orlicz.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/special_functions/fpclassify.hpp>
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/tools/toms748_solve.hpp>

namespace mmchain {

namespace {

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

// Bisection for the tabulated inverse; the interpolant is strictly increasing.
template <class F>
double bisect_increasing(F&& f, double target, double lo, double hi) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) <= target) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-13 * std::max(1.0, hi)) break;
  }
  return lo;
}

}  // namespace

struct YoungFunction::Table {
  std::shared_ptr<boost::math::interpolators::pchip<std::vector<double>>> cubic;
  std::vector<double> z;
  std::vector<double> v;

  double operator()(double x) const {
    if (cubic) return (*cubic)(x);
    auto it = std::upper_bound(z.begin(), z.end(), x);
    if (it == z.end()) return v.back();
    const std::size_t i = static_cast<std::size_t>(it - z.begin());
    const double t = (x - z[i - 1]) / (z[i] - z[i - 1]);
    return v[i - 1] + t * (v[i] - v[i - 1]);
  }
};

YoungFunction YoungFunction::power(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw ArgumentError("power Young function needs p >= 1, got " + fmt_double(p));
  }
  YoungFunction phi(Family::power, p);
  phi.validate_shape();
  return phi;
}

YoungFunction YoungFunction::exp_power(double q) {
  if (!(q >= 1.0) || !std::isfinite(q)) {
    throw ArgumentError("exp_power Young function needs q >= 1, got " + fmt_double(q));
  }
  YoungFunction phi(Family::exp_power, q);
  phi.validate_shape();
  return phi;
}

YoungFunction YoungFunction::exp_quadratic() {
  YoungFunction phi(Family::exp_quadratic, 2.0);
  phi.validate_shape();
  return phi;
}

YoungFunction YoungFunction::tabulated(std::vector<double> z, std::vector<double> values) {
  if (z.size() != values.size() || z.size() < 2) {
    throw ArgumentError("tabulated Young function needs >= 2 matching (z, value) pairs");
  }
  if (z.front() != 0.0 || values.front() != 0.0) {
    throw ValidationError("tabulated Young function must start at (0, 0)");
  }
  for (std::size_t i = 1; i < z.size(); ++i) {
    if (!(z[i] > z[i - 1]) || !(values[i] > values[i - 1]) || !std::isfinite(values[i])) {
      throw ValidationError("tabulated Young function must be strictly increasing");
    }
  }
  for (std::size_t i = 2; i < z.size(); ++i) {
    const double s0 = (values[i - 1] - values[i - 2]) / (z[i - 1] - z[i - 2]);
    const double s1 = (values[i] - values[i - 1]) / (z[i] - z[i - 1]);
    if (s1 < s0 - 1e-12 * std::max({1.0, std::abs(s0), std::abs(s1)})) {
      throw ValidationError("tabulated Young function is not convex at knot z=" +
                            fmt_double(z[i - 1]));
    }
  }
  YoungFunction phi(Family::tabulated, 0.0);
  auto table = std::make_shared<Table>();
  table->z = z;
  table->v = values;
  if (z.size() >= 4) {
    table->cubic = std::make_shared<boost::math::interpolators::pchip<std::vector<double>>>(
        std::vector<double>(z), std::vector<double>(values));
  }
  phi.z_ = std::move(z);
  phi.v_ = std::move(values);
  phi.table_ = std::move(table);
  phi.validate_shape();
  return phi;
}

double YoungFunction::domain_end() const noexcept {
  return family_ == Family::tabulated ? z_.back() : kInf;
}

double YoungFunction::operator()(double z) const {
  if (!(z >= 0.0)) throw ArgumentError("Young function argument must be >= 0");
  switch (family_) {
    case Family::power:
      return std::pow(z, param_);
    case Family::exp_power:
      return std::expm1(std::pow(z, param_) / param_);
    case Family::exp_quadratic:
      return std::expm1(0.5 * z * z);
    case Family::tabulated:
      if (z > z_.back()) {
        throw RangeError("tabulated Young function evaluated at z=" + fmt_double(z) +
                         " outside its hull [0, " + fmt_double(z_.back()) + "]");
      }
      return (*table_)(z);
  }
  return 0.0;
}

double YoungFunction::inverse(double w) const {
  if (!(w >= 0.0)) throw ArgumentError("Young function inverse needs w >= 0");
  if (w == 0.0) return 0.0;
  switch (family_) {
    case Family::power:
      return std::isinf(w) ? kInf : std::pow(w, 1.0 / param_);
    case Family::exp_power:
      return std::isinf(w) ? kInf : std::pow(param_ * std::log1p(w), 1.0 / param_);
    case Family::exp_quadratic:
      return std::isinf(w) ? kInf : std::sqrt(2.0 * std::log1p(w));
    case Family::tabulated:
      if (w >= v_.back()) return z_.back();
      return bisect_increasing([this](double z) { return (*table_)(z); }, w, 0.0, z_.back());
  }
  return 0.0;
}

void YoungFunction::validate_shape() const {
  const double top = family_ == Family::tabulated ? z_.back() : 50.0;
  const auto grid = linspace(0.0, top, 257);
  if ((*this)(0.0) != 0.0) throw ValidationError("Young function must vanish at 0");
  double prev = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double v = (*this)(grid[i]);
    if (std::isinf(v)) break;
    if (!(v > prev)) {
      throw ValidationError(describe() + " is not strictly increasing near z=" +
                            fmt_double(grid[i]));
    }
    prev = v;
  }
  if (family_ == Family::tabulated) return;  // convexity checked on the knots
  for (std::size_t i = 0; i + 2 < grid.size(); ++i) {
    const double a = grid[i];
    const double b = grid[i + 2];
    const double fa = (*this)(a);
    const double fb = (*this)(b);
    if (std::isinf(fb)) break;
    const double mid = (*this)(0.5 * (a + b));
    if (mid > 0.5 * (fa + fb) * (1.0 + 1e-12)) {
      throw ValidationError(describe() + " violates midpoint convexity near z=" +
                            fmt_double(0.5 * (a + b)));
    }
  }
}

std::string YoungFunction::describe() const {
  switch (family_) {
    case Family::power:
      return "power(p=" + fmt_double(param_) + ")";
    case Family::exp_power:
      return "exp_power(q=" + fmt_double(param_) + ")";
    case Family::exp_quadratic:
      return "exp_quadratic";
    case Family::tabulated:
      return "tabulated(" + std::to_string(z_.size()) + " knots)";
  }
  return "unknown";
}

void to_json(nlohmann::json& j, const YoungFunction& phi) {
  switch (phi.family()) {
    case YoungFunction::Family::power:
      j = {{"family", "power"}, {"p", phi.parameter()}};
      break;
    case YoungFunction::Family::exp_power:
      j = {{"family", "exp_power"}, {"q", phi.parameter()}};
      break;
    case YoungFunction::Family::exp_quadratic:
      j = {{"family", "exp_quadratic"}};
      break;
    case YoungFunction::Family::tabulated:
      j = {{"family", "tabulated"}, {"z", phi.knots()}, {"values", phi.knot_values()}};
      break;
  }
}

namespace {

void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                         const std::string& what) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ArgumentError(what + ": unknown key '" + key + "'");
  }
}

}  // namespace

YoungFunction young_function_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("family")) {
    throw ArgumentError("Young function config needs a 'family' tag");
  }
  const auto family = j.at("family").get<std::string>();
  if (family == "power") {
    reject_unknown_keys(j, {"family", "p"}, "power Young function");
    return YoungFunction::power(j.at("p").get<double>());
  }
  if (family == "exp_power") {
    reject_unknown_keys(j, {"family", "q"}, "exp_power Young function");
    return YoungFunction::exp_power(j.at("q").get<double>());
  }
  if (family == "exp_quadratic") {
    reject_unknown_keys(j, {"family"}, "exp_quadratic Young function");
    return YoungFunction::exp_quadratic();
  }
  if (family == "tabulated") {
    reject_unknown_keys(j, {"family", "z", "values"}, "tabulated Young function");
    return YoungFunction::tabulated(j.at("z").get<std::vector<double>>(),
                                    j.at("values").get<std::vector<double>>());
  }
  throw ArgumentError("unknown Young function family '" + family + "'");
}

void from_json(const nlohmann::json& j, YoungFunction& phi) { phi = young_function_from_json(j); }

double eval_phi(const YoungFunction& phi, double z) { return phi(z); }
double invert_phi(const YoungFunction& phi, double w) { return phi.inverse(w); }

namespace {

// Modular evaluator specialized per family so the inner loop has no dispatch.
class Modular {
 public:
  Modular(std::span<const double> samples, std::span<const double> weights,
          const YoungFunction& phi)
      : phi_(phi), weights_(weights) {
    abs_.resize(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) abs_[i] = std::abs(samples[i]);
    if (phi.family() == YoungFunction::Family::exp_quadratic) {
      sq_.resize(abs_.size());
      for (std::size_t i = 0; i < abs_.size(); ++i) sq_[i] = abs_[i] * abs_[i];
    }
    max_abs_ = abs_.empty() ? 0.0 : *std::max_element(abs_.begin(), abs_.end());
  }

  double max_abs() const { return max_abs_; }

  // Returns +inf when some weighted sample falls beyond a tabulated hull.
  double operator()(double c) const {
    const std::size_t n = abs_.size();
    const bool equal = weights_.empty();
    double sum = 0.0;
    switch (phi_.family()) {
      case YoungFunction::Family::exp_quadratic: {
        const double t = 0.5 / (c * c);
        for (std::size_t i = 0; i < n; ++i) {
          const double v = std::expm1(sq_[i] * t);
          sum += equal ? v : weights_[i] * v;
        }
        break;
      }
      case YoungFunction::Family::power: {
        const double p = phi_.parameter();
        for (std::size_t i = 0; i < n; ++i) {
          const double v = std::pow(abs_[i] / c, p);
          sum += equal ? v : weights_[i] * v;
        }
        break;
      }
      case YoungFunction::Family::exp_power: {
        const double q = phi_.parameter();
        for (std::size_t i = 0; i < n; ++i) {
          const double v = std::expm1(std::pow(abs_[i] / c, q) / q);
          sum += equal ? v : weights_[i] * v;
        }
        break;
      }
      case YoungFunction::Family::tabulated: {
        const double top = phi_.domain_end();
        for (std::size_t i = 0; i < n; ++i) {
          const double wi = equal ? 1.0 : weights_[i];
          const double z = abs_[i] / c;
          if (z > top) {
            if (wi > 0.0) return kInf;
            continue;
          }
          sum += wi * phi_(z);
        }
        break;
      }
    }
    return equal ? sum / static_cast<double>(n) : sum;
  }

 private:
  const YoungFunction& phi_;
  std::span<const double> weights_;
  std::vector<double> abs_;
  std::vector<double> sq_;
  double max_abs_ = 0.0;
};

void check_samples(std::span<const double> samples, std::span<const double> weights) {
  if (samples.empty()) throw ArgumentError("luxemburg_norm needs at least one sample");
  if (!weights.empty()) {
    if (weights.size() != samples.size()) {
      throw ArgumentError("samples and weights differ in length");
    }
    require_probability_vector(weights);
  }
  for (double s : samples) {
    if (!std::isfinite(s)) throw ArgumentError("luxemburg_norm samples must be finite");
  }
}

}  // namespace

double orlicz_modular(std::span<const double> samples, std::span<const double> weights,
                      const YoungFunction& phi, double c) {
  check_samples(samples, weights);
  if (!(c > 0.0)) throw ArgumentError("orlicz_modular needs c > 0");
  return Modular(samples, weights, phi)(c);
}

double luxemburg_norm(std::span<const double> samples, std::span<const double> weights,
                      const YoungFunction& phi) {
  check_samples(samples, weights);
  Modular modular(samples, weights, phi);
  const double smax = modular.max_abs();
  if (smax == 0.0) return 0.0;

  if (phi.family() == YoungFunction::Family::power) {
    // Closed form of the root: c^p = sum_i w_i |s_i|^p, scaled against overflow.
    const double p = phi.parameter();
    double sum = 0.0;
    const bool equal = weights.empty();
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const double v = std::pow(std::abs(samples[i]) / smax, p);
      sum += equal ? v : weights[i] * v;
    }
    if (equal) sum /= static_cast<double>(samples.size());
    return smax * std::pow(sum, 1.0 / p);
  }

  // The modular is <= Phi(smax / c), so c = smax / Phi^{-1}(1) is an upper end.
  double hi = smax / phi.inverse(1.0);
  double f_hi = modular(hi) - 1.0;
  while (f_hi > 0.0) {
    hi *= 2.0;
    f_hi = modular(hi) - 1.0;
  }
  if (f_hi == 0.0) return hi;
  double lo = hi;
  double f_lo = f_hi;
  while (f_lo <= 0.0) {
    lo *= 0.5;
    f_lo = modular(lo) - 1.0;
  }
  // A tabulated hull can make the lower end infinite; bisect until finite.
  while (std::isinf(f_lo)) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = modular(mid) - 1.0;
    if (f_mid > 0.0) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
      f_hi = f_mid;
      if (f_mid == 0.0) return mid;
    }
  }

  auto f = [&modular](double c) { return modular(c) - 1.0; };
  std::uintmax_t max_iter = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      f, lo, hi, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(50), max_iter);
  // Prefer the end where the modular does not exceed 1 (feasible for the inf).
  const double fa = f(a);
  const double fb = f(b);
  if (std::abs(fb) <= std::abs(fa)) return b;
  return a;
}

double luxemburg_norm(std::span<const double> samples, const YoungFunction& phi) {
  return luxemburg_norm(samples, {}, phi);
}

// ---------------------------------------------------------------------------
// Grid functions and conjugation

ConvexGridFunction::ConvexGridFunction(std::vector<double> x, std::vector<double> y,
                                       bool validate_convexity)
    : x_(std::move(x)), y_(std::move(y)) {
  if (x_.empty() || x_.size() != y_.size()) {
    throw ArgumentError("grid function needs matching non-empty abscissae and values");
  }
  for (std::size_t i = 0; i < x_.size(); ++i) {
    if (!std::isfinite(x_[i]) || !std::isfinite(y_[i])) {
      throw ArgumentError("grid function entries must be finite");
    }
    if (i > 0 && !(x_[i] > x_[i - 1])) {
      throw ArgumentError("grid function abscissae must be strictly increasing");
    }
  }
  if (!validate_convexity) return;
  for (std::size_t i = 2; i < x_.size(); ++i) {
    const double s0 = (y_[i - 1] - y_[i - 2]) / (x_[i - 1] - x_[i - 2]);
    const double s1 = (y_[i] - y_[i - 1]) / (x_[i] - x_[i - 1]);
    if (s1 - s0 < -kConvexitySlack * std::max({1.0, std::abs(s0), std::abs(s1)})) {
      throw ValidationError("grid function is not convex at x=" + fmt_double(x_[i - 1]));
    }
  }
}

double ConvexGridFunction::operator()(double x) const {
  if (x < x_.front() || x > x_.back()) {
    throw RangeError("grid function evaluated at " + fmt_double(x) + " outside [" +
                     fmt_double(x_.front()) + ", " + fmt_double(x_.back()) + "]");
  }
  auto it = std::lower_bound(x_.begin(), x_.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - x_.begin());
  if (x_[i] == x) return y_[i];
  const double t = (x - x_[i - 1]) / (x_[i] - x_[i - 1]);
  return y_[i - 1] + t * (y_[i] - y_[i - 1]);
}

void to_json(nlohmann::json& j, const ConvexGridFunction& g) {
  j = {{"x", g.abscissae()}, {"y", g.values()}};
}

ConvexGridFunction convex_grid_function_from_json(const nlohmann::json& j) {
  reject_unknown_keys(j, {"x", "y"}, "grid function");
  return ConvexGridFunction(j.at("x").get<std::vector<double>>(),
                            j.at("y").get<std::vector<double>>());
}

ConvexGridFunction convex_minorant(std::vector<double> x, std::vector<double> y) {
  if (x.empty() || x.size() != y.size()) {
    throw ArgumentError("convex_minorant needs matching non-empty inputs");
  }
  // Lower hull by the monotone chain.
  std::vector<std::size_t> hull;
  for (std::size_t i = 0; i < x.size(); ++i) {
    while (hull.size() >= 2) {
      const std::size_t a = hull[hull.size() - 2];
      const std::size_t b = hull.back();
      const double cross = (x[b] - x[a]) * (y[i] - y[a]) - (y[b] - y[a]) * (x[i] - x[a]);
      if (cross <= 0.0) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(i);
  }
  std::vector<double> out(x.size());
  std::size_t seg = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    while (seg + 1 < hull.size() && x[hull[seg + 1]] < x[i]) ++seg;
    if (seg + 1 >= hull.size() || x[hull[seg]] == x[i]) {
      out[i] = y[hull[seg]];
      continue;
    }
    const std::size_t a = hull[seg];
    const std::size_t b = hull[seg + 1];
    const double t = (x[i] - x[a]) / (x[b] - x[a]);
    out[i] = y[a] + t * (y[b] - y[a]);
  }
  return ConvexGridFunction(std::move(x), std::move(out), false);
}

ConvexGridFunction fenchel_conjugate(const ConvexGridFunction& g,
                                     std::span<const double> x_grid) {
  const auto& ys = g.abscissae();
  const auto& gs = g.values();
  std::vector<double> xs(x_grid.begin(), x_grid.end());
  std::vector<double> out(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) {
    double best = -kInf;
    for (std::size_t i = 0; i < ys.size(); ++i) {
      best = std::max(best, xs[k] * ys[i] - gs[i]);
    }
    out[k] = best;
  }
  // A max of affine functions is convex; skip the roundoff-sensitive recheck.
  return ConvexGridFunction(std::move(xs), std::move(out), false);
}

double biconjugate_tolerance(const ConvexGridFunction& g, std::span<const double> x_grid) {
  const auto& y = g.abscissae();
  const auto& v = g.values();
  if (y.size() < 2) return 0.0;
  if (x_grid.size() < 2) return kInf;
  std::vector<double> slopes(y.size() - 1);
  double hy = 0.0;
  for (std::size_t i = 0; i + 1 < y.size(); ++i) {
    slopes[i] = (v[i + 1] - v[i]) / (y[i + 1] - y[i]);
    hy = std::max(hy, y[i + 1] - y[i]);
  }
  if (slopes.front() < x_grid.front() || slopes.back() > x_grid.back()) return kInf;
  double hx = 0.0;
  for (std::size_t j = 0; j + 1 < x_grid.size(); ++j) hx = std::max(hx, x_grid[j + 1] - x_grid[j]);
  // Count chord slopes falling in each x cell; the gap at a vertex is bounded
  // by hx * hy times the number of slopes sharing the cell with its subgradient.
  std::size_t crowd = 1;
  std::size_t cell_start = 0;
  while (cell_start < slopes.size()) {
    auto cell = std::upper_bound(x_grid.begin(), x_grid.end(), slopes[cell_start]);
    const double cell_end = cell == x_grid.end() ? kInf : *cell;
    std::size_t count = 0;
    std::size_t k = cell_start;
    while (k < slopes.size() && slopes[k] < cell_end) {
      ++count;
      ++k;
    }
    crowd = std::max(crowd, count);
    cell_start = k;
  }
  double scale = 1.0;
  for (double val : v) scale = std::max(scale, std::abs(val));
  return hx * hy * static_cast<double>(crowd) + 1e-12 * scale;
}

// ---------------------------------------------------------------------------

Delta2Estimate delta2_constant(const YoungFunction& phi, double lo, double hi,
                               std::size_t points_per_decade) {
  if (!(lo > 0.0) || !(hi > 2.0 * lo) || !std::isfinite(hi) || points_per_decade < 2) {
    throw ArgumentError("delta2_constant needs a bounded hull 0 < lo < hi/2");
  }
  const auto decades = std::log10(hi / lo);
  const auto n = static_cast<std::size_t>(std::ceil(decades * static_cast<double>(points_per_decade))) + 1;
  const auto grid = geomspace(lo, hi, n);
  std::vector<double> inv(n);
  for (std::size_t i = 0; i < n; ++i) inv[i] = phi.inverse(grid[i]);

  const double half = 0.5 * hi;
  Delta2Estimate est;
  double sup_half = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double ratio = phi.inverse(grid[i] * grid[j]) / (inv[i] + inv[j]);
      if (ratio > est.value) {
        est.value = ratio;
        est.arg_x = grid[i];
        est.arg_y = grid[j];
      }
      if (grid[j] <= half && ratio > sup_half) sup_half = ratio;
    }
  }
  est.boundary_growth = sup_half > 0.0 ? est.value / sup_half - 1.0 : kInf;
  est.diverging = est.boundary_growth > 0.01;
  return est;
}

NaturalPhi natural_phi(const SamplePaths& paths, std::span<const double> lambda_grid) {
  if (paths.paths() == 0 || paths.points() == 0) {
    throw ArgumentError("natural_phi needs non-empty paths");
  }
  const std::size_t m = lambda_grid.size();
  if (m == 0) throw ArgumentError("natural_phi needs a lambda grid");
  for (std::size_t k = 0; k < m; ++k) {
    if (k > 0 && !(lambda_grid[k] > lambda_grid[k - 1])) {
      throw ArgumentError("lambda grid must be strictly increasing");
    }
    const double mirror = lambda_grid[m - 1 - k];
    if (std::abs(lambda_grid[k] + mirror) > 1e-12 * std::max(1.0, std::abs(mirror))) {
      throw ArgumentError("lambda grid must be symmetric about 0");
    }
  }

  const double log_n = std::log(static_cast<double>(paths.paths()));
  std::vector<double> values(m);
  std::vector<double> scaled(paths.paths());
  for (std::size_t k = 0; k < m; ++k) {
    const double lambda = lambda_grid[k];
    if (lambda == 0.0) {
      values[k] = 0.0;
      continue;
    }
    double best = -kInf;
    for (std::size_t x = 0; x < paths.points(); ++x) {
      const auto col = paths.column(x);
      double top = -kInf;
      for (std::size_t i = 0; i < col.size(); ++i) {
        scaled[i] = lambda * col[i];
        top = std::max(top, scaled[i]);
      }
      double acc = 0.0;
      for (double s : scaled) acc += std::exp(s - top);
      best = std::max(best, top + std::log(acc) - log_n);
    }
    values[k] = best;
  }

  NaturalPhi out{ConvexGridFunction({0.0}, {0.0}), {}};
  // Keep the largest symmetric window where every value is finite.
  std::size_t cut = 0;
  while (cut < m / 2 && !(std::isfinite(values[cut]) && std::isfinite(values[m - 1 - cut]))) ++cut;
  for (std::size_t k = cut; k < m - cut; ++k) {
    if (!std::isfinite(values[k])) {
      throw ArgumentError("natural_phi produced non-finite values inside the grid");
    }
  }
  std::vector<double> xs(lambda_grid.begin() + static_cast<std::ptrdiff_t>(cut),
                         lambda_grid.end() - static_cast<std::ptrdiff_t>(cut));
  std::vector<double> ys(values.begin() + static_cast<std::ptrdiff_t>(cut),
                         values.end() - static_cast<std::ptrdiff_t>(cut));
  if (cut > 0) {
    out.warnings.push_back("natural_phi truncated to lambda in [" + fmt_double(xs.front()) +
                           ", " + fmt_double(xs.back()) + "] after overflow");
  }
  out.phi = convex_minorant(std::move(xs), std::move(ys));
  return out;
}

}  // namespace mmchain
