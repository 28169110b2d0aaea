#include "mmchain/glspace.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mmchain/io.hpp"

namespace mmchain {

namespace {

std::string num(double v) { return format_number(v); }

}  // namespace

PsiFunction PsiFunction::power(double q, double lower, double upper, double scale) {
  if (!(q > 0.0) || !std::isfinite(q)) throw ArgumentError("power psi needs q > 0");
  if (!(lower >= 1.0) || !(upper > lower)) {
    throw ArgumentError("psi support needs 1 <= A < B");
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ArgumentError("psi scale must be positive");
  PsiFunction psi(Kind::power, Support{lower, upper, false});
  psi.param_ = q;
  psi.scale_ = scale;
  return psi;
}

PsiFunction PsiFunction::point_mass(double r, double scale) {
  if (!(r >= 1.0) || !std::isfinite(r)) throw ArgumentError("point mass psi needs r >= 1");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ArgumentError("psi scale must be positive");
  PsiFunction psi(Kind::point_mass, Support{r, r, true});
  psi.param_ = r;
  psi.scale_ = scale;
  return psi;
}

PsiFunction PsiFunction::tabulated(std::vector<double> p, std::vector<double> values) {
  if (p.size() != values.size() || p.empty()) {
    throw ArgumentError("tabulated psi needs matching non-empty grids");
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p[i]) || !std::isfinite(values[i])) {
      throw ArgumentError("tabulated psi entries must be finite");
    }
    if (i > 0 && !(p[i] > p[i - 1])) throw ArgumentError("tabulated psi grid must increase");
    if (!(values[i] > 0.0)) {
      throw ValidationError("tabulated psi must be positive, got " + num(values[i]) +
                            " at p=" + num(p[i]));
    }
  }
  if (!(p.front() >= 1.0)) throw ArgumentError("tabulated psi grid must start at p >= 1");
  PsiFunction psi(Kind::tabulated, Support{p.front(), p.back(), true});
  psi.knots_ = std::move(p);
  psi.values_ = std::move(values);
  return psi;
}

PsiFunction PsiFunction::theta_damped(const PsiFunction& base, double theta) {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw ArgumentError("theta must be positive");
  const Support& s = base.support();
  Support out = s;
  if (s.is_point()) {
    if (!(s.lower > theta)) {
      throw SupportError("psi_theta support is empty: r=" + num(s.lower) +
                         " does not exceed theta=" + num(theta));
    }
  } else {
    if (!(s.upper > std::max(s.lower, theta))) {
      throw SupportError("psi_theta support is empty: B=" + num(s.upper) +
                         " <= max(A, theta)=" + num(std::max(s.lower, theta)));
    }
    if (theta >= s.lower) out = Support{theta, s.upper, false};
  }
  PsiFunction psi(Kind::theta_damped, out);
  psi.param_ = theta;
  psi.bases_ = std::make_shared<const std::vector<PsiFunction>>(std::vector<PsiFunction>{base});
  return psi;
}

PsiFunction PsiFunction::rosenthal(const PsiFunction& base) {
  PsiFunction psi(Kind::rosenthal, base.support());
  psi.bases_ = std::make_shared<const std::vector<PsiFunction>>(std::vector<PsiFunction>{base});
  return psi;
}

PsiFunction PsiFunction::envelope(std::vector<PsiFunction> members) {
  if (members.empty()) throw ArgumentError("psi envelope needs at least one member");
  Support s = members.front().support();
  bool closed = true;
  for (const auto& m : members) {
    s.lower = std::max(s.lower, m.support().lower);
    s.upper = std::min(s.upper, m.support().upper);
    closed = closed && m.support().closed;
  }
  s.closed = closed;
  if (s.lower > s.upper || (s.lower == s.upper && !closed)) {
    throw SupportError("psi envelope members have disjoint supports");
  }
  PsiFunction psi(Kind::envelope, s);
  psi.bases_ = std::make_shared<const std::vector<PsiFunction>>(std::move(members));
  return psi;
}

std::optional<double> PsiFunction::operator()(double p) const {
  if (!support_.contains(p)) return std::nullopt;
  switch (kind_) {
    case Kind::power:
      return scale_ * std::pow(p, 1.0 / param_);
    case Kind::point_mass:
      return scale_;
    case Kind::tabulated: {
      auto it = std::lower_bound(knots_.begin(), knots_.end(), p);
      const std::size_t i = static_cast<std::size_t>(it - knots_.begin());
      if (knots_[i] == p) return values_[i];
      const double t = (p - knots_[i - 1]) / (knots_[i] - knots_[i - 1]);
      return values_[i - 1] + t * (values_[i] - values_[i - 1]);
    }
    case Kind::theta_damped: {
      auto v = bases_->front()(p);
      if (!v) return std::nullopt;
      return (1.0 - param_ / p) * *v;
    }
    case Kind::rosenthal: {
      auto v = bases_->front()(p);
      if (!v) return std::nullopt;
      return p / std::log(p + 1.0) * *v;
    }
    case Kind::envelope: {
      double best = 0.0;
      for (const auto& m : *bases_) {
        auto v = m(p);
        if (!v) return std::nullopt;
        best = std::max(best, *v);
      }
      return best;
    }
  }
  return std::nullopt;
}

std::vector<double> PsiFunction::interior_grid() const {
  if (support_.is_point()) return {support_.lower};
  double lo = support_.lower;
  double hi = std::min(support_.upper, kPMax);
  if (!support_.closed) {
    lo = support_.lower * (1.0 + 1e-6);
    if (std::isfinite(support_.upper)) hi = std::min(support_.upper * (1.0 - 1e-6), kPMax);
  }
  if (!(hi > lo)) {
    throw SupportError("psi support " + describe() + " has no interior below p=" + num(kPMax));
  }
  return geomspace(lo, hi, kPGridPoints);
}

std::string PsiFunction::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::power:
      os << "power(q=" << num(param_) << ")";
      break;
    case Kind::point_mass:
      os << "point_mass(r=" << num(param_) << ")";
      break;
    case Kind::tabulated:
      os << "tabulated(" << knots_.size() << " knots)";
      break;
    case Kind::theta_damped:
      os << "theta_damped(" << bases_->front().describe() << ", theta=" << num(param_) << ")";
      break;
    case Kind::rosenthal:
      os << "rosenthal(" << bases_->front().describe() << ")";
      break;
    case Kind::envelope:
      os << "envelope(" << bases_->size() << " members)";
      break;
  }
  os << (support_.closed ? " on [" : " on (") << num(support_.lower) << ", "
     << num(support_.upper) << (support_.closed ? "]" : ")");
  return os.str();
}

void to_json(nlohmann::json& j, const PsiFunction& psi) {
  using K = PsiFunction::Kind;
  const auto bound = [](double v) -> nlohmann::json {
    if (std::isinf(v)) return "inf";
    return v;
  };
  switch (psi.kind_) {
    case K::power:
      j = {{"family", "power"},
           {"q", psi.param_},
           {"lower", psi.support_.lower},
           {"upper", bound(psi.support_.upper)},
           {"scale", psi.scale_}};
      break;
    case K::point_mass:
      j = {{"family", "point_mass"}, {"r", psi.param_}, {"scale", psi.scale_}};
      break;
    case K::tabulated:
      j = {{"family", "tabulated"}, {"p", psi.knots_}, {"values", psi.values_}};
      break;
    case K::theta_damped:
      j = {{"family", "theta_damped"}, {"theta", psi.param_}, {"base", psi.bases_->front()}};
      break;
    case K::rosenthal:
      j = {{"family", "rosenthal"}, {"base", psi.bases_->front()}};
      break;
    case K::envelope:
      j = {{"family", "envelope"}, {"members", *psi.bases_}};
      break;
  }
}

namespace {

void allow_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                const std::string& what) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ArgumentError(what + ": unknown key '" + key + "'");
  }
}

double read_bound(const nlohmann::json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (v.is_string() && v.get<std::string>() == "inf") return kInf;
  return v.get<double>();
}

}  // namespace

PsiFunction psi_function_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("family")) {
    throw ArgumentError("psi config needs a 'family' tag");
  }
  const auto family = j.at("family").get<std::string>();
  if (family == "power") {
    allow_keys(j, {"family", "q", "lower", "upper", "scale"}, "power psi");
    return PsiFunction::power(j.at("q").get<double>(), read_bound(j, "lower", 1.0),
                              read_bound(j, "upper", kInf), j.value("scale", 1.0));
  }
  if (family == "point_mass") {
    allow_keys(j, {"family", "r", "scale"}, "point_mass psi");
    return PsiFunction::point_mass(j.at("r").get<double>(), j.value("scale", 1.0));
  }
  if (family == "tabulated") {
    allow_keys(j, {"family", "p", "values"}, "tabulated psi");
    return PsiFunction::tabulated(j.at("p").get<std::vector<double>>(),
                                  j.at("values").get<std::vector<double>>());
  }
  if (family == "theta_damped") {
    allow_keys(j, {"family", "theta", "base"}, "theta_damped psi");
    return PsiFunction::theta_damped(psi_function_from_json(j.at("base")),
                                     j.at("theta").get<double>());
  }
  if (family == "rosenthal") {
    allow_keys(j, {"family", "base"}, "rosenthal psi");
    return PsiFunction::rosenthal(psi_function_from_json(j.at("base")));
  }
  if (family == "envelope") {
    allow_keys(j, {"family", "members"}, "envelope psi");
    std::vector<PsiFunction> members;
    for (const auto& m : j.at("members")) members.push_back(psi_function_from_json(m));
    return PsiFunction::envelope(std::move(members));
  }
  throw ArgumentError("unknown psi family '" + family + "'");
}

// ---------------------------------------------------------------------------

MomentProfile empirical_moments(std::span<const double> samples, std::span<const double> weights,
                                std::span<const double> p_grid) {
  if (samples.empty()) throw ArgumentError("empirical_moments needs at least one sample");
  if (!weights.empty()) {
    if (weights.size() != samples.size()) throw ArgumentError("samples and weights differ in length");
    require_probability_vector(weights);
  }
  for (std::size_t i = 0; i < p_grid.size(); ++i) {
    if (!(p_grid[i] >= 1.0) || !std::isfinite(p_grid[i])) {
      throw ArgumentError("moment exponents must be finite and >= 1");
    }
    if (i > 0 && !(p_grid[i] > p_grid[i - 1])) throw ArgumentError("p grid must increase");
  }
  const std::size_t n = samples.size();
  double smax = 0.0;
  for (double s : samples) {
    if (!std::isfinite(s)) throw ArgumentError("samples must be finite");
    smax = std::max(smax, std::abs(s));
  }

  MomentProfile out;
  out.p_grid.assign(p_grid.begin(), p_grid.end());
  out.moments.assign(p_grid.size(), 0.0);
  out.standard_errors.assign(p_grid.size(), 0.0);
  if (smax == 0.0) return out;

  std::vector<double> y(n);
  for (std::size_t k = 0; k < p_grid.size(); ++k) {
    const double p = p_grid[k];
    double m = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      y[j] = std::pow(std::abs(samples[j]) / smax, p);
      m += weights.empty() ? y[j] : weights[j] * y[j];
    }
    if (weights.empty()) m /= static_cast<double>(n);
    double var_of_mean = 0.0;
    if (weights.empty()) {
      if (n > 1) {
        double ss = 0.0;
        for (double v : y) ss += (v - m) * (v - m);
        var_of_mean = ss / static_cast<double>(n - 1) / static_cast<double>(n);
      }
    } else {
      for (std::size_t j = 0; j < n; ++j) var_of_mean += weights[j] * weights[j] * (y[j] - m) * (y[j] - m);
    }
    out.moments[k] = smax * std::pow(m, 1.0 / p);
    out.standard_errors[k] =
        m > 0.0 ? smax * std::pow(m, 1.0 / p - 1.0) / p * std::sqrt(var_of_mean) : 0.0;
  }
  for (std::size_t k = 1; k < p_grid.size(); ++k) {
    const double slack = 3.0 * (out.standard_errors[k] + out.standard_errors[k - 1]);
    if (out.moments[k] < out.moments[k - 1] - slack - 1e-12 * out.moments[k - 1]) {
      out.warnings.push_back("moment decreases from p=" + num(p_grid[k - 1]) + " to p=" +
                             num(p_grid[k]) + " beyond 3 SE");
    }
  }
  return out;
}

std::string moment_profile_csv(const MomentProfile& profile) {
  CsvTable t({"p", "moment"});
  for (std::size_t i = 0; i < profile.p_grid.size(); ++i) {
    t.add_row(std::vector<double>{profile.p_grid[i], profile.moments[i]});
  }
  return t.str();
}

GpsiNorm gpsi_norm(const MomentProfile& profile, const PsiFunction& psi) {
  if (profile.p_grid.size() != profile.moments.size()) {
    throw ArgumentError("moment profile grid and values differ in length");
  }
  GpsiNorm out;
  bool any = false;
  for (std::size_t i = 0; i < profile.p_grid.size(); ++i) {
    const auto v = psi(profile.p_grid[i]);
    if (!v) continue;
    const double ratio = profile.moments[i] / *v;
    if (!any || ratio > out.value) {
      out.value = ratio;
      out.argmax = profile.p_grid[i];
    }
    any = true;
  }
  if (!any) {
    throw SupportError("moment profile has no exponent inside the support of " + psi.describe());
  }
  return out;
}

FundamentalValue fundamental_sup(const PsiFunction& psi, double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw DomainError("fundamental function argument must be positive and finite");
  }
  FundamentalValue out;
  out.argument_above_one = delta > 1.0;
  bool any = false;
  for (double p : psi.interior_grid()) {
    const auto v = psi(p);
    if (!v) continue;
    const double ratio = std::pow(delta, 1.0 / p) / *v;
    if (!any || ratio > out.value) {
      out.value = ratio;
      out.argmax = p;
    }
    any = true;
  }
  if (!any) throw SupportError("no grid point inside the support of " + psi.describe());
  return out;
}

double fundamental_function(const PsiFunction& psi, double delta) {
  if (!(delta > 0.0) || delta > 1.0) throw DomainError("fundamental function needs delta in (0, 1]");
  return fundamental_sup(psi, delta).value;
}

PsiFunction natural_psi(std::span<const MomentProfile> profiles) {
  if (profiles.empty()) throw ArgumentError("natural_psi needs at least one profile");
  const auto& grid = profiles.front().p_grid;
  std::vector<double> best(grid.size(), 0.0);
  for (const auto& prof : profiles) {
    if (prof.p_grid != grid || prof.moments.size() != grid.size()) {
      throw ArgumentError("natural_psi profiles must share the same p grid");
    }
    for (std::size_t i = 0; i < grid.size(); ++i) best[i] = std::max(best[i], prof.moments[i]);
  }
  return PsiFunction::tabulated(grid, std::move(best));
}

PsiFunction psi_theta(const PsiFunction& psi, double theta) {
  return PsiFunction::theta_damped(psi, theta);
}

PsiFunction rosenthal_psi(const PsiFunction& psi) { return PsiFunction::rosenthal(psi); }

PsiFunction psi_from_bphi(const ConvexGridFunction& phi, std::optional<double> p_max) {
  const auto& x = phi.abscissae();
  const auto& y = phi.values();
  auto start = std::lower_bound(x.begin(), x.end(), 0.0);
  if (start == x.end() || std::next(start) == x.end()) {
    throw RangeError("phi grid has no increasing branch on [0, inf)");
  }
  const std::size_t first = static_cast<std::size_t>(start - x.begin());
  for (std::size_t i = first + 1; i < x.size(); ++i) {
    if (!(y[i] > y[i - 1])) {
      throw ValidationError("phi must be strictly increasing on its nonnegative branch");
    }
  }
  const double top = y.back();
  const double pm = p_max.value_or(top);
  if (pm > top) {
    throw RangeError("p_max=" + num(pm) + " exceeds the phi grid range, whose values end at " +
                     num(top));
  }
  if (!(pm > 2.0)) {
    throw RangeError("phi grid values end at " + num(top) + ", below p=2");
  }
  auto inverse = [&](double p) {
    if (p <= y[first]) return x[first];
    auto it = std::lower_bound(y.begin() + static_cast<std::ptrdiff_t>(first), y.end(), p);
    const std::size_t k = static_cast<std::size_t>(it - y.begin());
    if (y[k] == p) return x[k];
    const double t = (p - y[k - 1]) / (y[k] - y[k - 1]);
    return x[k - 1] + t * (x[k] - x[k - 1]);
  };
  auto p_grid = geomspace(2.0, pm, 256);
  std::vector<double> values(p_grid.size());
  for (std::size_t i = 0; i < p_grid.size(); ++i) values[i] = p_grid[i] / inverse(p_grid[i]);
  return PsiFunction::tabulated(std::move(p_grid), std::move(values));
}

namespace {

double psi_tilde_conjugate(const PsiFunction& psi, double x) {
  auto grid = psi.interior_grid();
  std::vector<double> h(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto v = psi(grid[i]);
    if (!v) throw SupportError("psi grid point outside its support");
    h[i] = grid[i] * std::log(*v);
  }
  const auto hull = convex_minorant(std::move(grid), std::move(h));
  const double at[] = {x};
  return fenchel_conjugate(hull, at).values().front();
}

}  // namespace

double tail_bound_from_gpsi(const PsiFunction& psi, double norm, double z) {
  if (!(norm > 0.0) || !std::isfinite(norm)) throw DomainError("Gpsi tail bound needs norm > 0");
  if (!(z >= norm)) {
    throw DomainError("Gpsi tail bound is only claimed for z >= norm (z=" + num(z) +
                      ", norm=" + num(norm) + ")");
  }
  if (std::isinf(z)) return 0.0;
  const double e = psi_tilde_conjugate(psi, std::log(z / norm));
  return std::min(1.0, 2.0 * std::exp(-e));
}

double orlicz_from_psi(const PsiFunction& psi, double u, double small_u_constant) {
  const double a = std::abs(u);
  if (a <= 3.0) return small_u_constant * u * u;
  return std::exp(psi_tilde_conjugate(psi, std::log(a)));
}

}  // namespace mmchain
