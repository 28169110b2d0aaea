#include "mmchain/scenario.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "mmchain/bounds.hpp"
#include "mmchain/chaining.hpp"
#include "mmchain/fieldsim.hpp"
#include "mmchain/glspace.hpp"
#include "mmchain/io.hpp"
#include "mmchain/mspace.hpp"
#include "mmchain/orlicz.hpp"

#ifndef MMCHAIN_SCENARIO_DIR
#define MMCHAIN_SCENARIO_DIR "scenarios"
#endif

namespace mmchain {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
  std::string out = "invalid config (" + std::to_string(problems.size()) + " problem" +
                    (problems.size() == 1 ? "" : "s") + ")";
  for (const auto& p : problems) out += "\n  - " + p;
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : Error(join_problems(problems)), problems_(std::move(problems)) {}

// ---------------------------------------------------------------------------
// Schema

namespace {

const std::vector<std::string> kTopKeys = {"name", "description", "space", "field", "phi", "psi",
                                           "analyses", "run", "bounds", "clt", "output"};
const std::vector<std::string> kAnalyses = {"norms", "wdist", "verdict", "bounds", "tails", "clt", "verify"};
const std::vector<std::string> kRunKeys = {"paths", "seed", "verify_paths", "u_grid"};
const std::vector<std::string> kCltKeys = {"base", "rho", "points", "n_list", "threshold", "covariance"};
const std::vector<std::string> kBoundKeys = {"fit_theta", "holder_lp", "holder_gpsi", "sup_norm", "exp_entropy"};

using Problems = std::vector<std::string>;

bool contains(const std::vector<std::string>& list, const std::string& s) {
  return std::find(list.begin(), list.end(), s) != list.end();
}

void check_keys(const json& obj, const std::vector<std::string>& allowed, const std::string& where, Problems& errs) {
  if (!obj.is_object()) {
    errs.push_back(where + ": expected an object");
    return;
  }
  for (const auto& [key, value] : obj.items()) {
    if (!contains(allowed, key)) errs.push_back(where + ": unknown key '" + key + "'");
  }
}

void check_number(const json& obj, const std::string& key, const std::string& where, Problems& errs,
                  bool required, bool positive = false) {
  if (!obj.is_object() || !obj.contains(key)) {
    if (required) errs.push_back(where + ": missing '" + key + "'");
    return;
  }
  const auto& v = obj.at(key);
  if (!v.is_number()) {
    errs.push_back(where + "." + key + ": expected a number");
  } else if (positive && !(v.get<double>() > 0.0)) {
    errs.push_back(where + "." + key + ": must be > 0");
  }
}

void check_count(const json& obj, const std::string& key, const std::string& where, Problems& errs) {
  if (!obj.is_object() || !obj.contains(key)) return;
  const auto& v = obj.at(key);
  if (!v.is_number_unsigned() || v.get<std::uint64_t>() == 0) {
    errs.push_back(where + "." + key + ": expected a positive integer");
  }
}

void check_number_list(const json& obj, const std::string& key, const std::string& where, Problems& errs) {
  if (!obj.is_object() || !obj.contains(key)) return;
  const auto& v = obj.at(key);
  if (!v.is_array() || v.empty()) {
    errs.push_back(where + "." + key + ": expected a non-empty array of numbers");
    return;
  }
  for (const auto& e : v) {
    if (!e.is_number()) {
      errs.push_back(where + "." + key + ": expected a non-empty array of numbers");
      return;
    }
  }
}

template <class F>
void try_parse(const std::string& where, Problems& errs, F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    errs.push_back(where + ": " + e.what());
  }
}

std::vector<json> phi_list(const json& config) {
  if (!config.contains("phi")) return {};
  const auto& p = config.at("phi");
  if (p.is_array()) return std::vector<json>(p.begin(), p.end());
  return {p};
}

bool wants(const json& config, const std::string& analysis) {
  if (!config.contains("analyses") || !config.at("analyses").is_array()) return false;
  for (const auto& a : config.at("analyses")) {
    if (a.is_string() && a.get<std::string>() == analysis) return true;
  }
  return false;
}

void validate_bounds(const json& b, Problems& errs) {
  check_keys(b, kBoundKeys, "bounds", errs);
  if (!b.is_object()) return;
  if (b.contains("fit_theta") && !b.at("fit_theta").is_boolean()) errs.push_back("bounds.fit_theta: expected a boolean");
  if (b.contains("holder_lp")) {
    const auto& h = b.at("holder_lp");
    check_keys(h, {"p", "theta", "c_theta", "d", "z"}, "bounds.holder_lp", errs);
    check_number(h, "p", "bounds.holder_lp", errs, true, true);
    check_number(h, "theta", "bounds.holder_lp", errs, false, true);
    check_number(h, "c_theta", "bounds.holder_lp", errs, false, true);
    check_number(h, "d", "bounds.holder_lp", errs, true, true);
    check_number(h, "z", "bounds.holder_lp", errs, false, true);
  }
  if (b.contains("holder_gpsi")) {
    const auto& h = b.at("holder_gpsi");
    check_keys(h, {"theta", "c_theta", "d"}, "bounds.holder_gpsi", errs);
    check_number(h, "theta", "bounds.holder_gpsi", errs, false, true);
    check_number(h, "c_theta", "bounds.holder_gpsi", errs, false, true);
    check_number(h, "d", "bounds.holder_gpsi", errs, true, true);
  }
  if (b.contains("sup_norm")) {
    const auto& h = b.at("sup_norm");
    check_keys(h, {"theta", "c_theta", "diameter", "anchors"}, "bounds.sup_norm", errs);
    check_number(h, "theta", "bounds.sup_norm", errs, false, true);
    check_number(h, "c_theta", "bounds.sup_norm", errs, false, true);
    check_number(h, "diameter", "bounds.sup_norm", errs, false, true);
    check_number_list(h, "anchors", "bounds.sup_norm", errs);
  }
  if (b.contains("exp_entropy")) {
    const auto& h = b.at("exp_entropy");
    check_keys(h, {"beta", "c2", "c4", "c5", "c7", "diameter", "u"}, "bounds.exp_entropy", errs);
    for (const char* k : {"beta", "c2", "c4", "c5", "c7", "diameter"}) {
      check_number(h, k, "bounds.exp_entropy", errs, false, true);
    }
    check_number_list(h, "u", "bounds.exp_entropy", errs);
  }
}

}  // namespace

void validate_config(const json& config) {
  Problems errs;
  if (!config.is_object()) throw ConfigError({"config: expected a JSON object"});
  check_keys(config, kTopKeys, "config", errs);

  if (!config.contains("name") || !config.at("name").is_string() || config.at("name").get<std::string>().empty()) {
    errs.push_back("name: expected a non-empty string");
  } else {
    const auto name = config.at("name").get<std::string>();
    const bool ok = std::all_of(name.begin(), name.end(), [](char c) {
      return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
    });
    if (!ok) errs.push_back("name: only letters, digits, '_' and '-' are allowed");
  }
  if (config.contains("description") && !config.at("description").is_string()) {
    errs.push_back("description: expected a string");
  }

  if (!config.contains("space")) {
    errs.push_back("space: missing");
  } else {
    try_parse("space", errs, [&] { (void)metric_measure_space_from_json(config.at("space")); });
  }

  const auto phis = phi_list(config);
  for (std::size_t i = 0; i < phis.size(); ++i) {
    try_parse("phi[" + std::to_string(i) + "]", errs, [&] { (void)young_function_from_json(phis[i]); });
  }
  if (config.contains("psi")) try_parse("psi", errs, [&] { (void)psi_function_from_json(config.at("psi")); });

  if (!config.contains("analyses") || !config.at("analyses").is_array() || config.at("analyses").empty()) {
    errs.push_back("analyses: expected a non-empty array");
  } else {
    for (const auto& a : config.at("analyses")) {
      if (!a.is_string() || !contains(kAnalyses, a.get<std::string>())) {
        errs.push_back("analyses: unknown analysis " + a.dump());
      }
    }
  }

  if (config.contains("run")) {
    const auto& r = config.at("run");
    check_keys(r, kRunKeys, "run", errs);
    check_count(r, "paths", "run", errs);
    check_count(r, "verify_paths", "run", errs);
    if (r.is_object() && r.contains("seed") && !r.at("seed").is_number_unsigned()) {
      errs.push_back("run.seed: expected a nonnegative integer");
    }
    check_number_list(r, "u_grid", "run", errs);
  }

  if (config.contains("field")) {
    const auto& f = config.at("field");
    check_keys(f, {"covariance"}, "field", errs);
    if (f.is_object() && f.contains("covariance")) {
      try_parse("field.covariance", errs, [&] { (void)covariance_from_json(f.at("covariance")); });
    }
  }
  if (config.contains("bounds")) validate_bounds(config.at("bounds"), errs);
  if (config.contains("clt")) {
    const auto& c = config.at("clt");
    check_keys(c, kCltKeys, "clt", errs);
    if (c.is_object()) {
      if (c.contains("base") && (!c.at("base").is_string() ||
                                 !contains({"gaussian", "rademacher_markov", "sign_gaussian"},
                                           c.at("base").get<std::string>()))) {
        errs.push_back("clt.base: expected gaussian, rademacher_markov or sign_gaussian");
      }
      check_number(c, "rho", "clt", errs, false);
      check_number(c, "threshold", "clt", errs, false, true);
      check_count(c, "points", "clt", errs);
      if (c.contains("n_list")) {
        const auto& n = c.at("n_list");
        if (!n.is_array() || n.empty() ||
            !std::all_of(n.begin(), n.end(), [](const json& e) { return e.is_number_unsigned() && e.get<std::uint64_t>() > 0; })) {
          errs.push_back("clt.n_list: expected a non-empty array of positive integers");
        }
      }
      if (c.contains("covariance")) {
        try_parse("clt.covariance", errs, [&] { (void)covariance_from_json(c.at("covariance")); });
      }
    }
  }
  if (config.contains("output")) {
    const auto& o = config.at("output");
    check_keys(o, {"dir"}, "output", errs);
    if (o.is_object() && o.contains("dir") && !o.at("dir").is_string()) errs.push_back("output.dir: expected a string");
  }

  // Cross-section requirements.
  const bool needs_field = wants(config, "norms") || wants(config, "wdist") || wants(config, "tails") ||
                           wants(config, "verify");
  if (needs_field && !config.contains("field")) errs.push_back("analyses need a 'field' section");
  if ((needs_field || wants(config, "verdict")) && phis.empty()) errs.push_back("analyses need at least one 'phi'");
  if (wants(config, "bounds") && !config.contains("bounds")) errs.push_back("analysis 'bounds' needs a 'bounds' section");
  if (wants(config, "tails") && !(config.contains("run") && config.at("run").is_object() &&
                                  config.at("run").contains("u_grid"))) {
    errs.push_back("analysis 'tails' needs run.u_grid");
  }
  if (!errs.empty()) throw ConfigError(std::move(errs));
}

void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ArgumentError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json* node = &config;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ArgumentError("override '" + assignment + "' has an empty key segment");
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(part);
      } catch (const std::exception&) {
        throw ArgumentError("override '" + assignment + "': '" + part + "' is not an array index");
      }
      if (idx >= node->size()) throw ArgumentError("override '" + assignment + "': index out of range");
      node = &(*node)[idx];
    } else {
      if (!node->is_object()) *node = json::object();
      node = &(*node)[part];
    }
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = value;
}

// ---------------------------------------------------------------------------
// Running

namespace {

struct Artifact {
  std::string name;
  std::string kind;
  std::string sha256;
};

class ArtifactWriter {
 public:
  explicit ArtifactWriter(fs::path dir) : dir_(std::move(dir)) {}

  void add(const std::string& name, const std::string& kind, const std::string& content) {
    write_file(dir_ / name, content);
    artifacts_.push_back({name, kind, sha256_hex(content)});
  }
  void add_json(const std::string& name, const std::string& kind, const json& j) { add(name, kind, j.dump(2) + "\n"); }

  const std::vector<Artifact>& artifacts() const noexcept { return artifacts_; }
  const fs::path& dir() const noexcept { return dir_; }

 private:
  fs::path dir_;
  std::vector<Artifact> artifacts_;
};

std::string phi_tag(const YoungFunction& phi) {
  switch (phi.family()) {
    case YoungFunction::Family::power:
      return "power" + format_number(phi.parameter());
    case YoungFunction::Family::exp_power:
      return "exp_power" + format_number(phi.parameter());
    case YoungFunction::Family::exp_quadratic:
      return "exp_quadratic";
    case YoungFunction::Family::tabulated:
      return "tabulated" + std::to_string(phi.knots().size());
  }
  return "phi";
}

void log_line(const RunOptions& o, const std::string& s) {
  if (o.log) *o.log << s << '\n';
}

json theta_fit_json(const ThetaFit& fit) {
  return {{"theta", format_number(fit.theta)},
          {"c_theta", format_number(fit.c_theta)},
          {"objective", format_number(fit.objective)},
          {"certificate_rows", fit.certificate.size()}};
}

std::vector<double> numbers(const json& j) { return j.get<std::vector<double>>(); }

std::string tail_csv(const EntropyTailRun& run) {
  CsvTable t({"side", "u", "empirical", "se", "bound", "delta_star"});
  auto rows = [&](const TailCurve& c, const std::vector<BoundResult>& b, const char* side) {
    for (std::size_t i = 0; i < c.u.size(); ++i) {
      const auto ds = b[i].inputs.find("delta_star");
      t.add_row({side, format_number(c.u[i]), format_number(c.probability[i]), format_number(c.standard_error[i]),
                 format_number(b[i].value), ds == b[i].inputs.end() ? "" : format_number(ds->second)});
    }
  };
  rows(run.one_sided, run.one_sided_bounds, "one_sided");
  rows(run.two_sided, run.two_sided_bounds, "two_sided");
  return t.str();
}

json run_bounds(const json& cfg, const MetricMeasureSpace& space, const std::optional<PsiFunction>& psi_cfg) {
  json out = json::array();
  const PsiFunction psi = psi_cfg ? *psi_cfg : PsiFunction::power(2.0);
  std::optional<ThetaFit> fit;
  const bool need_fit = cfg.value("fit_theta", false) ||
                        (cfg.contains("holder_gpsi") && !cfg.at("holder_gpsi").contains("theta")) ||
                        (cfg.contains("holder_lp") && !cfg.at("holder_lp").contains("theta")) ||
                        (cfg.contains("sup_norm") && !cfg.at("sup_norm").contains("theta"));
  if (need_fit) {
    fit = fit_theta(space, {}, psi);
    out.push_back({{"theta_fit", theta_fit_json(*fit)}});
  }
  auto theta_of = [&](const json& h) { return h.contains("theta") ? h.at("theta").get<double>() : fit->theta; };
  auto c_of = [&](const json& h, double theta) {
    if (h.contains("c_theta")) return h.at("c_theta").get<double>();
    return fit && theta == fit->theta ? fit->c_theta : theta_constant(space, theta, default_r_grid(space));
  };
  if (cfg.contains("holder_lp")) {
    const auto& h = cfg.at("holder_lp");
    const double theta = theta_of(h);
    json j = holder_bound_lp(h.at("p").get<double>(), theta, c_of(h, theta), h.at("d").get<double>(),
                             h.value("z", 1.0));
    out.push_back(j);
  }
  if (cfg.contains("holder_gpsi")) {
    const auto& h = cfg.at("holder_gpsi");
    const double theta = theta_of(h);
    json j = holder_bound_gpsi(psi, theta, c_of(h, theta), h.at("d").get<double>());
    out.push_back(j);
  }
  if (cfg.contains("sup_norm")) {
    const auto& h = cfg.at("sup_norm");
    const double theta = theta_of(h);
    const auto anchors = h.contains("anchors") ? numbers(h.at("anchors")) : std::vector<double>{0.0};
    json j = sup_norm_bound(psi, theta, c_of(h, theta), h.value("diameter", diameter(space)), anchors);
    out.push_back(j);
  }
  if (cfg.contains("exp_entropy")) {
    const auto& h = cfg.at("exp_entropy");
    ExpEntropyConstants c;
    c.beta = h.value("beta", c.beta);
    c.c2 = h.value("c2", c.c2);
    c.c4 = h.value("c4", c.c4);
    c.c5 = h.value("c5", c.c5);
    c.c7 = h.value("c7", c.c7);
    c.diameter = h.value("diameter", c.diameter);
    const double c6 = fit_c6(c);
    const auto us = h.contains("u") ? numbers(h.at("u")) : std::vector<double>{c.c7};
    for (double u : us) {
      json j = tail_bound_exp_entropy(u, c, c6);
      out.push_back(j);
    }
  }
  return out;
}

BaseField base_field_from(const json& cfg, const MetricMeasureSpace& space) {
  BaseField b;
  const auto kind = cfg.value("base", std::string("rademacher_markov"));
  b.points = cfg.value("points", static_cast<std::size_t>(space.size()));
  b.rho = cfg.value("rho", b.rho);
  if (kind == "rademacher_markov") {
    b.kind = BaseField::Kind::rademacher_markov;
  } else {
    b.kind = kind == "gaussian" ? BaseField::Kind::gaussian : BaseField::Kind::sign_gaussian;
    const auto cov = cfg.contains("covariance") ? covariance_from_json(cfg.at("covariance")) : CovarianceModel{};
    b.gaussian_covariance = cov.matrix(space);
    b.points = space.size();
  }
  return b;
}

json verdict_entry(const std::string& analysis, const VerificationReport& r) {
  std::size_t violated = 0;
  std::size_t slack = 0;
  for (const auto& c : r.checks) {
    violated += c.verdict == Verdict::violated;
    slack += c.verdict == Verdict::holds_within_slack;
  }
  return {{"analysis", analysis},
          {"passed", r.passed()},
          {"checks", r.checks.size()},
          {"within_slack", slack},
          {"violated", violated}};
}

}  // namespace

RunResult run_scenario(const json& config_in, const RunOptions& options) {
  json config = config_in;
  for (const auto& o : options.overrides) apply_override(config, o);
  validate_config(config);

  const auto name = config.at("name").get<std::string>();
  json hashed = config;
  hashed.erase("output");
  const std::string config_hash = sha256_hex(hashed.dump());

  fs::path out_root = options.out_dir;
  if (out_root.empty()) {
    out_root = config.contains("output") && config.at("output").contains("dir")
                   ? fs::path(config.at("output").at("dir").get<std::string>())
                   : default_out_dir();
  }
  const fs::path dir = out_root / name;
  fs::create_directories(dir);
  ArtifactWriter art(dir);

  const json run = config.value("run", json::object());
  const std::uint64_t seed = run.value("seed", std::uint64_t{1});
  const std::size_t n_paths = run.value("paths", std::size_t{10000});
  const std::size_t verify_paths = run.value("verify_paths", n_paths);
  const auto u_grid = run.contains("u_grid") ? numbers(run.at("u_grid")) : std::vector<double>{};

  std::vector<YoungFunction> phis;
  for (const auto& p : phi_list(config)) phis.push_back(young_function_from_json(p));
  std::optional<PsiFunction> psi;
  if (config.contains("psi")) psi = psi_function_from_json(config.at("psi"));

  json verdicts = json::array();
  bool violated = false;
  auto record = [&](const std::string& analysis, const VerificationReport& rep) {
    verdicts.push_back(verdict_entry(analysis, rep));
    violated = violated || !rep.passed();
    log_line(options, "  " + analysis + ": " + (rep.passed() ? "passed" : "VIOLATED"));
  };

  // space -> distances -> verdict -> bounds -> simulation-based verification.
  log_line(options, "scenario " + name);
  const auto space = metric_measure_space_from_json(config.at("space"));

  std::optional<SamplePaths> paths;
  if (config.contains("field")) {
    const auto cov = covariance_from_json(config.at("field").value("covariance", json{{"kind", "independent"}}));
    paths = simulate_gaussian_field(space, cov, n_paths, seed, options.exec);
  }

  std::vector<std::optional<DistanceMatrix>> d_phi(phis.size());
  for (std::size_t k = 0; k < phis.size(); ++k) {
    const auto& phi = phis[k];
    const std::string tag = phi_tag(phi);
    auto& d = d_phi[k];
    const bool need_d = wants(config, "wdist") || wants(config, "verdict") || wants(config, "verify");
    if (need_d) {
      d = paths ? natural_distance(*paths, phi, options.exec)
                : DistanceMatrix(space.distances(), DistanceMatrix::Provenance::given, space.id());
    }
    if (wants(config, "norms")) {
      CsvTable t({"point", "norm"});
      for (std::size_t x = 0; x < space.size(); ++x) {
        t.add_row({std::to_string(x), format_number(luxemburg_norm(paths->column(x), phi))});
      }
      art.add("norms_" + tag + ".csv", "norms", t.str());
    }
    if (wants(config, "wdist")) {
      art.add("distance_" + tag + ".csv", "distance", distance_matrix_csv(*d));
      const DistanceMatrix w(WDistance(space, phi, *d).matrix(1.0), DistanceMatrix::Provenance::w_metric, "V=1");
      art.add("w_" + tag + ".csv", "w_distance", distance_matrix_csv(w));
    }
    if (wants(config, "verdict")) {
      json j = minorizing_verdict(space, phi, *d);
      art.add_json("verdict_" + tag + ".json", "verdict", j);
    }
  }

  if (wants(config, "bounds")) {
    art.add_json("bounds.json", "bounds", run_bounds(config.at("bounds"), space, psi));
  }

  for (std::size_t k = 0; k < phis.size(); ++k) {
    const auto& phi = phis[k];
    const std::string tag = phi_tag(phi);
    if (wants(config, "verify")) {
      log_line(options, "  verify " + tag);
      const auto rep = verify_arnold_imkeller(*paths, space, phi, *d_phi[k], options.exec, verify_paths);
      json j = rep;
      art.add_json("verify_" + tag + ".json", "verification", j);
      record("verify:" + tag, rep);
    }
    if (wants(config, "tails")) {
      log_line(options, "  tails " + tag);
      const auto tr = entropy_tail_pipeline(*paths, space, phi, u_grid, options.exec);
      art.add("tails_" + tag + ".csv", "tail_curve", tail_csv(tr));
      json j = tr.report;
      art.add_json("tails_" + tag + ".json", "verification", j);
      record("tails:" + tag, tr.report);
    }
  }

  if (wants(config, "clt")) {
    const json c = config.value("clt", json::object());
    const auto base = base_field_from(c, space);
    const auto n_list = c.value("n_list", std::vector<std::size_t>{4, 16, 64, 256, 1024});
    log_line(options, "  clt " + base_field_name(base.kind));
    const auto res = clt_experiment(base, n_list, n_paths, seed, c.value("threshold", 0.02), options.exec);
    CsvTable t({"n", "ks"});
    for (const auto& row : res.rows) t.add_row({std::to_string(row.n), format_number(row.ks)});
    art.add("clt.csv", "clt_curve", t.str());
    json j = res.report;
    art.add_json("clt.json", "verification", j);
    record("clt", res.report);
  }

  RunResult result;
  result.exit_code = violated ? kExitViolation : kExitOk;
  json artifacts = json::array();
  for (const auto& a : art.artifacts()) artifacts.push_back({{"name", a.name}, {"kind", a.kind}, {"sha256", a.sha256}});
  result.manifest_json = {{"scenario", name},
                          {"config_sha256", config_hash},
                          {"seed", seed},
                          {"paths", n_paths},
                          {"artifacts", artifacts},
                          {"verdicts", verdicts},
                          {"exit_code", result.exit_code}};
  result.manifest = dir / "manifest.json";
  write_file(result.manifest, result.manifest_json.dump(2) + "\n");
  return result;
}

RunResult run_config_file(const fs::path& config_path, const RunOptions& options) {
  json config;
  try {
    config = json::parse(read_file(config_path));
  } catch (const json::parse_error& e) {
    throw ArgumentError("cannot parse " + config_path.string() + ": " + e.what());
  }
  if (!(config.is_object() && config.contains("suite"))) return run_scenario(config, options);

  const auto& list = config.at("suite");
  if (!list.is_array() || list.empty()) throw ConfigError({"suite: expected a non-empty array of config paths"});
  for (const auto& [key, value] : config.items()) {
    if (key != "suite" && key != "name") throw ConfigError({"suite: unknown key '" + key + "'"});
  }
  // Validate every member before running any of them.
  std::vector<json> members;
  Problems errs;
  for (const auto& entry : list) {
    if (!entry.is_string()) {
      errs.push_back("suite: entries must be file paths");
      continue;
    }
    const fs::path p = config_path.parent_path() / entry.get<std::string>();
    try {
      json m = json::parse(read_file(p));
      for (const auto& o : options.overrides) apply_override(m, o);
      validate_config(m);
      members.push_back(std::move(m));
    } catch (const ConfigError& e) {
      for (const auto& pr : e.problems()) errs.push_back(entry.get<std::string>() + ": " + pr);
    } catch (const std::exception& e) {
      errs.push_back(entry.get<std::string>() + ": " + e.what());
    }
  }
  if (!errs.empty()) throw ConfigError(std::move(errs));

  RunOptions member_options = options;
  member_options.overrides.clear();
  fs::path out_root = options.out_dir.empty() ? default_out_dir() : options.out_dir;
  member_options.out_dir = out_root;

  RunResult result;
  json entries = json::array();
  for (const auto& m : members) {
    const auto r = run_scenario(m, member_options);
    entries.push_back({{"scenario", r.manifest_json.at("scenario")},
                       {"manifest", fs::relative(r.manifest, out_root).generic_string()},
                       {"manifest_sha256", sha256_hex(read_file(r.manifest))},
                       {"exit_code", r.exit_code}});
    result.exit_code = std::max(result.exit_code, r.exit_code);
  }
  result.manifest_json = {{"suite", config.value("name", config_path.stem().string())},
                          {"scenarios", entries},
                          {"exit_code", result.exit_code}};
  result.manifest = out_root / "suite_manifest.json";
  write_file(result.manifest, result.manifest_json.dump(2) + "\n");
  return result;
}

// ---------------------------------------------------------------------------
// Report

namespace {

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

void report_scenario(const fs::path& manifest_path, const json& m, std::ostringstream& out, CsvTable& plot) {
  const fs::path dir = manifest_path.parent_path();
  if (!m.contains("artifacts") || !m.at("artifacts").is_array()) {
    throw ValidationError(manifest_path.string() + ": manifest has no artifact list");
  }
  const auto scenario = m.at("scenario").get<std::string>();
  out << "scenario " << scenario << "\n";
  out << "  seed " << m.at("seed").dump() << ", paths " << m.at("paths").dump() << ", exit code "
      << m.at("exit_code").dump() << "\n";
  out << "  config sha256 " << m.at("config_sha256").get<std::string>() << "\n";
  for (const auto& v : m.at("verdicts")) {
    out << "  verdict " << pad(v.at("analysis").get<std::string>(), 28) << (v.at("passed").get<bool>() ? "passed" : "VIOLATED")
        << " (" << v.at("checks").dump() << " checks, " << v.at("within_slack").dump() << " within slack, "
        << v.at("violated").dump() << " violated)\n";
  }
  for (const auto& a : m.at("artifacts")) {
    const auto name = a.at("name").get<std::string>();
    const auto kind = a.at("kind").get<std::string>();
    const std::string content = read_file(dir / name);
    if (sha256_hex(content) != a.at("sha256").get<std::string>()) {
      throw ValidationError("artifact " + name + " does not match its manifest hash");
    }
    out << "  artifact " << pad(name, 28) << kind << "\n";
    if (kind == "tail_curve") {
      const auto rows = parse_csv(content);
      out << "    " << pad("side", 11) << pad("u", 6) << pad("bound", 24) << pad("empirical", 24) << "se\n";
      for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        out << "    " << pad(r[0], 11) << pad(r[1], 6) << pad(r[4], 24) << pad(r[2], 24) << r[3] << "\n";
        plot.add_row({scenario, name, r[0], r[1], r[4], r[2], r[3]});
      }
    } else if (kind == "clt_curve") {
      const auto rows = parse_csv(content);
      for (std::size_t i = 1; i < rows.size(); ++i) {
        out << "    n=" << pad(rows[i][0], 6) << "ks=" << rows[i][1] << "\n";
        plot.add_row({scenario, name, "ks", rows[i][0], "", rows[i][1], ""});
      }
    } else if (kind == "verification") {
      const json r = json::parse(content);
      for (const auto& [k, v] : r.at("metrics").items()) out << "    " << pad(k, 26) << v.get<std::string>() << "\n";
      for (const auto& w : r.at("warnings")) out << "    warning: " << w.get<std::string>() << "\n";
    }
  }
}

}  // namespace

std::string report(const fs::path& manifest_path) {
  const std::string text = read_file(manifest_path);
  json m = json::parse(text, nullptr, false);
  if (m.is_discarded()) throw ArgumentError(manifest_path.string() + ": not a JSON manifest");
  if (m.empty() || (m.is_object() && m.contains("artifacts") && m.at("artifacts").empty() &&
                    m.value("verdicts", json::array()).empty())) {
    throw ArgumentError(manifest_path.string() + ": empty manifest");
  }
  std::ostringstream out;
  CsvTable plot({"scenario", "artifact", "series", "x", "bound", "empirical", "se"});
  if (m.contains("scenarios")) {
    out << "suite " << m.at("suite").get<std::string>() << ", exit code " << m.at("exit_code").dump() << "\n";
    for (const auto& s : m.at("scenarios")) {
      const fs::path p = manifest_path.parent_path() / s.at("manifest").get<std::string>();
      const std::string member = read_file(p);
      if (sha256_hex(member) != s.at("manifest_sha256").get<std::string>()) {
        throw ValidationError("manifest " + p.string() + " does not match the suite hash");
      }
      report_scenario(p, json::parse(member), out, plot);
    }
  } else {
    report_scenario(manifest_path, m, out, plot);
  }
  write_file(manifest_path.parent_path() / (manifest_path.stem().string() + "_report.csv"), plot.str());
  return out.str();
}

std::string list_scenarios(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ArgumentError("scenario directory " + dir.string() + " does not exist");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::ostringstream out;
  for (const auto& f : files) {
    const json j = json::parse(read_file(f), nullptr, false);
    out << pad(f.filename().string(), 26);
    if (j.is_discarded()) {
      out << "(unparseable)\n";
    } else if (j.contains("suite")) {
      out << "suite of " << j.at("suite").size() << " scenarios\n";
    } else {
      std::string analyses;
      for (const auto& a : j.value("analyses", json::array())) analyses += (analyses.empty() ? "" : ",") + a.get<std::string>();
      out << pad(j.value("name", std::string("?")), 20) << analyses << "\n";
    }
  }
  return out.str();
}

fs::path default_out_dir() {
  if (const char* v = std::getenv("MMCHAIN_OUT"); v != nullptr && *v != '\0') return v;
  return "mmchain_out";
}

fs::path default_scenario_dir() {
  if (const char* v = std::getenv("MMCHAIN_SCENARIOS"); v != nullptr && *v != '\0') return v;
  return MMCHAIN_SCENARIO_DIR;
}

}  // namespace mmchain
