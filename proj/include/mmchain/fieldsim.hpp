#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mmchain/bounds.hpp"
#include "mmchain/chaining.hpp"
#include "mmchain/common.hpp"
#include "mmchain/mspace.hpp"
#include "mmchain/orlicz.hpp"
#include "mmchain/sample_paths.hpp"

namespace mmchain {

/// Engine for one path: the stream is keyed by (seed, stream, path) so any
/// schedule of paths over threads draws the same numbers.
std::mt19937_64 path_engine(std::uint64_t seed, std::uint64_t path, std::uint64_t stream = 0);

struct CovarianceModel {
  enum class Kind { squared_exponential, brownian_like, independent, custom };
  Kind kind = Kind::independent;
  double length_scale = 0.25;
  double variance = 1.0;
  Eigen::MatrixXd custom;

  /// R on the points of the space. brownian_like needs grid coordinates and
  /// uses prod_k min(s_k, t_k).
  Eigen::MatrixXd matrix(const MetricMeasureSpace& space) const;
};

CovarianceModel covariance_from_json(const nlohmann::json& j);
std::string covariance_name(CovarianceModel::Kind kind);

/// R = A A^T from a pivoted LDL^T factorization. Pivots in [-1e-12 max|R_ii|, 0)
/// are clamped to zero and counted; anything more negative is rejected.
struct CovarianceFactor {
  Eigen::MatrixXd factor;
  std::size_t clamped_pivots = 0;
  double min_pivot = 0.0;
};
CovarianceFactor factorize(const Eigen::MatrixXd& covariance);

SamplePaths simulate_gaussian_field(const MetricMeasureSpace& space, const CovarianceModel& cov,
                                    std::size_t n_paths, std::uint64_t seed, const Execution& exec = {});

/// Same, from an already factored covariance and a stream id.
SamplePaths simulate_gaussian(const CovarianceFactor& factor, std::size_t n_paths, std::uint64_t seed,
                              std::uint64_t stream, const Execution& exec = {});

struct ModulusSummary {
  double delta = 0.0;
  double mean = 0.0;
  double standard_error = 0.0;
  double median = 0.0;
  double q90 = 0.0;
  double q99 = 0.0;
  double max = 0.0;
  bool no_pairs = false;
  std::vector<double> per_path;
};

/// Per path, the largest |xi(x_i) - xi(x_j)| over pairs with d(i, j) <= delta.
ModulusSummary empirical_modulus(const SamplePaths& paths, const DistanceMatrix& d, double delta);

struct TailCurve {
  bool two_sided = false;
  std::vector<double> u;
  std::vector<double> probability;
  std::vector<double> standard_error;
};

/// Fraction of paths whose max (max |.| when two-sided) exceeds u. The standard
/// error is sqrt(q (1 - q) / n), or 1/n when q is 0 or 1.
TailCurve empirical_tail(const SamplePaths& paths, std::span<const double> u_grid, bool two_sided);

std::string tail_curve_csv(const TailCurve& curve, std::span<const double> bounds = {});

struct Normalized {
  SamplePaths paths;
  double divisor = 1.0;
};

/// Divides the field by max_x of its pointwise Luxemburg norm.
Normalized normalize_unit_orlicz(const SamplePaths& paths, const YoungFunction& phi);

enum class Verdict { holds, holds_within_slack, violated };
std::string verdict_name(Verdict v);

/// holds when bound >= empirical, holds_within_slack when bound >= empirical - 3 se.
Verdict classify_upper_bound(double bound, double empirical, double se);
/// holds when |empirical - target| <= 3 se.
Verdict classify_equality(double target, double empirical, double se);

struct Check {
  std::string name;
  double bound = 0.0;
  double empirical = 0.0;
  double se = 0.0;
  Verdict verdict = Verdict::holds;
};

struct VerificationReport {
  std::string name;
  std::vector<Check> checks;
  std::map<std::string, double> metrics;
  std::vector<std::string> warnings;

  bool passed() const;
};

void to_json(nlohmann::json& j, const VerificationReport& r);

/// Per path, Z = V(d_Phi) over i != j; every pair must satisfy
/// |xi(x1) - xi(x2)| <= (1 + 1%) w(x1, x2; Z). Also reports the mean of Z
/// with the diagonal conditioned out, which has unit expectation.
VerificationReport verify_arnold_imkeller(const SamplePaths& paths, const MetricMeasureSpace& space,
                                          const YoungFunction& phi, const Execution& exec = {});

/// Same check with a precomputed natural distance. The pathwise inequality is
/// checked on the first max_pathwise paths; the mean of Z uses all of them.
VerificationReport verify_arnold_imkeller(const SamplePaths& paths, const MetricMeasureSpace& space,
                                          const YoungFunction& phi, const DistanceMatrix& d_phi,
                                          const Execution& exec = {},
                                          std::size_t max_pathwise = static_cast<std::size_t>(-1));

/// Pairs a list of bounds (one per u) with an empirical tail curve.
VerificationReport verify_tail_bounds(const TailCurve& empirical, std::span<const BoundResult> bounds,
                                      const std::string& name);

/// Two-sample Kolmogorov-Smirnov statistic; ties are stepped over together.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Base fields for the CLT experiment, all centred with unit variance.
struct BaseField {
  enum class Kind {
    gaussian,
    /// +-1 values, a Markov chain along the point index with correlation rho
    /// between neighbours, so R(i, j) = rho^{|i - j|}.
    rademacher_markov,
    /// sign of a Gaussian field; R = (2 / pi) asin(R_gauss).
    sign_gaussian,
  };
  Kind kind = Kind::rademacher_markov;
  double rho = 0.9;
  Eigen::MatrixXd gaussian_covariance;
  std::size_t points = 0;

  Eigen::MatrixXd covariance() const;
};

std::string base_field_name(BaseField::Kind kind);

struct CltRow {
  std::size_t n = 0;
  double ks = 0.0;
};

struct CltResult {
  std::vector<CltRow> rows;
  VerificationReport report;
};

/// sup_x S_n(x) with S_n = n^{-1/2} sum_{i <= n} eta_i for each n, compared by
/// two-sample KS with the sup of the Gaussian field of matching covariance.
CltResult clt_experiment(const BaseField& base, std::span<const std::size_t> n_list, std::size_t n_paths,
                         std::uint64_t seed, double threshold = 0.02, const Execution& exec = {});

/// Samples of sup_x S_n(x), one per path.
std::vector<double> clt_sup_samples(const BaseField& base, std::size_t n, std::size_t n_paths,
                                    std::uint64_t seed, std::uint64_t stream, const Execution& exec = {});

/// Everything the entropy tail bound needs, computed from one ensemble.
struct EntropyTailSetup {
  double divisor = 1.0;
  double diameter = 0.0;
  Delta2Estimate k;
  double c2 = 0.0;
  Eigen::MatrixXd w_matrix;
  std::vector<double> entropy_thresholds;
  std::vector<std::size_t> entropy_counts;
  bool greedy = false;
};

struct EntropyTailRun {
  EntropyTailSetup setup;
  TailCurve one_sided;
  TailCurve two_sided;
  std::vector<BoundResult> one_sided_bounds;
  std::vector<BoundResult> two_sided_bounds;
  VerificationReport report;
};

/// Normalizes the field to unit Orlicz norm, builds d_Phi, w with V = 1 and
/// its entropy curve, then checks both tail bounds at every u.
EntropyTailRun entropy_tail_pipeline(const SamplePaths& paths, const MetricMeasureSpace& space,
                                     const YoungFunction& phi, std::span<const double> u_grid,
                                     const Execution& exec = {});

}  // namespace mmchain
