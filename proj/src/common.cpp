#include "mmchain/common.hpp"

#include <cmath>
#include <sstream>

namespace mmchain {

std::vector<double> geomspace(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi >= lo) || n == 0) {
    throw ArgumentError("geomspace needs 0 < lo <= hi and n >= 1");
  }
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  const double step = std::log(hi / lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = lo * std::exp(step * static_cast<double>(i));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n == 0 || !(hi >= lo)) throw ArgumentError("linspace needs lo <= hi, n >= 1");
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + step * static_cast<double>(i);
  out.back() = hi;
  return out;
}

double compensated_sum(std::span<const double> values) {
  double sum = 0.0;
  double carry = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  return sum + carry;
}

void require_probability_vector(std::span<const double> weights, double tol) {
  if (weights.empty()) throw ArgumentError("weights must be non-empty");
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ArgumentError("weights must be finite and nonnegative");
    }
  }
  const double total = compensated_sum(weights);
  if (std::abs(total - 1.0) > tol) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "weights must sum to 1 (got " << total << ")";
    throw ArgumentError(msg.str());
  }
}

MeanEstimate mean_with_error(std::span<const double> values) {
  MeanEstimate est;
  const std::size_t n = values.size();
  if (n == 0) return est;
  est.mean = compensated_sum(values) / static_cast<double>(n);
  if (n < 2) return est;
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double dev = values[i] - est.mean;
    sq[i] = dev * dev;
  }
  const double var = compensated_sum(sq) / static_cast<double>(n - 1);
  est.standard_error = std::sqrt(var / static_cast<double>(n));
  return est;
}

}  // namespace mmchain
