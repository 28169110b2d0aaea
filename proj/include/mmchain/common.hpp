#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace mmchain {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Every library failure derives from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or empty input (empty samples, bad weights, mismatched shapes).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Evaluation outside the domain where a tabulated object is defined.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// A mathematical precondition of a formula does not hold.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Structural invariant violated (convexity, metric axioms, PSD).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Empty intersection with the support of a psi function.
class SupportError : public Error {
 public:
  using Error::Error;
};

/// Thread budget for the operations that parallelize over paths or pairs.
/// Results never depend on the thread count.
struct Execution {
  unsigned threads = 1;
};

/// Runs body(i) for i in [0, n) over contiguous chunks, one per thread.
/// Each index is visited exactly once; the first exception is rethrown.
template <class Body>
void parallel_for(std::size_t n, const Execution& exec, Body&& body) {
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(exec.threads, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// n points geometrically spaced from lo to hi inclusive (lo, hi > 0).
std::vector<double> geomspace(double lo, double hi, std::size_t n);

/// n points evenly spaced from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, std::size_t n);

/// Neumaier-compensated sum, fixed left-to-right order.
double compensated_sum(std::span<const double> values);

/// Throws ArgumentError unless weights are nonnegative and sum to 1 within tol.
void require_probability_vector(std::span<const double> weights,
                                double tol = 1e-12);

/// Mean and standard error of the mean (sample standard deviation / sqrt(n)).
struct MeanEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};
MeanEstimate mean_with_error(std::span<const double> values);

}  // namespace mmchain
