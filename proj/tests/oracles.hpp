// Independent reference implementations used only by the tests. Each one is
// deliberately naive: exhaustive enumeration or generic quadrature.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "mmchain/mspace.hpp"
#include "mmchain/orlicz.hpp"

namespace oracle {

/// Smallest cover by closed eps-balls, by trying every subset in order of size.
inline std::size_t brute_force_cover(const Eigen::MatrixXd& d, double eps) {
  const auto n = static_cast<std::size_t>(d.rows());
  if (n == 0) return 0;
  std::size_t best = n;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    const auto size = static_cast<std::size_t>(__builtin_popcount(mask));
    if (size >= best) continue;
    bool covered = true;
    for (std::size_t y = 0; y < n && covered; ++y) {
      bool hit = false;
      for (std::size_t c = 0; c < n && !hit; ++c) {
        hit = ((mask >> c) & 1u) && d(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(y)) <= eps;
      }
      covered = hit;
    }
    if (covered) best = size;
  }
  return best;
}

/// m(B(r, x)) by direct summation.
inline double ball_mass(const Eigen::MatrixXd& d, const std::vector<double>& m, std::size_t x, double r) {
  double s = 0.0;
  for (std::size_t y = 0; y < m.size(); ++y) {
    if (d(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) <= r) s += m[y];
  }
  return s;
}

/// 6 int_0^{d12} [Phi^{-1}(4V/m(B(r,x1))^2) + Phi^{-1}(4V/m(B(r,x2))^2)] dr with
/// 61-point Gauss-Kronrod on every piece between consecutive breakpoints.
inline double w_quadrature(const Eigen::MatrixXd& d, const std::vector<double>& m, const mmchain::YoungFunction& phi,
                           double v, std::size_t x1, std::size_t x2) {
  const double top = d(static_cast<Eigen::Index>(x1), static_cast<Eigen::Index>(x2));
  std::vector<double> cuts{0.0, top};
  for (std::size_t y = 0; y < m.size(); ++y) {
    for (std::size_t x : {x1, x2}) {
      const double r = d(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
      if (r > 0.0 && r < top) cuts.push_back(r);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  auto integrand = [&](double r) {
    double s = 0.0;
    for (std::size_t x : {x1, x2}) {
      const double mass = ball_mass(d, m, x, r);
      s += phi.inverse(4.0 * v / (mass * mass));
    }
    return s;
  };
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, cuts[k], cuts[k + 1], 5, 1e-14);
  }
  return 6.0 * total;
}

/// Exact law of max(S_n(1), S_n(2)) / sqrt(n) for a +-1 pair whose
/// coordinates agree with probability (1 + rho) / 2, by enumerating the
/// multinomial counts of the four outcomes.
inline std::map<double, double> two_point_rademacher_sup_law(std::size_t n, double rho) {
  const double same = 0.5 * (1.0 + rho);
  // Outcomes (+,+), (-,-), (+,-), (-,+).
  const double p[4] = {same / 2, same / 2, (1 - same) / 2, (1 - same) / 2};
  const int a[4] = {1, -1, 1, -1};
  const int b[4] = {1, -1, -1, 1};
  std::map<double, double> law;
  auto lfact = [](std::size_t k) { return std::lgamma(static_cast<double>(k) + 1.0); };
  for (std::size_t k0 = 0; k0 <= n; ++k0) {
    for (std::size_t k1 = 0; k0 + k1 <= n; ++k1) {
      for (std::size_t k2 = 0; k0 + k1 + k2 <= n; ++k2) {
        const std::size_t k3 = n - k0 - k1 - k2;
        const std::size_t k[4] = {k0, k1, k2, k3};
        double logp = lfact(n);
        int s1 = 0;
        int s2 = 0;
        for (int i = 0; i < 4; ++i) {
          if (k[i] > 0 && p[i] == 0.0) logp = -INFINITY;
          if (k[i] > 0 && p[i] > 0.0) logp += static_cast<double>(k[i]) * std::log(p[i]);
          logp -= lfact(k[i]);
          s1 += a[i] * static_cast<int>(k[i]);
          s2 += b[i] * static_cast<int>(k[i]);
        }
        law[static_cast<double>(std::max(s1, s2)) / std::sqrt(static_cast<double>(n))] += std::exp(logp);
      }
    }
  }
  return law;
}

/// Random finite metric: shortest paths over random positive edge weights.
inline Eigen::MatrixXd random_metric(std::size_t n, std::mt19937_64& rng, bool integer_weights = false) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::uniform_int_distribution<int> k(1, 4);
  const auto N = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd d(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    d(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < N; ++j) d(i, j) = d(j, i) = integer_weights ? k(rng) : u(rng);
  }
  for (Eigen::Index m = 0; m < N; ++m) {
    for (Eigen::Index i = 0; i < N; ++i) {
      for (Eigen::Index j = 0; j < N; ++j) d(i, j) = std::min(d(i, j), d(i, m) + d(m, j));
    }
  }
  return d;
}

inline std::vector<double> random_weights(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.2, 1.0);
  std::vector<double> w(n);
  double s = 0.0;
  for (auto& x : w) s += (x = u(rng));
  for (auto& x : w) x /= s;
  return w;
}

}  // namespace oracle
