#pragma once

#include <cstdint>
#include <span>
#include <string>

#include <Eigen/Dense>

namespace mmchain {

/// Simulated field realizations: one row per path, one column per point.
/// Column-major storage keeps every point's ensemble contiguous.
struct SamplePaths {
  Eigen::MatrixXd values;
  std::string space_id;
  std::uint64_t seed = 0;

  std::size_t paths() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t points() const { return static_cast<std::size_t>(values.cols()); }

  std::span<const double> column(std::size_t point) const {
    return {values.col(static_cast<Eigen::Index>(point)).data(), paths()};
  }
};

}  // namespace mmchain
