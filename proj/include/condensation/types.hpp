#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <vector>

#include "condensation/errors.hpp"

namespace condensation {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A finite point cloud: N rows of d coordinates. Each row carries a stable
/// id and a multiplicity (how many original points the row represents; rows
/// of a freshly loaded cloud have multiplicity 1).
struct PointCloud {
  Matrix coords;
  std::vector<int> ids;
  std::vector<int> multiplicity;

  Eigen::Index size() const { return coords.rows(); }
  Eigen::Index dim() const { return coords.cols(); }

  /// Sum of multiplicities: the number of original points represented.
  long total_weight() const {
    return std::accumulate(multiplicity.begin(), multiplicity.end(), 0L);
  }
};

inline PointCloud make_cloud(Matrix coords) {
  PointCloud cloud;
  const int n = static_cast<int>(coords.rows());
  cloud.coords = std::move(coords);
  cloud.ids.resize(n);
  cloud.multiplicity.assign(n, 1);
  for (int i = 0; i < n; ++i) cloud.ids[i] = i;
  return cloud;
}

/// 1-D convenience overload used throughout the tests.
inline PointCloud make_cloud_1d(const std::vector<double>& xs) {
  Matrix m(static_cast<Eigen::Index>(xs.size()), 1);
  for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, 0) = xs[static_cast<size_t>(i)];
  return make_cloud(std::move(m));
}

inline void validate(const PointCloud& cloud) {
  if (cloud.size() < 1 || cloud.dim() < 1)
    throw error(errc::shape_mismatch, "point cloud must have N >= 1 and d >= 1");
  if (!cloud.coords.allFinite())
    throw error(errc::bad_params, "point cloud has non-finite coordinates");
  if (cloud.ids.size() != static_cast<size_t>(cloud.size()) ||
      cloud.multiplicity.size() != static_cast<size_t>(cloud.size()))
    throw error(errc::shape_mismatch, "ids/multiplicity length does not match row count");
  std::vector<int> sorted_ids = cloud.ids;
  std::sort(sorted_ids.begin(), sorted_ids.end());
  if (std::adjacent_find(sorted_ids.begin(), sorted_ids.end()) != sorted_ids.end())
    throw error(errc::bad_params, "point ids must be unique");
  for (int m : cloud.multiplicity)
    if (m < 1) throw error(errc::bad_params, "multiplicities must be positive");
}

}  // namespace condensation
