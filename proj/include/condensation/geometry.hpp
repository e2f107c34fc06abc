#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "condensation/types.hpp"

namespace condensation {

// Default tolerances: certificates are algebraic (sums of ~N doubles),
// geometric predicates accumulate more rounding.
inline constexpr double kCertificateTol = 1e-12;
inline constexpr double kGeometricTol = 1e-9;

/// Full symmetric matrix of Euclidean distances between rows of X.
inline Matrix pairwise_distances(const PointCloud& X) {
  const Eigen::Index n = X.size();
  Matrix dist = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = (X.coords.row(i) - X.coords.row(j)).norm();
      dist(i, j) = d;
      dist(j, i) = d;
    }
  }
  return dist;
}

/// Largest pairwise distance; 0 for a single point.
inline double diameter(const PointCloud& X) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < X.size(); ++i)
    for (Eigen::Index j = i + 1; j < X.size(); ++j)
      best = std::max(best, (X.coords.row(i) - X.coords.row(j)).norm());
  return best;
}

/// Hausdorff distance between two clouds embedded in the same space:
/// the larger of the two directed max-min distances.
inline double hausdorff_distance(const PointCloud& X, const PointCloud& Y) {
  if (X.dim() != Y.dim())
    throw error(errc::dimension_mismatch, "hausdorff_distance requires equal ambient dimension");
  auto directed = [](const PointCloud& A, const PointCloud& B) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < A.size(); ++i) {
      double nearest = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < B.size(); ++j)
        nearest = std::min(nearest, (A.coords.row(i) - B.coords.row(j)).norm());
      worst = std::max(worst, nearest);
    }
    return worst;
  };
  return std::max(directed(X, Y), directed(Y, X));
}

/// Smallest strictly positive pairwise distance. Pairs closer than
/// coincidence_tol count as duplicates and are skipped, so clouds carrying
/// merged duplicates still yield a usable bandwidth.
inline double min_positive_distance(const PointCloud& X, double coincidence_tol = 0.0) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < X.size(); ++i)
    for (Eigen::Index j = i + 1; j < X.size(); ++j) {
      const double d = (X.coords.row(i) - X.coords.row(j)).norm();
      if (d > coincidence_tol) best = std::min(best, d);
    }
  if (!std::isfinite(best))
    throw error(errc::all_coincident, "all points coincide; no positive pairwise distance");
  return best;
}

/// True iff P is row-stochastic within tol: entries >= -tol and each row sum
/// within tol of 1. Certifies that P maps a cloud into its own convex hull,
/// in any ambient dimension.
inline bool convexity_certificate(const Matrix& P, double tol = kCertificateTol) {
  if (P.rows() != P.cols()) throw error(errc::shape_mismatch, "certificate needs a square matrix");
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    double row_sum = 0.0;
    for (Eigen::Index j = 0; j < P.cols(); ++j) {
      if (P(i, j) < -tol) return false;
      row_sum += P(i, j);
    }
    if (std::abs(row_sum - 1.0) > tol) return false;
  }
  return true;
}

namespace detail {

struct Point2 {
  double x, y;
};

inline double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Monotone chain. Returns hull vertices in counter-clockwise order with
// lexicographic tie-breaking; collinear inputs come back as the two extreme
// points (or one point if all coincide).
inline std::vector<Point2> convex_hull_2d(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Point2& a, const Point2& b) { return a.x == b.x && a.y == b.y; }),
            pts.end());
  const size_t n = pts.size();
  if (n <= 2) return pts;
  std::vector<Point2> hull(2 * n);
  size_t k = 0;
  for (size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (size_t i = n - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

inline double point_segment_distance(const Point2& p, const Point2& a, const Point2& b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  if (len2 == 0.0) return std::hypot(p.x - a.x, p.y - a.y);
  double t = ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * vx), p.y - (a.y + t * vy));
}

inline bool point_in_hull(const Point2& p, const std::vector<Point2>& hull, double tol) {
  if (hull.empty()) return false;
  if (hull.size() == 1) return std::hypot(p.x - hull[0].x, p.y - hull[0].y) <= tol;
  if (hull.size() == 2) return point_segment_distance(p, hull[0], hull[1]) <= tol;
  for (size_t i = 0; i < hull.size(); ++i) {
    const Point2& a = hull[i];
    const Point2& b = hull[(i + 1) % hull.size()];
    // CCW hull: p must lie left of (or on) every edge.
    const double c = cross(a, b, p);
    const double scale = std::max(1.0, std::hypot(b.x - a.x, b.y - a.y));
    if (c < -tol * scale) return false;
  }
  return true;
}

inline std::vector<Point2> to_point2(const PointCloud& X) {
  std::vector<Point2> pts(static_cast<size_t>(X.size()));
  for (Eigen::Index i = 0; i < X.size(); ++i)
    pts[static_cast<size_t>(i)] = {X.coords(i, 0), X.coords(i, 1)};
  return pts;
}

}  // namespace detail

/// 2-D diagnostic for convex-hull nesting: true iff every hull vertex of
/// `inner` lies inside or on the hull of `outer`. Checking hull vertices
/// suffices because the extremal points of a hull belong to the cloud.
inline bool hull_containment_2d(const PointCloud& inner, const PointCloud& outer,
                                double tol = kGeometricTol) {
  if (inner.dim() != 2 || outer.dim() != 2)
    throw error(errc::dimension_unsupported, "hull_containment_2d needs d = 2");
  const auto inner_hull = detail::convex_hull_2d(detail::to_point2(inner));
  const auto outer_hull = detail::convex_hull_2d(detail::to_point2(outer));
  for (const auto& v : inner_hull)
    if (!detail::point_in_hull(v, outer_hull, tol)) return false;
  return true;
}

}  // namespace condensation
