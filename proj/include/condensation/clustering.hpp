#pragma once

#include <limits>
#include <vector>

#include "condensation/engine.hpp"
#include "condensation/topology.hpp"

namespace condensation {

enum class Linkage { UPGMC, WPGMC };

// Relative gap below which two candidate merges count as tied.
inline constexpr double kTieTol = 1e-12;

/// Centroid (UPGMC) or median (WPGMC) agglomerative clustering. At every
/// level the unique pair of clusters with minimal squared centroid distance
/// merges; a non-unique argmin aborts with TieDetected since the merge
/// sequence would be arbitrary. Heights are merge indices, with the achieved
/// squared distance kept as an auxiliary value.
inline Dendrogram agglomerate(const PointCloud& X0, Linkage linkage) {
  validate(X0);
  const int n = static_cast<int>(X0.size());
  if (n < 2) throw error(errc::bad_params, "agglomeration needs at least two points");

  struct Cluster {
    Eigen::RowVectorXd centroid;
    Eigen::RowVectorXd coordinate_sum;  // of original member coordinates (UPGMC)
    int ref = 0;
    int size = 0;
  };

  std::vector<int> order(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return X0.ids[static_cast<size_t>(a)] < X0.ids[static_cast<size_t>(b)];
  });

  Dendrogram out;
  out.leaf_count = n;
  out.leaf_ids.resize(static_cast<size_t>(n));
  std::vector<Cluster> active;
  for (int k = 0; k < n; ++k) {
    const int row = order[static_cast<size_t>(k)];
    out.leaf_ids[static_cast<size_t>(k)] = X0.ids[static_cast<size_t>(row)];
    Cluster c;
    c.centroid = X0.coords.row(row);
    c.coordinate_sum = X0.coords.row(row);
    c.ref = k;
    c.size = 1;
    active.push_back(std::move(c));
  }

  for (int level = 0; level < n - 1; ++level) {
    double best = std::numeric_limits<double>::infinity();
    double second = std::numeric_limits<double>::infinity();
    size_t best_a = 0, best_b = 0;
    for (size_t a = 0; a < active.size(); ++a)
      for (size_t b = a + 1; b < active.size(); ++b) {
        const double d = (active[a].centroid - active[b].centroid).squaredNorm();
        if (d < best) {
          second = best;
          best = d;
          best_a = a;
          best_b = b;
        } else if (d < second) {
          second = d;
        }
      }
    if (second - best <= kTieTol * std::max(1.0, best))
      throw error(errc::tie_detected, "no unique closest cluster pair at level " +
                                          std::to_string(level));

    Cluster merged;
    merged.ref = n + level;
    merged.size = active[best_a].size + active[best_b].size;
    merged.coordinate_sum = active[best_a].coordinate_sum + active[best_b].coordinate_sum;
    merged.centroid = linkage == Linkage::UPGMC
                          ? merged.coordinate_sum / static_cast<double>(merged.size)
                          : ((active[best_a].centroid + active[best_b].centroid) / 2.0).eval();

    DendrogramMerge record;
    record.height = static_cast<double>(level);
    record.left = active[best_a].ref;
    record.right = active[best_b].ref;
    record.size = merged.size;
    record.distance = best;
    out.merges.push_back(record);

    active.erase(active.begin() + static_cast<long>(best_b));
    active.erase(active.begin() + static_cast<long>(best_a));
    active.push_back(std::move(merged));
  }
  return out;
}

enum class EquivalenceMode { UPGMC_equiv, WPGMC_equiv };

namespace detail {

// General position: at every recorded step exactly one pair of distinct
// positions may achieve the minimal distance, otherwise the box-kernel merge
// order is arbitrary. Coincident duplicate rows collapse to one position
// before the check so they do not fake a tie.
inline void verify_general_position(const CondensationTrace& trace) {
  for (int t = 0; t < trace.steps(); ++t) {
    const PointCloud& X = trace.snapshots[static_cast<size_t>(t)];
    std::vector<Eigen::RowVectorXd> positions;
    for (Eigen::Index i = 0; i < X.size(); ++i) {
      bool seen = false;
      for (const auto& p : positions)
        if ((X.coords.row(i) - p).norm() <= 1e-12) {
          seen = true;
          break;
        }
      if (!seen) positions.push_back(X.coords.row(i));
    }
    double best = std::numeric_limits<double>::infinity();
    double second = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < positions.size(); ++i)
      for (size_t j = i + 1; j < positions.size(); ++j) {
        const double d = (positions[i] - positions[j]).norm();
        if (d < best) {
          second = best;
          best = d;
        } else if (d < second) {
          second = d;
        }
      }
    if (std::isfinite(second) && second - best <= kTieTol * std::max(1.0, best))
      throw error(errc::tie_detected,
                  "minimal pairwise distance not unique at step " + std::to_string(t));
  }
}

}  // namespace detail

/// Runs box-kernel condensation with the min-distance bandwidth schedule and
/// extracts the merge tree. The zero-radius mode keeps coincident duplicates
/// so merged groups keep pulling with their full weight (centroid linkage);
/// the positive-radius mode collapses each merged pair to a fresh unit-mass
/// point at the midpoint (median linkage), using zeta = epsilon_t / 2.
inline Dendrogram condensation_as_clustering(const PointCloud& X0, EquivalenceMode mode) {
  validate(X0);
  if (X0.size() < 2) throw error(errc::bad_params, "need at least two points");

  CondensationConfig config;
  config.kernel = box_kernel(1.0);
  config.schedule = min_distance_schedule();
  config.tau = 1;
  config.max_steps = 4 * static_cast<int>(X0.size()) + 8;
  if (mode == EquivalenceMode::UPGMC_equiv) {
    config.zeta = 0.0;
    config.multiplicity_weighted = true;
  } else {
    config.zeta_tracks_epsilon = true;
    config.zeta_fraction = 0.5;
    config.multiplicity_weighted = false;
  }

  const CondensationTrace trace = condense(X0, config);
  detail::verify_general_position(trace);
  const CondensationHomology homology = condensation_homology(trace, 0.0);
  return dendrogram_from_pairing(homology.pairing, trace.initial().ids);
}

}  // namespace condensation
