#pragma once

#include <string>
#include <utility>
#include <vector>

#include "condensation/geometry.hpp"
#include "condensation/kernels.hpp"
#include "condensation/schedules.hpp"

namespace condensation {

struct CondensationConfig {
  KernelSpec kernel;
  ScheduleSpec schedule;
  int tau = 1;
  // Optional per-step diffusion times; step t uses tau_schedule[t], falling
  // back to the last entry (or tau when empty).
  std::vector<int> tau_schedule;
  double zeta = 0.0;  // merge radius; 0 keeps coincident rows as duplicates
  int max_steps = 1000;
  double convergence_tol = 1e-8;   // diameter below this declares a single point
  double fixed_point_tol = 1e-12;  // max displacement below this declares P X = X
  // When false the operator treats every row as unit mass regardless of its
  // multiplicity. Median-linkage-equivalent runs need this: a merged
  // representative acts as a single fresh point there.
  bool multiplicity_weighted = true;
  // Merge radius tied to the running bandwidth: zeta_t = zeta_fraction *
  // epsilon_t. Used by the median-linkage equivalence, which needs
  // 0 < zeta < epsilon_t at every step.
  bool zeta_tracks_epsilon = false;
  double zeta_fraction = 0.5;

  double merge_radius(double epsilon) const {
    return zeta_tracks_epsilon ? zeta_fraction * epsilon : zeta;
  }

  int tau_at(int step) const {
    if (tau_schedule.empty()) return tau;
    return tau_schedule[static_cast<size_t>(
        std::min(step, static_cast<int>(tau_schedule.size()) - 1))];
  }
};

inline void validate(const CondensationConfig& config) {
  validate(config.kernel);
  validate(config.schedule);
  if (config.tau < 1) throw error(errc::bad_params, "tau must be >= 1");
  for (int tau : config.tau_schedule)
    if (tau < 1) throw error(errc::bad_params, "every scheduled tau must be >= 1");
  if (config.zeta < 0.0) throw error(errc::bad_params, "zeta must be nonnegative");
  if (config.zeta_tracks_epsilon && !(config.zeta_fraction > 0.0 && config.zeta_fraction < 1.0))
    throw error(errc::bad_params, "zeta fraction must lie in (0, 1)");
  if (config.max_steps < 1) throw error(errc::bad_params, "max_steps must be >= 1");
  if (!(config.convergence_tol > 0.0) || !(config.fixed_point_tol > 0.0))
    throw error(errc::bad_params, "tolerances must be positive");
}

enum class Termination { Converged, FixedPoint, MaxSteps };

inline const char* termination_name(Termination t) {
  switch (t) {
    case Termination::Converged: return "converged";
    case Termination::FixedPoint: return "fixed-point";
    case Termination::MaxSteps: return "max-steps";
  }
  return "?";
}

/// One row absorbed another: recorded at the snapshot index where the merged
/// cloud first appears. The surviving id is always the smaller one.
struct MergeEvent {
  int step = 0;
  int survivor = 0;
  int absorbed = 0;
};

struct CondensationTrace {
  std::vector<PointCloud> snapshots;  // X_0 ... X_T
  std::vector<double> epsilons;       // bandwidth used at step t, t = 0..T-1
  std::vector<double> zetas;          // merge radius applied at step t, t = 0..T-1
  std::vector<Vector> degrees;        // operator degrees at step t, t = 0..T-1
  std::vector<double> diameters;      // diam(X_t), t = 0..T
  std::vector<double> max_movements;  // largest displacement of step t, t = 0..T-1
  std::vector<MergeEvent> merges;
  Termination termination = Termination::MaxSteps;
  double zeta = 0.0;  // constant merge radius (0 when it tracked the bandwidth)

  int steps() const { return static_cast<int>(snapshots.size()) - 1; }
  const PointCloud& initial() const { return snapshots.front(); }
  const PointCloud& final_cloud() const { return snapshots.back(); }
};

namespace detail {

inline std::vector<int> operator_weights(const PointCloud& X, const CondensationConfig& config) {
  if (config.multiplicity_weighted) return X.multiplicity;
  return std::vector<int>(static_cast<size_t>(X.size()), 1);
}

inline double max_row_distance(const Matrix& a, const Matrix& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    worst = std::max(worst, (a.row(i) - b.row(i)).norm());
  return worst;
}

}  // namespace detail

/// Kernel, operator, tau-fold diffusion. No merging; that is a separate pass.
inline std::pair<PointCloud, DiffusionOperator> condense_step(const PointCloud& X, double epsilon,
                                                              const CondensationConfig& config,
                                                              int step = 0) {
  const KernelSpec kernel = config.kernel.with_epsilon(epsilon);
  DiffusionOperator op = diffusion_operator(kernel_matrix(X, kernel),
                                            detail::operator_weights(X, config));
  PointCloud next = apply_operator(op, X, config.tau_at(step));
  return {std::move(next), std::move(op)};
}

/// Collapse every single-linkage group of radius zeta to one representative
/// row: position the unweighted mean of the group's current rows, id the
/// smallest member id, multiplicity the sum. zeta = 0 leaves the cloud
/// untouched so coincident duplicates persist.
inline std::pair<PointCloud, std::vector<MergeEvent>> detect_merges(const PointCloud& X,
                                                                    double zeta, int step = 0) {
  if (zeta < 0.0) throw error(errc::bad_params, "zeta must be nonnegative");
  std::vector<MergeEvent> events;
  if (zeta == 0.0 || X.size() < 2) return {X, events};

  const Eigen::Index n = X.size();
  std::vector<int> parent(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) parent[static_cast<size_t>(i)] = static_cast<int>(i);
  auto find = [&](int v) {
    while (parent[static_cast<size_t>(v)] != v) {
      parent[static_cast<size_t>(v)] = parent[static_cast<size_t>(parent[static_cast<size_t>(v)])];
      v = parent[static_cast<size_t>(v)];
    }
    return v;
  };
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if ((X.coords.row(i) - X.coords.row(j)).norm() < zeta) {
        const int a = find(static_cast<int>(i)), b = find(static_cast<int>(j));
        if (a != b) parent[static_cast<size_t>(std::max(a, b))] = std::min(a, b);
      }

  std::vector<std::vector<int>> groups(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    groups[static_cast<size_t>(find(static_cast<int>(i)))].push_back(static_cast<int>(i));

  Eigen::Index kept = 0;
  for (const auto& g : groups)
    if (!g.empty()) ++kept;
  if (kept == n) return {X, events};

  PointCloud out;
  out.coords = Matrix(kept, X.dim());
  out.ids.reserve(static_cast<size_t>(kept));
  out.multiplicity.reserve(static_cast<size_t>(kept));
  Eigen::Index row = 0;
  for (const auto& g : groups) {
    if (g.empty()) continue;
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(X.dim());
    int id = X.ids[static_cast<size_t>(g[0])];
    int mult = 0;
    for (int member : g) {
      mean += X.coords.row(member);
      id = std::min(id, X.ids[static_cast<size_t>(member)]);
      mult += X.multiplicity[static_cast<size_t>(member)];
    }
    mean /= static_cast<double>(g.size());
    out.coords.row(row) = mean;
    out.ids.push_back(id);
    out.multiplicity.push_back(mult);
    if (g.size() > 1) {
      for (int member : g) {
        const int member_id = X.ids[static_cast<size_t>(member)];
        if (member_id != id) events.push_back({step, id, member_id});
      }
    }
    ++row;
  }
  return {std::move(out), std::move(events)};
}

/// Run the condensation loop until the cloud collapses to a point, reaches a
/// stable state, or exhausts max_steps. Every snapshot, bandwidth, degree
/// vector and merge event is recorded so the run can be replayed exactly.
inline CondensationTrace condense(const PointCloud& X0, const CondensationConfig& config) {
  validate(X0);
  validate(config);

  CondensationTrace trace;
  trace.zeta = config.zeta_tracks_epsilon ? 0.0 : config.zeta;
  trace.snapshots.push_back(X0);
  trace.diameters.push_back(diameter(X0));
  trace.termination = Termination::MaxSteps;

  double epsilon = 0.0;
  double prev_d_max = 0.0;

  for (int t = 0; t < config.max_steps; ++t) {
    const PointCloud& X = trace.snapshots.back();
    if (trace.diameters.back() < config.convergence_tol) {
      trace.termination = Termination::Converged;
      break;
    }
    try {
      if (t == 0) {
        epsilon = initial_epsilon(config.schedule, config.kernel, X0);
      } else {
        ScheduleState state;
        state.epsilon = epsilon;
        state.diam = trace.diameters.back();
        state.max_movement = trace.max_movements.back();
        state.d_max = prev_d_max;
        state.n_points = static_cast<double>(X.total_weight());
        state.cloud = &X;
        state.kernel = &config.kernel;
        epsilon = next_epsilon(config.schedule, state);
      }

      auto [diffused, op] = condense_step(X, epsilon, config, t);
      if (detail::max_row_distance(op.transition * X.coords, X.coords) < config.fixed_point_tol) {
        trace.termination = Termination::FixedPoint;
        break;
      }
      const double movement = detail::max_row_distance(diffused.coords, X.coords);
      const double zeta_t = config.merge_radius(epsilon);
      auto [merged, events] = detect_merges(diffused, zeta_t, t + 1);

      trace.epsilons.push_back(epsilon);
      trace.zetas.push_back(zeta_t);
      trace.degrees.push_back(op.degrees);
      trace.max_movements.push_back(movement);
      for (auto& e : events) trace.merges.push_back(e);
      prev_d_max = op.degrees.maxCoeff();
      trace.diameters.push_back(diameter(merged));
      trace.snapshots.push_back(std::move(merged));
    } catch (const error& e) {
      throw error(e.code(), "step " + std::to_string(t) + ": " + e.what());
    }
  }
  if (trace.diameters.back() < config.convergence_tol &&
      trace.termination == Termination::MaxSteps)
    trace.termination = Termination::Converged;
  return trace;
}

/// True iff re-executing each recorded step from snapshots[t] reproduces
/// snapshots[t+1] to within 1e-12 (coordinates, ids and multiplicities).
inline bool replay_check(const CondensationTrace& trace, const CondensationConfig& config,
                         double tol = 1e-12) {
  for (int t = 0; t < trace.steps(); ++t) {
    auto [diffused, op] = condense_step(trace.snapshots[static_cast<size_t>(t)],
                                        trace.epsilons[static_cast<size_t>(t)], config, t);
    auto [merged, events] =
        detect_merges(diffused, config.merge_radius(trace.epsilons[static_cast<size_t>(t)]), t + 1);
    const PointCloud& want = trace.snapshots[static_cast<size_t>(t) + 1];
    if (merged.size() != want.size() || merged.ids != want.ids ||
        merged.multiplicity != want.multiplicity)
      return false;
    if ((merged.coords - want.coords).cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

}  // namespace condensation
