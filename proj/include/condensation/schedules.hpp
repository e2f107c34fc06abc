#pragma once

#include <cmath>
#include <optional>

#include "condensation/geometry.hpp"
#include "condensation/kernels.hpp"

namespace condensation {

/// Smallest bandwidth for which the alpha-decay kernel satisfies
/// min K >= delta over a cloud of the given diameter:
/// exp(-(diam/eps)^alpha) = delta exactly at the returned value.
inline double epsilon_geometric(double diam, double alpha, double delta) {
  if (!(diam > 0.0)) throw error(errc::degenerate_diameter, "diameter is zero; cloud is condensed");
  if (!(alpha >= 1.0)) throw error(errc::bad_params, "alpha must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw error(errc::bad_params, "delta must lie in (0, 1)");
  return diam / std::pow(-std::log(delta), 1.0 / alpha);
}

/// Density-normalized variant: guarantees min k_{eps,beta} >= delta given
/// q_max <= n_or_qmax. Requires n_or_qmax^{2 beta} * delta < 1.
inline double epsilon_geometric_density(double diam, double alpha, double beta, double delta,
                                        double n_or_qmax) {
  const double scaled = std::pow(n_or_qmax, 2.0 * beta) * delta;
  if (!(scaled < 1.0))
    throw error(errc::delta_too_large, "need N^{2 beta} * delta < 1 for the density-normalized schedule");
  return epsilon_geometric(diam, alpha, scaled);
}

/// Bandwidth guaranteeing lambda_2 <= 1 - delta through the Diaconis-Stroock
/// bound: needs min K >= delta * d_max, hence delta * d_max < 1.
inline double epsilon_spectral(double diam, double alpha, double delta, double d_max) {
  if (!(delta * d_max < 1.0))
    throw error(errc::delta_too_large, "need delta * d_max < 1 for the spectral schedule");
  return epsilon_geometric(diam, alpha, delta * d_max);
}

/// Step count guaranteed to bring the diameter below zeta under a
/// per-step contraction of (1 - delta).
inline int predicted_steps(double diam0, double zeta, double delta) {
  if (!(zeta > 0.0 && zeta < diam0))
    throw error(errc::zeta_not_below_diameter, "need 0 < zeta < initial diameter");
  if (!(delta > 0.0 && delta < 1.0)) throw error(errc::bad_params, "delta must lie in (0, 1)");
  return static_cast<int>(std::ceil((std::log(zeta) - std::log(diam0)) / std::log(1.0 - delta)));
}

enum class SchedulePolicy { Fixed, Doubling, MinDistance, GeometricGuarantee, SpectralGuarantee };

inline const char* schedule_policy_name(SchedulePolicy p) {
  switch (p) {
    case SchedulePolicy::Fixed: return "fixed";
    case SchedulePolicy::Doubling: return "doubling";
    case SchedulePolicy::MinDistance: return "min-distance";
    case SchedulePolicy::GeometricGuarantee: return "geometric-guarantee";
    case SchedulePolicy::SpectralGuarantee: return "spectral-guarantee";
  }
  return "?";
}

struct ScheduleSpec {
  SchedulePolicy policy = SchedulePolicy::Fixed;
  double epsilon0 = 1.0;          // Fixed / Doubling
  double delta = 0.1;             // guarantee policies
  double stall_threshold = 1e-4;  // Doubling
};

inline ScheduleSpec fixed_schedule(double epsilon) {
  ScheduleSpec s;
  s.policy = SchedulePolicy::Fixed;
  s.epsilon0 = epsilon;
  return s;
}
inline ScheduleSpec doubling_schedule(double epsilon0, double stall_threshold = 1e-4) {
  ScheduleSpec s;
  s.policy = SchedulePolicy::Doubling;
  s.epsilon0 = epsilon0;
  s.stall_threshold = stall_threshold;
  return s;
}
inline ScheduleSpec min_distance_schedule() {
  ScheduleSpec s;
  s.policy = SchedulePolicy::MinDistance;
  return s;
}
inline ScheduleSpec geometric_guarantee_schedule(double delta) {
  ScheduleSpec s{SchedulePolicy::GeometricGuarantee};
  s.delta = delta;
  return s;
}
inline ScheduleSpec spectral_guarantee_schedule(double delta) {
  ScheduleSpec s{SchedulePolicy::SpectralGuarantee};
  s.delta = delta;
  return s;
}

inline void validate(const ScheduleSpec& spec) {
  switch (spec.policy) {
    case SchedulePolicy::Fixed:
      if (!(spec.epsilon0 > 0.0)) throw error(errc::bad_params, "epsilon0 must be positive");
      break;
    case SchedulePolicy::Doubling:
      if (!(spec.epsilon0 > 0.0)) throw error(errc::bad_params, "epsilon0 must be positive");
      if (!(spec.stall_threshold > 0.0))
        throw error(errc::bad_params, "stall threshold must be positive");
      break;
    case SchedulePolicy::GeometricGuarantee:
    case SchedulePolicy::SpectralGuarantee:
      if (!(spec.delta > 0.0 && spec.delta < 1.0))
        throw error(errc::bad_params, "delta must lie in (0, 1)");
      break;
    case SchedulePolicy::MinDistance:
      break;
  }
}

/// Everything a schedule may consult when producing the next bandwidth.
struct ScheduleState {
  double epsilon = 0.0;       // bandwidth used in the step just executed
  double diam = 0.0;          // diameter of the cloud the next step will act on
  double max_movement = 0.0;  // largest per-point displacement of the last step
  double d_max = 0.0;         // max degree of the previous operator (spectral policy)
  double n_points = 0.0;      // row-weight total, the worst case for d_max and q_max
  const PointCloud* cloud = nullptr;  // next cloud (MinDistance policy)
  const KernelSpec* kernel = nullptr;
};

namespace detail {

inline double guarantee_epsilon(const ScheduleSpec& spec, const KernelSpec& kernel, double diam,
                                double d_max_or_n, double n) {
  const double alpha = decay_exponent(kernel);
  if (spec.policy == SchedulePolicy::SpectralGuarantee) {
    if (kernel.family == KernelFamily::DensityNormalized) {
      // lambda_2 <= 1 - min k / (N q_max^{2 beta}) <= 1 - delta.
      const double scaled = spec.delta * n * std::pow(n, 2.0 * kernel.beta);
      if (!(scaled < 1.0))
        throw error(errc::delta_too_large, "need delta * N * q_max^{2 beta} < 1");
      return epsilon_geometric(diam, alpha, scaled);
    }
    return epsilon_spectral(diam, alpha, spec.delta, d_max_or_n);
  }
  if (kernel.family == KernelFamily::DensityNormalized)
    return epsilon_geometric_density(diam, alpha, kernel.beta, spec.delta, n);
  return epsilon_geometric(diam, alpha, spec.delta);
}

}  // namespace detail

/// Bandwidth for the first condensation step. Guarantee policies evaluate
/// their formula on diam(X_0) with the worst-case degree d_max = N.
inline double initial_epsilon(const ScheduleSpec& spec, const KernelSpec& kernel,
                              const PointCloud& X0) {
  validate(spec);
  switch (spec.policy) {
    case SchedulePolicy::Fixed:
    case SchedulePolicy::Doubling:
      return spec.epsilon0;
    case SchedulePolicy::MinDistance:
      return min_positive_distance(X0);
    case SchedulePolicy::GeometricGuarantee:
    case SchedulePolicy::SpectralGuarantee: {
      const double n = static_cast<double>(X0.total_weight());
      return detail::guarantee_epsilon(spec, kernel, diameter(X0), n, n);
    }
  }
  throw error(errc::bad_params, "unknown schedule policy");
}

/// The update(epsilon_t, X_{t+1}) step of the condensation loop.
inline double next_epsilon(const ScheduleSpec& spec, const ScheduleState& state) {
  validate(spec);
  switch (spec.policy) {
    case SchedulePolicy::Fixed:
      return state.epsilon;
    case SchedulePolicy::Doubling:
      return state.max_movement < spec.stall_threshold ? 2.0 * state.epsilon : state.epsilon;
    case SchedulePolicy::MinDistance:
      if (!state.cloud) throw error(errc::bad_params, "min-distance schedule needs the next cloud");
      return min_positive_distance(*state.cloud, 1e-12);
    case SchedulePolicy::GeometricGuarantee:
    case SchedulePolicy::SpectralGuarantee:
      if (!state.kernel) throw error(errc::bad_params, "guarantee schedule needs the kernel spec");
      return detail::guarantee_epsilon(spec, *state.kernel, state.diam,
                                       state.d_max > 0.0 ? state.d_max : state.n_points,
                                       state.n_points);
  }
  throw error(errc::bad_params, "unknown schedule policy");
}

}  // namespace condensation
