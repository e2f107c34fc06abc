#pragma once

#include <cmath>
#include <memory>
#include <string>

#include "condensation/geometry.hpp"
#include "condensation/types.hpp"

namespace condensation {

enum class KernelFamily { Box, Gaussian, Laplace, AlphaDecay, DensityNormalized };

inline const char* kernel_family_name(KernelFamily f) {
  switch (f) {
    case KernelFamily::Box: return "box";
    case KernelFamily::Gaussian: return "gaussian";
    case KernelFamily::Laplace: return "laplace";
    case KernelFamily::AlphaDecay: return "alpha-decay";
    case KernelFamily::DensityNormalized: return "density-normalized";
  }
  return "?";
}

/// Kernel family plus parameters. The bandwidth scale differs per family:
/// box and Laplace compare plain distance against epsilon, the Gaussian
/// divides squared distance by epsilon, and the alpha-decay family divides
/// distance^alpha by epsilon^alpha.
struct KernelSpec {
  KernelFamily family = KernelFamily::Gaussian;
  double epsilon = 1.0;
  double alpha = 2.0;  // AlphaDecay only
  double beta = 0.0;   // DensityNormalized only, in [0, 1]
  // DensityNormalized wraps a rotation-invariant base kernel.
  std::shared_ptr<KernelSpec> base;

  KernelSpec with_epsilon(double eps) const {
    KernelSpec s = *this;
    s.epsilon = eps;
    if (s.base) {
      s.base = std::make_shared<KernelSpec>(*s.base);
      s.base->epsilon = eps;
    }
    return s;
  }
};

inline KernelSpec make_kernel(KernelFamily family, double epsilon) {
  KernelSpec s;
  s.family = family;
  s.epsilon = epsilon;
  return s;
}
inline KernelSpec box_kernel(double epsilon) { return make_kernel(KernelFamily::Box, epsilon); }
inline KernelSpec gaussian_kernel(double epsilon) {
  return make_kernel(KernelFamily::Gaussian, epsilon);
}
inline KernelSpec laplace_kernel(double epsilon) {
  return make_kernel(KernelFamily::Laplace, epsilon);
}
inline KernelSpec alpha_decay_kernel(double epsilon, double alpha) {
  KernelSpec s = make_kernel(KernelFamily::AlphaDecay, epsilon);
  s.alpha = alpha;
  return s;
}
inline KernelSpec density_normalized_kernel(KernelSpec base, double beta) {
  KernelSpec s = make_kernel(KernelFamily::DensityNormalized, base.epsilon);
  s.beta = beta;
  s.base = std::make_shared<KernelSpec>(std::move(base));
  return s;
}

inline void validate(const KernelSpec& spec) {
  if (!(spec.epsilon > 0.0))
    throw error(errc::non_positive_bandwidth, "kernel bandwidth must be positive");
  if (spec.family == KernelFamily::AlphaDecay && !(spec.alpha >= 1.0))
    throw error(errc::bad_params, "alpha-decay exponent must be >= 1");
  if (spec.family == KernelFamily::DensityNormalized) {
    if (!spec.base) throw error(errc::bad_params, "density-normalized kernel needs a base kernel");
    if (spec.base->family == KernelFamily::DensityNormalized)
      throw error(errc::bad_params, "density-normalized base must not itself be density-normalized");
    if (spec.beta < 0.0 || spec.beta > 1.0)
      throw error(errc::bad_params, "density normalization factor must lie in [0, 1]");
    validate(*spec.base);
  }
}

/// Effective exponent of the alpha-decay form: 1 for Laplace, 2 for
/// Gaussian, spec.alpha for AlphaDecay. Schedules use this to invert the
/// kernel formula for a bandwidth.
inline double decay_exponent(const KernelSpec& spec) {
  switch (spec.family) {
    case KernelFamily::Laplace: return 1.0;
    case KernelFamily::Gaussian: return 2.0;
    case KernelFamily::AlphaDecay: return spec.alpha;
    case KernelFamily::DensityNormalized: return decay_exponent(*spec.base);
    case KernelFamily::Box:
      throw error(errc::bad_params, "box kernel has no decay exponent");
  }
  return 0.0;
}

namespace detail {

inline double base_kernel_value(const KernelSpec& spec, double dist) {
  switch (spec.family) {
    case KernelFamily::Box:
      return dist <= spec.epsilon ? 1.0 : 0.0;
    case KernelFamily::Gaussian:
      return std::exp(-dist * dist / spec.epsilon);
    case KernelFamily::Laplace:
      return std::exp(-dist / spec.epsilon);
    case KernelFamily::AlphaDecay:
      return std::exp(-std::pow(dist, spec.alpha) / std::pow(spec.epsilon, spec.alpha));
    case KernelFamily::DensityNormalized:
      throw error(errc::bad_params, "density-normalized kernel is not a pointwise base kernel");
  }
  return 0.0;
}

}  // namespace detail

/// Empirical density estimate for the density-normalized kernel: the
/// multiplicity-weighted base-kernel row sums q(i) = sum_j k(x_i, x_j) m(j).
inline Vector density_weights(const PointCloud& X, const KernelSpec& base) {
  validate(base);
  if (base.family == KernelFamily::DensityNormalized)
    throw error(errc::bad_params, "density weights need a rotation-invariant base kernel");
  const Eigen::Index n = X.size();
  Vector q = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double dist = (X.coords.row(i) - X.coords.row(j)).norm();
      sum += detail::base_kernel_value(base, dist) * X.multiplicity[static_cast<size_t>(j)];
    }
    q(i) = sum;
  }
  return q;
}

/// Symmetric kernel matrix K(i,j) = k(x_i, x_j). Each unordered pair is
/// evaluated once so symmetry is exact. Density-normalized entries can
/// exceed 1; the four base families stay in [0, 1] with unit diagonal.
inline Matrix kernel_matrix(const PointCloud& X, const KernelSpec& spec) {
  validate(spec);
  const Eigen::Index n = X.size();
  Matrix K(n, n);
  if (spec.family == KernelFamily::DensityNormalized) {
    const Vector q = density_weights(X, *spec.base);
    Vector qb(n);
    for (Eigen::Index i = 0; i < n; ++i) qb(i) = std::pow(q(i), spec.beta);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i; j < n; ++j) {
        const double dist = (X.coords.row(i) - X.coords.row(j)).norm();
        const double v = detail::base_kernel_value(*spec.base, dist) / (qb(i) * qb(j));
        K(i, j) = v;
        K(j, i) = v;
      }
    }
    return K;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const double dist = (X.coords.row(i) - X.coords.row(j)).norm();
      const double v = detail::base_kernel_value(spec, dist);
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}

/// Row-stochastic diffusion operator built from a symmetric kernel matrix.
///
/// Degrees, transition rows and the stationary distribution are weighted by
/// row multiplicities, so a cloud of collapsed representatives produces the
/// same operator (acting on representatives) as the equivalent cloud with
/// duplicated rows. With unit multiplicities this is the plain
/// P = D^{-1} K with pi = d / ||d||_1.
struct DiffusionOperator {
  Matrix kernel;       // symmetric K
  Vector degrees;      // d(i) = sum_j K(i,j) m(j)
  Matrix transition;   // P(i,j) = K(i,j) m(j) / d(i)
  Vector stationary;   // pi(i) proportional to m(i) d(i)
  Vector weights;      // row multiplicities m as reals

  Eigen::Index size() const { return transition.rows(); }

  /// Reversibility measure mu(i) = m(i) d(i): mu(i) P(i,j) = mu(j) P(j,i).
  Vector reversible_measure() const { return weights.cwiseProduct(degrees); }
};

inline DiffusionOperator diffusion_operator(const Matrix& K, const std::vector<int>& multiplicity) {
  const Eigen::Index n = K.rows();
  if (K.cols() != n) throw error(errc::shape_mismatch, "kernel matrix must be square");
  if (multiplicity.size() != static_cast<size_t>(n))
    throw error(errc::shape_mismatch, "multiplicity length must match kernel size");
  DiffusionOperator op;
  op.kernel = K;
  op.weights = Vector(n);
  for (Eigen::Index i = 0; i < n; ++i) op.weights(i) = multiplicity[static_cast<size_t>(i)];
  op.degrees = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) sum += K(i, j) * op.weights(j);
    if (!(sum > 0.0))
      throw error(errc::zero_degree_row,
                  "row " + std::to_string(i) + " has zero degree (bandwidth too small)");
    op.degrees(i) = sum;
  }
  op.transition = Matrix(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      op.transition(i, j) = K(i, j) * op.weights(j) / op.degrees(i);
  const Vector mu = op.reversible_measure();
  op.stationary = mu / mu.sum();
  return op;
}

inline DiffusionOperator diffusion_operator(const Matrix& K) {
  return diffusion_operator(K, std::vector<int>(static_cast<size_t>(K.rows()), 1));
}

inline DiffusionOperator diffusion_operator(const PointCloud& X, const KernelSpec& spec) {
  return diffusion_operator(kernel_matrix(X, spec), X.multiplicity);
}

/// X -> P^tau X. Powers are applied by repeated multiplication, which keeps
/// every intermediate row-stochastic to machine precision.
inline PointCloud apply_operator(const DiffusionOperator& op, const PointCloud& X, int tau = 1) {
  if (op.size() != X.size())
    throw error(errc::shape_mismatch, "operator and cloud sizes differ");
  if (tau < 1) throw error(errc::bad_params, "diffusion time tau must be >= 1");
  PointCloud out = X;
  for (int k = 0; k < tau; ++k) out.coords = op.transition * out.coords;
  return out;
}

}  // namespace condensation
