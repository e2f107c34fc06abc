#pragma once

#include <Eigen/Eigenvalues>
#include <cmath>
#include <optional>
#include <vector>

#include "condensation/engine.hpp"
#include "condensation/kernels.hpp"

namespace condensation {

/// Spectrum of the diffusion operator, sorted descending. Computed from the
/// symmetric conjugate S(i,j) = K(i,j) sqrt(m_i m_j) / sqrt(d_i d_j), which
/// is similar to P and therefore shares its (real) eigenvalues.
inline Vector operator_eigenvalues(const DiffusionOperator& op) {
  const Eigen::Index n = op.size();
  Matrix S(n, n);
  Vector scale(n);
  for (Eigen::Index i = 0; i < n; ++i) scale(i) = std::sqrt(op.weights(i) / op.degrees(i));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) S(i, j) = op.kernel(i, j) * scale(i) * scale(j);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(S, Eigen::EigenvaluesOnly);
  Vector ev = solver.eigenvalues();
  return ev.reverse();
}

/// Second-largest eigenvalue; 0 for a one-point operator.
inline double lambda2(const DiffusionOperator& op) {
  if (op.size() < 2) return 0.0;
  return operator_eigenvalues(op)(1);
}

struct Eigensystem {
  Vector values;        // descending
  Matrix vectors;       // column k is the eigenvector of values(k)
};

/// Full eigensystem of P, computed on demand. Eigenvectors come from the
/// symmetric conjugate and are rescaled back, so they are orthonormal under
/// the mu-weighted inner product (mu = m * d) rather than the Euclidean one.
inline Eigensystem operator_eigensystem(const DiffusionOperator& op) {
  const Eigen::Index n = op.size();
  Matrix S(n, n);
  Vector scale(n);
  for (Eigen::Index i = 0; i < n; ++i) scale(i) = std::sqrt(op.weights(i) / op.degrees(i));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) S(i, j) = op.kernel(i, j) * scale(i) * scale(j);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(S);
  Eigensystem out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = Matrix(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    // P v = lambda v with v = Dmu^{-1/2} u for the conjugate eigenvector u.
    Vector v = solver.eigenvectors().col(n - 1 - k);
    for (Eigen::Index i = 0; i < n; ++i) v(i) /= std::sqrt(op.weights(i) * op.degrees(i));
    out.vectors.col(k) = v;
  }
  return out;
}

struct Lambda2Bound {
  double kappa = 1.0;
  double bound = 0.0;  // lambda_2 <= 1 - 1/kappa
};

/// Diaconis-Stroock style bound lambda_2 <= 1 - min K / d_max. Needs a
/// strictly positive kernel; box kernels with zero entries are rejected.
inline Lambda2Bound lambda2_bound(const DiffusionOperator& op) {
  const double min_kernel = op.kernel.minCoeff();
  if (!(min_kernel > 0.0))
    throw error(errc::zero_kernel_entry, "lambda2 bound needs a strictly positive kernel");
  Lambda2Bound out;
  out.kappa = op.degrees.maxCoeff() / min_kernel;
  out.bound = 1.0 - 1.0 / out.kappa;
  return out;
}

/// Projection of f onto the constant eigenvector: the constant vector whose
/// value is the stationary mean sum_i pi(i) f(i). Invariant under P.
inline Vector constant_part(const Vector& f, const DiffusionOperator& op) {
  if (f.size() != op.size()) throw error(errc::shape_mismatch, "function length mismatch");
  return Vector::Constant(f.size(), op.stationary.dot(f));
}

/// Complement of the constant part; no eigendecomposition required.
inline Vector nonconstant_part(const Vector& f, const DiffusionOperator& op) {
  return f - constant_part(f, op);
}

inline double weighted_norm(const Vector& f, const Vector& weights) {
  if (f.size() != weights.size()) throw error(errc::shape_mismatch, "weight length mismatch");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    if (!(weights(i) > 0.0)) throw error(errc::bad_params, "norm weights must be positive");
    sum += weights(i) * f(i) * f(i);
  }
  return std::sqrt(sum);
}

struct SpectralReport {
  Vector eigenvalues;
  double lambda2 = 0.0;
  double kappa = std::numeric_limits<double>::quiet_NaN();
  double lambda2_upper_bound = std::numeric_limits<double>::quiet_NaN();
};

inline SpectralReport spectral_report(const DiffusionOperator& op) {
  SpectralReport report;
  report.eigenvalues = operator_eigenvalues(op);
  report.lambda2 = op.size() < 2 ? 0.0 : report.eigenvalues(1);
  if (op.kernel.minCoeff() > 0.0) {
    const auto b = lambda2_bound(op);
    report.kappa = b.kappa;
    report.lambda2_upper_bound = b.bound;
  }
  return report;
}

struct NonconstantNormAudit {
  int step = 0;
  double observed = 0.0;  // ||H_t(coordinate of X_t)||_2
  double bound = 0.0;     // product bound evaluated through step t-1
};

namespace detail {

inline DiffusionOperator rebuild_operator(const CondensationTrace& trace,
                                          const CondensationConfig& config, int t) {
  const PointCloud& X = trace.snapshots[static_cast<size_t>(t)];
  const KernelSpec kernel = config.kernel.with_epsilon(trace.epsilons[static_cast<size_t>(t)]);
  return diffusion_operator(kernel_matrix(X, kernel), operator_weights(X, config));
}

}  // namespace detail

/// Audit of the product bound on the nonconstant part of an evolved
/// coordinate function: at each step t the observed ||H_t(f_t)||_2 (with f_t
/// the chosen coordinate of X_t) is compared against
/// ||d_0||_inf^{1/2} * prod_{k<t} lambda_{k,2}
///                   * prod_{k<t} (1 + N^{1/2} ||d_k - d_{k+1}||_2)^2 * ||f_0||_2.
/// The audit runs over the prefix of steps where no merge changed the row
/// count, since the evolved function lives on a fixed index set.
inline std::vector<NonconstantNormAudit> nonconstant_norm_audit(const CondensationTrace& trace,
                                                         const CondensationConfig& config,
                                                         int coordinate) {
  if (coordinate < 0 || coordinate >= trace.initial().dim())
    throw error(errc::bad_params, "coordinate index out of range");
  std::vector<NonconstantNormAudit> rows;
  if (trace.steps() == 0) return rows;

  const Eigen::Index n0 = trace.initial().size();
  const double sqrt_n = std::sqrt(static_cast<double>(n0));
  const double f0_norm = trace.initial().coords.col(coordinate).norm();
  const double d0_inf = std::sqrt(trace.degrees.front().maxCoeff());

  double eigen_product = 1.0;
  double degree_product = 1.0;
  for (int t = 0; t < trace.steps(); ++t) {
    if (trace.snapshots[static_cast<size_t>(t)].size() != n0) break;
    const DiffusionOperator op = detail::rebuild_operator(trace, config, t);
    const Vector f_t = trace.snapshots[static_cast<size_t>(t)].coords.col(coordinate);
    NonconstantNormAudit row;
    row.step = t;
    row.observed = nonconstant_part(f_t, op).norm();
    row.bound = d0_inf * eigen_product * degree_product * f0_norm;
    rows.push_back(row);

    eigen_product *= lambda2(op);
    if (t + 1 < trace.steps() &&
        trace.degrees[static_cast<size_t>(t) + 1].size() == trace.degrees[static_cast<size_t>(t)].size()) {
      const double delta =
          (trace.degrees[static_cast<size_t>(t)] - trace.degrees[static_cast<size_t>(t) + 1]).norm();
      degree_product *= (1.0 + sqrt_n * delta) * (1.0 + sqrt_n * delta);
    }
  }
  return rows;
}

struct DegreeVariation {
  double total = 0.0;                // sum of ||d_k - d_{k+1}||_2
  std::optional<int> monotone_after;  // first step after which degrees only grow
};

/// Diagnostic for the summable-degree-variation assumption and the
/// eventual-monotonicity observation.
inline DegreeVariation degree_variation(const CondensationTrace& trace) {
  DegreeVariation out;
  const auto& deg = trace.degrees;
  if (deg.size() < 2) return out;
  int last_violation = -1;
  for (size_t k = 0; k + 1 < deg.size(); ++k) {
    if (deg[k].size() != deg[k + 1].size()) return out;  // merge changed the index set
    out.total += (deg[k] - deg[k + 1]).norm();
    if (((deg[k + 1] - deg[k]).array() < 0.0).any()) last_violation = static_cast<int>(k);
  }
  if (last_violation + 1 < static_cast<int>(deg.size()) - 1 || last_violation == -1)
    out.monotone_after = last_violation + 1;
  return out;
}

}  // namespace condensation
