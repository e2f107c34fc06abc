#include "condensation/kernels.hpp"

#include <gtest/gtest.h>

#include "condensation/datasets.hpp"

using namespace condensation;

namespace {

PointCloud random_cloud(int n, int dim, std::uint64_t seed) {
  DatasetSpec spec;
  spec.name = DatasetName::Uniform;
  spec.n = n;
  spec.dim = dim;
  spec.seed = seed;
  return generate(spec);
}

}  // namespace

TEST(KernelMatrix, UnitDiagonal) {
  const PointCloud X = random_cloud(5, 3, 1);
  for (const KernelSpec& spec :
       {box_kernel(0.5), gaussian_kernel(0.7), laplace_kernel(0.7), alpha_decay_kernel(0.7, 4)}) {
    const Matrix K = kernel_matrix(X, spec);
    for (int i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(K(i, i), 1.0);
    EXPECT_GE(K.minCoeff(), 0.0);
    EXPECT_LE(K.maxCoeff(), 1.0);
  }
}

TEST(KernelMatrix, BoxThreshold) {
  const Matrix K = kernel_matrix(make_cloud_1d({0, 1, 2}), box_kernel(1.2));
  Matrix want(3, 3);
  want << 1, 1, 0, 1, 1, 1, 0, 1, 1;
  EXPECT_EQ((K - want).cwiseAbs().maxCoeff(), 0.0);
}

TEST(KernelMatrix, LaplaceValue) {
  const Matrix K = kernel_matrix(make_cloud_1d({0, 1}), laplace_kernel(1.0));
  EXPECT_NEAR(K(0, 1), std::exp(-1.0), 1e-15);
}

TEST(KernelMatrix, RejectsNonPositiveBandwidth) {
  EXPECT_THROW(kernel_matrix(make_cloud_1d({0, 1}), gaussian_kernel(0.0)), error);
  EXPECT_THROW(kernel_matrix(make_cloud_1d({0, 1}), gaussian_kernel(-1.0)), error);
}

TEST(KernelMatrix, ExactlySymmetric) {
  const PointCloud X = random_cloud(16, 2, 2);
  for (const KernelSpec& spec :
       {box_kernel(0.4), gaussian_kernel(0.3), laplace_kernel(0.3), alpha_decay_kernel(0.3, 7),
        density_normalized_kernel(gaussian_kernel(0.3), 0.5)}) {
    const Matrix K = kernel_matrix(X, spec);
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 16; ++j) EXPECT_EQ(K(i, j), K(j, i));
  }
}

TEST(KernelMatrix, MonotoneInBandwidth) {
  const PointCloud X = random_cloud(10, 2, 3);
  for (auto make : {+[](double e) { return gaussian_kernel(e); },
                    +[](double e) { return laplace_kernel(e); },
                    +[](double e) { return alpha_decay_kernel(e, 5); }}) {
    const Matrix narrow = kernel_matrix(X, make(0.2));
    const Matrix wide = kernel_matrix(X, make(0.5));
    EXPECT_GE((wide - narrow).minCoeff(), 0.0);
  }
}

// The alpha-decay family interpolates toward the box kernel as alpha grows.
TEST(KernelMatrix, AlphaDecayApproachesBox) {
  const PointCloud X = random_cloud(12, 2, 4);
  const double epsilon = 0.4;
  const Matrix box = kernel_matrix(X, box_kernel(epsilon));
  const Matrix dist = pairwise_distances(X);
  double worst_prev = 1.0;
  for (double alpha : {2.0, 10.0, 100.0}) {
    const Matrix K = kernel_matrix(X, alpha_decay_kernel(epsilon, alpha));
    double worst = 0.0;
    for (int i = 0; i < 12; ++i)
      for (int j = 0; j < 12; ++j) {
        // Skip pairs near the threshold where convergence is slow.
        if (std::abs(dist(i, j) - epsilon) < 0.05) continue;
        worst = std::max(worst, std::abs(K(i, j) - box(i, j)));
      }
    EXPECT_LE(worst, worst_prev + 1e-12);
    worst_prev = worst;
    if (alpha == 100.0) EXPECT_LT(worst, 0.05);
  }
}

TEST(DensityWeights, Values) {
  EXPECT_DOUBLE_EQ(density_weights(make_cloud_1d({3}), gaussian_kernel(1))(0), 1.0);

  const PointCloud pair = make_cloud_1d({0, 1});
  const Vector q = density_weights(pair, gaussian_kernel(1.0));
  EXPECT_NEAR(q(0), 1.0 + std::exp(-1.0), 1e-15);
  EXPECT_NEAR(q(1), 1.0 + std::exp(-1.0), 1e-15);

  // A box kernel wider than the diameter behaves like the all-ones kernel.
  const PointCloud X = random_cloud(7, 2, 5);
  const Vector qn = density_weights(X, box_kernel(10.0));
  for (int i = 0; i < 7; ++i) EXPECT_DOUBLE_EQ(qn(i), 7.0);
}

TEST(DiffusionOperator, ThreePointBox) {
  const Matrix K = kernel_matrix(make_cloud_1d({0, 1, 2}), box_kernel(1.2));
  const DiffusionOperator op = diffusion_operator(K);
  Matrix want(3, 3);
  want << 0.5, 0.5, 0, 1.0 / 3, 1.0 / 3, 1.0 / 3, 0, 0.5, 0.5;
  EXPECT_NEAR((op.transition - want).cwiseAbs().maxCoeff(), 0.0, 1e-15);
  EXPECT_NEAR(op.degrees(0), 2.0, 1e-15);
  EXPECT_NEAR(op.degrees(1), 3.0, 1e-15);
  EXPECT_NEAR(op.stationary(0), 2.0 / 7, 1e-15);
  EXPECT_NEAR(op.stationary(1), 3.0 / 7, 1e-15);
}

TEST(DiffusionOperator, UniformKernel) {
  const DiffusionOperator op = diffusion_operator(Matrix::Ones(2, 2));
  EXPECT_NEAR(op.transition(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(op.stationary(0), 0.5, 1e-15);
}

TEST(DiffusionOperator, ZeroRowFails) {
  Matrix K = Matrix::Zero(2, 2);
  K(0, 0) = 1.0;
  EXPECT_THROW(diffusion_operator(K), error);
}

TEST(DiffusionOperator, Invariants) {
  const PointCloud X = random_cloud(14, 3, 6);
  for (const KernelSpec& spec : {gaussian_kernel(0.4), laplace_kernel(0.4),
                                 density_normalized_kernel(gaussian_kernel(0.4), 0.7)}) {
    const DiffusionOperator op = diffusion_operator(X, spec);
    for (int i = 0; i < 14; ++i) {
      EXPECT_NEAR(op.transition.row(i).sum(), 1.0, 1e-12);
      EXPECT_GE(op.transition.row(i).minCoeff(), 0.0);
    }
    if (spec.family != KernelFamily::DensityNormalized) EXPECT_GE(op.degrees.minCoeff(), 1.0);
    // d-reversibility.
    for (int i = 0; i < 14; ++i)
      for (int j = 0; j < 14; ++j)
        EXPECT_NEAR(op.degrees(i) * op.transition(i, j), op.degrees(j) * op.transition(j, i),
                    1e-10);
    EXPECT_NEAR(op.stationary.sum(), 1.0, 1e-12);
  }
}

// min K >= delta forces every transition entry to be at least delta / N.
TEST(DiffusionOperator, TransitionLowerBound) {
  const PointCloud X = random_cloud(9, 2, 7);
  const DiffusionOperator op = diffusion_operator(X, gaussian_kernel(1.5));
  const double delta = op.kernel.minCoeff();
  ASSERT_GT(delta, 0.0);
  EXPECT_GE(op.transition.minCoeff(), delta / 9 - 1e-15);
}

TEST(ApplyOperator, UniformKernelReachesCentroid) {
  Matrix coords(3, 2);
  coords << 0, 0, 2, 0, 1, 3;
  const PointCloud X = make_cloud(coords);
  const DiffusionOperator op = diffusion_operator(kernel_matrix(X, box_kernel(10.0)));
  const PointCloud out = apply_operator(op, X, 1);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(out.coords(i, 0), 1.0, 1e-15);
    EXPECT_NEAR(out.coords(i, 1), 1.0, 1e-15);
  }
}

TEST(ApplyOperator, IdentityKernelFreezesCloud) {
  // Bandwidth below the minimum gap only connects each point to itself.
  const PointCloud X = make_cloud_1d({0, 1, 2});
  const DiffusionOperator op = diffusion_operator(kernel_matrix(X, box_kernel(0.5)));
  const PointCloud out = apply_operator(op, X, 3);
  EXPECT_EQ((out.coords - X.coords).cwiseAbs().maxCoeff(), 0.0);
}

TEST(ApplyOperator, ThreeCollinearPoints) {
  const PointCloud X = make_cloud_1d({0, 1, 2});
  const DiffusionOperator op = diffusion_operator(kernel_matrix(X, box_kernel(1.2)));
  const PointCloud out = apply_operator(op, X, 1);
  EXPECT_NEAR(out.coords(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(out.coords(1, 0), 1.0, 1e-15);
  EXPECT_NEAR(out.coords(2, 0), 1.5, 1e-15);
}

TEST(ApplyOperator, PowersCompose) {
  const PointCloud X = random_cloud(8, 2, 8);
  const DiffusionOperator op = diffusion_operator(X, gaussian_kernel(0.6));
  const PointCloud once = apply_operator(op, apply_operator(op, X, 2), 3);
  const PointCloud direct = apply_operator(op, X, 5);
  EXPECT_NEAR((once.coords - direct.coords).cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(ApplyOperator, ShapeMismatch) {
  const DiffusionOperator op = diffusion_operator(Matrix::Ones(2, 2));
  EXPECT_THROW(apply_operator(op, make_cloud_1d({0, 1, 2})), error);
}

// Collapsed representatives with multiplicity produce the same operator as
// the cloud with duplicated rows.
TEST(DiffusionOperator, MultiplicityMatchesDuplicatedRows) {
  Matrix duplicated(4, 1);
  duplicated << 0, 0, 1, 3;
  const PointCloud Xdup = make_cloud(duplicated);

  Matrix collapsed(3, 1);
  collapsed << 0, 1, 3;
  PointCloud Xrep = make_cloud(collapsed);
  Xrep.multiplicity = {2, 1, 1};

  for (const KernelSpec& spec : {gaussian_kernel(2.0), box_kernel(1.5)}) {
    const DiffusionOperator dup = diffusion_operator(Xdup, spec);
    const DiffusionOperator rep = diffusion_operator(Xrep, spec);
    const PointCloud out_dup = apply_operator(dup, Xdup, 1);
    const PointCloud out_rep = apply_operator(rep, Xrep, 1);
    // Rows 0/1 of the duplicated cloud collapse onto representative row 0.
    EXPECT_NEAR(out_dup.coords(0, 0), out_rep.coords(0, 0), 1e-15);
    EXPECT_NEAR(out_dup.coords(1, 0), out_rep.coords(0, 0), 1e-15);
    EXPECT_NEAR(out_dup.coords(2, 0), out_rep.coords(1, 0), 1e-15);
    EXPECT_NEAR(out_dup.coords(3, 0), out_rep.coords(2, 0), 1e-15);
  }
}

TEST(KernelSpec, DensityNormalizedValidation) {
  EXPECT_THROW(validate(density_normalized_kernel(
                   density_normalized_kernel(gaussian_kernel(1), 0.5), 0.5)),
               error);
  KernelSpec bad = density_normalized_kernel(gaussian_kernel(1), 1.5);
  EXPECT_THROW(validate(bad), error);
}
