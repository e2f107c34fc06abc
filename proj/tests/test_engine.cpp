#include "condensation/engine.hpp"

#include <gtest/gtest.h>

#include <set>

#include "condensation/datasets.hpp"
#include "condensation/schedules.hpp"

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

CondensationConfig box_config(double epsilon, double zeta = 0.0) {
  CondensationConfig config;
  config.kernel = box_kernel(epsilon);
  config.schedule = fixed_schedule(epsilon);
  config.zeta = zeta;
  return config;
}

int distinct_positions(const PointCloud& X, double tol = 1e-9) {
  std::vector<Eigen::RowVectorXd> reps;
  for (Eigen::Index i = 0; i < X.size(); ++i) {
    bool found = false;
    for (const auto& r : reps)
      if ((X.coords.row(i) - r).norm() <= tol) {
        found = true;
        break;
      }
    if (!found) reps.push_back(X.coords.row(i));
  }
  return static_cast<int>(reps.size());
}

}  // namespace

TEST(CondenseStep, ThreeCollinearPoints) {
  const auto [next, op] = condense_step(make_cloud_1d({0, 1, 2}), 1.2, box_config(1.2));
  EXPECT_NEAR(next.coords(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(next.coords(1, 0), 1.0, 1e-15);
  EXPECT_NEAR(next.coords(2, 0), 1.5, 1e-15);
}

TEST(CondenseStep, NarrowBandwidthIsIdentity) {
  const PointCloud X = make_cloud_1d({0, 1, 2});
  const auto [next, op] = condense_step(X, 0.4, box_config(0.4));
  EXPECT_EQ((next.coords - X.coords).cwiseAbs().maxCoeff(), 0.0);
}

TEST(CondenseStep, UniformPairMeetsAtMidpoint) {
  const auto [next, op] = condense_step(make_cloud_1d({0, 1}), 2.0, box_config(2.0));
  EXPECT_NEAR(next.coords(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(next.coords(1, 0), 0.5, 1e-15);
}

TEST(CondenseStep, TauEqualsRepeatedApplication) {
  const PointCloud X = random_cloud(10, 2, 11);
  CondensationConfig config;
  config.kernel = gaussian_kernel(0.5);
  config.schedule = fixed_schedule(0.5);
  config.tau = 4;
  const auto [with_tau, op] = condense_step(X, 0.5, config);
  PointCloud manual = X;
  for (int k = 0; k < 4; ++k) manual.coords = op.transition * manual.coords;
  EXPECT_NEAR((with_tau.coords - manual.coords).cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(DetectMerges, NoMergeAboveRadius) {
  const auto [merged, events] = detect_merges(make_cloud_1d({0, 1}), 0.5, 1);
  EXPECT_EQ(merged.size(), 2);
  EXPECT_TRUE(events.empty());
}

TEST(DetectMerges, PairCollapsesToMidpoint) {
  const auto [merged, events] = detect_merges(make_cloud_1d({0, 0.1, 5}), 0.2, 3);
  ASSERT_EQ(merged.size(), 2);
  EXPECT_NEAR(merged.coords(0, 0), 0.05, 1e-15);
  EXPECT_NEAR(merged.coords(1, 0), 5.0, 1e-15);
  EXPECT_EQ(merged.ids, (std::vector<int>{0, 2}));
  EXPECT_EQ(merged.multiplicity, (std::vector<int>{2, 1}));
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0].step, 3);
  EXPECT_EQ(events[0].survivor, 0);
  EXPECT_EQ(events[0].absorbed, 1);
}

TEST(DetectMerges, TransitiveChainGroups) {
  const auto [merged, events] = detect_merges(make_cloud_1d({0, 0.1, 0.18, 5}), 0.12, 1);
  ASSERT_EQ(merged.size(), 2);
  EXPECT_NEAR(merged.coords(0, 0), (0.0 + 0.1 + 0.18) / 3.0, 1e-15);
  EXPECT_EQ(merged.multiplicity[0], 3);
  EXPECT_EQ(events.size(), 2u);
}

TEST(DetectMerges, ZetaZeroKeepsDuplicates) {
  const auto [merged, events] = detect_merges(make_cloud_1d({1, 1, 2}), 0.0, 1);
  EXPECT_EQ(merged.size(), 3);
  EXPECT_TRUE(events.empty());
}

TEST(Condense, OneBoxStepOnCollinearPoints) {
  const CondensationTrace trace = condense(make_cloud_1d({0, 1, 2}), box_config(1.2, 1e-9));
  ASSERT_GE(trace.steps(), 1);
  EXPECT_NEAR(trace.snapshots[1].coords(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(trace.snapshots[1].coords(1, 0), 1.0, 1e-15);
  EXPECT_NEAR(trace.snapshots[1].coords(2, 0), 1.5, 1e-15);
  EXPECT_DOUBLE_EQ(trace.diameters[0], 2.0);
  EXPECT_DOUBLE_EQ(trace.diameters[1], 1.0);
}

TEST(Condense, WideBoxConvergesInOneStep) {
  const PointCloud X = random_cloud(12, 2, 12);
  const CondensationTrace trace = condense(X, box_config(10.0, 1e-9));
  EXPECT_EQ(trace.termination, Termination::Converged);
  EXPECT_EQ(trace.steps(), 1);
  // Everything lands on the centroid.
  const Eigen::RowVectorXd centroid = X.coords.colwise().mean();
  EXPECT_NEAR((trace.final_cloud().coords.row(0) - centroid).norm(), 0.0, 1e-12);
}

TEST(Condense, DumbbellReachesFixedPointWithTwoPositions) {
  // Two tight pairs far apart; a box bandwidth below the gap condenses each
  // pair and then nothing moves.
  const CondensationTrace trace =
      condense(make_cloud_1d({0.0, 0.1, 10.0, 10.1}), box_config(0.5, 1e-6));
  EXPECT_EQ(trace.termination, Termination::FixedPoint);
  EXPECT_EQ(distinct_positions(trace.final_cloud()), 2);
}

TEST(Condense, StrictlyPositiveKernelsContract) {
  for (const KernelSpec& kernel :
       {gaussian_kernel(0.5), laplace_kernel(0.5), alpha_decay_kernel(0.5, 4)}) {
    CondensationConfig config;
    config.kernel = kernel;
    config.schedule = fixed_schedule(0.5);
    const CondensationTrace trace = condense(random_cloud(16, 2, 13), config);
    EXPECT_EQ(trace.termination, Termination::Converged);
    for (size_t t = 0; t + 1 < trace.diameters.size(); ++t)
      if (trace.diameters[t] >= config.convergence_tol)
        EXPECT_LT(trace.diameters[t + 1], trace.diameters[t]);
  }
}

TEST(Condense, GeometricGuaranteeRateAndSteps) {
  const PointCloud X = random_cloud(24, 2, 14);
  const double delta = 0.1, zeta = 1e-3;
  CondensationConfig config;
  config.kernel = gaussian_kernel(1.0);
  config.schedule = geometric_guarantee_schedule(delta);
  config.zeta = zeta;
  const CondensationTrace trace = condense(X, config);
  EXPECT_EQ(trace.termination, Termination::Converged);

  const double diam0 = trace.diameters[0];
  for (size_t t = 0; t < trace.diameters.size(); ++t) {
    EXPECT_LE(trace.diameters[t], std::pow(1.0 - delta, static_cast<double>(t)) * diam0 * (1.0 + 1e-9));
    // Per-step contraction rate when the kernel floor delta is maintained.
    if (t + 1 < trace.diameters.size())
      EXPECT_LE(trace.diameters[t + 1], (1.0 - delta) * trace.diameters[t] + 1e-9);
  }
  EXPECT_LE(trace.steps(), predicted_steps(diam0, zeta, delta));
}

TEST(Condense, DoublingScheduleRecoversFromStall) {
  // A tiny fixed bandwidth stalls immediately; doubling must still converge.
  CondensationConfig config;
  config.kernel = gaussian_kernel(1e-4);
  config.schedule = doubling_schedule(1e-4, 1e-3);
  config.max_steps = 500;
  const CondensationTrace trace = condense(random_cloud(10, 2, 15), config);
  EXPECT_EQ(trace.termination, Termination::Converged);
  EXPECT_GT(trace.epsilons.back(), trace.epsilons.front());
}

TEST(Condense, MergeEventsPartitionIds) {
  CondensationConfig config;
  config.kernel = gaussian_kernel(0.6);
  config.schedule = fixed_schedule(0.6);
  config.zeta = 1e-3;
  const CondensationTrace trace = condense(random_cloud(20, 2, 16), config);
  std::set<int> absorbed;
  for (const auto& e : trace.merges) {
    EXPECT_LT(e.survivor, e.absorbed);
    EXPECT_TRUE(absorbed.insert(e.absorbed).second) << "id absorbed twice";
  }
  // An absorbed id never reappears.
  std::set<int> final_ids(trace.final_cloud().ids.begin(), trace.final_cloud().ids.end());
  for (int id : absorbed) EXPECT_FALSE(final_ids.count(id));
}

TEST(Condense, ErrorsAreAnnotatedWithStep) {
  // Spectral guarantee with delta * N >= 1 fails when the first bandwidth is
  // computed.
  CondensationConfig config;
  config.kernel = gaussian_kernel(1.0);
  config.schedule = spectral_guarantee_schedule(0.5);
  try {
    condense(random_cloud(8, 2, 17), config);
    FAIL() << "expected DeltaTooLarge";
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::delta_too_large);
    EXPECT_NE(std::string(e.what()).find("step"), std::string::npos);
  }
}

TEST(ReplayCheck, FreshTraceReplays) {
  CondensationConfig config;
  config.kernel = gaussian_kernel(0.7);
  config.schedule = fixed_schedule(0.7);
  config.zeta = 1e-4;
  const CondensationTrace trace = condense(random_cloud(15, 2, 18), config);
  EXPECT_TRUE(replay_check(trace, config));
}

TEST(ReplayCheck, DetectsPerturbation) {
  CondensationConfig config;
  config.kernel = gaussian_kernel(0.7);
  config.schedule = fixed_schedule(0.7);
  const PointCloud X = random_cloud(12, 2, 19);
  CondensationTrace trace = condense(X, config);
  ASSERT_GE(trace.steps(), 2);
  trace.snapshots[1].coords(0, 0) += 1e-6;
  EXPECT_FALSE(replay_check(trace, config));
}

TEST(ReplayCheck, VacuousOnConvergedInput) {
  // A single point is already condensed: no steps, nothing to replay.
  Matrix one(1, 2);
  one << 3, 4;
  CondensationConfig config;
  config.kernel = gaussian_kernel(1.0);
  config.schedule = fixed_schedule(1.0);
  const CondensationTrace trace = condense(make_cloud(one), config);
  EXPECT_EQ(trace.steps(), 0);
  EXPECT_EQ(trace.termination, Termination::Converged);
  EXPECT_TRUE(replay_check(trace, config));
}

TEST(Condense, ZetaAboveDiameterMergesEverythingInOneStep) {
  CondensationConfig config = box_config(0.7, 100.0);
  const CondensationTrace trace = condense(random_cloud(9, 2, 20), config);
  EXPECT_EQ(trace.steps(), 1);
  EXPECT_EQ(trace.final_cloud().size(), 1);
  EXPECT_EQ(trace.final_cloud().multiplicity[0], 9);
  EXPECT_EQ(trace.termination, Termination::Converged);
}

TEST(Condense, BoxDiametersNeverIncrease) {
  const CondensationTrace trace = condense(random_cloud(20, 2, 21), box_config(0.4, 1e-6));
  for (size_t t = 0; t + 1 < trace.diameters.size(); ++t)
    EXPECT_LE(trace.diameters[t + 1], trace.diameters[t] + 1e-12);
}

TEST(Condense, DensityNormalizedKernelWithGuaranteeSchedule) {
  CondensationConfig config;
  config.kernel = density_normalized_kernel(gaussian_kernel(1.0), 0.25);
  config.schedule = geometric_guarantee_schedule(0.05);  // needs N^{2 beta} delta < 1
  const CondensationTrace trace = condense(random_cloud(12, 2, 22), config);
  EXPECT_EQ(trace.termination, Termination::Converged);
  for (size_t t = 0; t + 1 < trace.diameters.size(); ++t)
    EXPECT_LE(trace.diameters[t + 1], (1.0 - 0.05) * trace.diameters[t] + 1e-9);
}

TEST(Condense, PerStepTauScheduleReplays) {
  CondensationConfig config;
  config.kernel = gaussian_kernel(0.5);
  config.schedule = fixed_schedule(0.5);
  config.tau_schedule = {3, 1, 2};
  const PointCloud X = random_cloud(10, 2, 23);
  const CondensationTrace trace = condense(X, config);
  EXPECT_TRUE(replay_check(trace, config));
  // The first step applies the operator three times.
  const auto [op_only, op] = condense_step(X, trace.epsilons[0], config, /*step=*/1);
  PointCloud thrice = X;
  for (int k = 0; k < 3; ++k) thrice.coords = op.transition * thrice.coords;
  EXPECT_NEAR((trace.snapshots[1].coords - thrice.coords).cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(Condense, MinDistanceBoxRunCoalescesOncePerStep) {
  CondensationConfig config;
  config.kernel = box_kernel(1.0);
  config.schedule = min_distance_schedule();
  const CondensationTrace trace = condense(make_cloud_1d({0, 1, 3}), config);
  EXPECT_EQ(trace.termination, Termination::Converged);
  EXPECT_EQ(trace.steps(), 2);  // N - 1 coalescence steps
  // First step merges {0,1} at 0.5; the second pulls in 3 with double weight.
  EXPECT_NEAR(trace.snapshots[1].coords(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(trace.snapshots[2].coords(0, 0), 4.0 / 3.0, 1e-14);
}
