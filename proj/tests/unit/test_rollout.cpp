#include <gtest/gtest.h>

#include <cmath>

#include "dllab/rollout/rollout.hpp"
#include "dllab/spectral/initial_condition.hpp"
#include "dllab/spectral/ks.hpp"

using namespace dllab;
using namespace dllab::rollout;

namespace {

spectral::KsConfig small_ks() {
  spectral::KsConfig c;
  c.n = 64;
  c.substeps = 20;
  return c;
}

Cloud ks_truth(int steps, std::uint64_t seed) {
  spectral::KsSolver solver(small_ks());
  Rng rng(seed, Stream::data);
  spectral::InitialConditionSpec ic;
  Field u = spectral::sample_initial_condition(solver.grid(), ic, rng);
  Cloud truth(steps + 1, 64);
  for (int t = 0; t <= steps; ++t) {
    for (int i = 0; i < 64; ++i) truth(t, i) = u[std::size_t(i)];
    if (t < steps) u = solver.step(u);
  }
  return truth;
}

std::vector<double> noisy_decay(std::span<const double> s, std::size_t member, std::size_t step) {
  Rng rng(5, Stream::noise, member * 1000 + step);
  std::vector<double> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = 0.98 * s[i] + 0.1 * rng.normal();
  return out;
}

}  // namespace

TEST(ClosedLoop, PerfectModelHasZeroError) {
  const Cloud truth = ks_truth(10, 1);
  spectral::KsSolver solver(small_ks());
  const StepModel model = [&](std::span<const double> s, std::size_t, std::size_t) {
    return solver.step(Field({64}, std::vector<double>(s.begin(), s.end()))).values();
  };
  const RolloutRecord rec = closed_loop(model, truth, {10, 1, false});
  ASSERT_EQ(rec.steps.size(), 11u);
  for (const auto& m : rec.steps) {
    EXPECT_LT(m.nrmse, 1e-12);
    EXPECT_LT(m.crps, 1e-12);
  }
}

TEST(ClosedLoop, IdentityModelMeasuresTruthDrift) {
  const Cloud truth = ks_truth(8, 2);
  const StepModel identity = [](std::span<const double> s, std::size_t, std::size_t) {
    return std::vector<double>(s.begin(), s.end());
  };
  const RolloutRecord rec = closed_loop(identity, truth, {8, 1, false});
  for (int t = 1; t <= 8; ++t) {
    const double direct = (truth.row(t) - truth.row(0)).norm() / truth.row(t).norm();
    EXPECT_NEAR(rec.steps[std::size_t(t)].nrmse, direct, 1e-12);
  }
}

TEST(ClosedLoop, ZeroSpreadEnsembleHasZeroSsr) {
  const Cloud truth = ks_truth(5, 3);
  const StepModel model = [](std::span<const double> s, std::size_t, std::size_t t) {
    std::vector<double> out(s.begin(), s.end());
    for (auto& v : out) v = 0.9 * v + 0.01 * double(t);
    return out;
  };
  const RolloutRecord rec = closed_loop(model, truth, {5, 8, false});
  for (const auto& m : rec.steps) EXPECT_LT(m.ssr, 1e-6);
}

TEST(ClosedLoop, MemberPermutationLeavesMetricsUnchanged) {
  const Cloud truth = ks_truth(6, 4);
  const int k = 5;
  const RolloutRecord a = closed_loop(noisy_decay, truth, {6, k, false});
  const StepModel permuted = [&](std::span<const double> s, std::size_t m, std::size_t t) {
    return noisy_decay(s, std::size_t(k - 1) - m, t);
  };
  const RolloutRecord b = closed_loop(permuted, truth, {6, k, false});
  ASSERT_EQ(a.steps.size(), b.steps.size());
  for (std::size_t t = 0; t < a.steps.size(); ++t) {
    EXPECT_NEAR(a.steps[t].nrmse, b.steps[t].nrmse, 1e-12);
    EXPECT_NEAR(a.steps[t].crps, b.steps[t].crps, 1e-12);
    EXPECT_NEAR(a.steps[t].ssr, b.steps[t].ssr, 1e-12);
  }
  EXPECT_GT(a.steps.back().ssr, 0.0);
}

TEST(ClosedLoop, NoLookahead) {
  const Cloud truth = ks_truth(10, 5);
  const RolloutRecord full = closed_loop(noisy_decay, truth, {10, 4, false});
  const RolloutRecord cut = closed_loop(noisy_decay, truth.topRows(5), {10, 4, false});
  ASSERT_EQ(cut.steps.size(), 5u);
  for (std::size_t t = 0; t < 5; ++t) {
    EXPECT_EQ(full.steps[t].nrmse, cut.steps[t].nrmse);
    EXPECT_EQ(full.steps[t].crps, cut.steps[t].crps);
    EXPECT_EQ(full.steps[t].ssr, cut.steps[t].ssr);
  }
}

TEST(ClosedLoop, NonFiniteStateTruncatesAndFlags) {
  const Cloud truth = ks_truth(10, 6);
  const StepModel blowup = [](std::span<const double> s, std::size_t, std::size_t t) {
    std::vector<double> out(s.begin(), s.end());
    if (t == 5) out[3] = NAN;
    return out;
  };
  const RolloutRecord rec = closed_loop(blowup, truth, {10, 2, false});
  EXPECT_TRUE(rec.truncated);
  EXPECT_EQ(rec.truncated_at, 5);
  EXPECT_EQ(rec.steps.size(), 5u);
}

TEST(ClosedLoop, AverageExcludesInitialConditionAndRecomputes) {
  const Cloud truth = ks_truth(6, 7);
  const RolloutRecord rec = closed_loop(noisy_decay, truth, {6, 3, true});
  EXPECT_EQ(rec.ensembles.size(), 7u);
  double n = 0;
  for (std::size_t t = 1; t < rec.steps.size(); ++t) n += rec.steps[t].nrmse;
  EXPECT_DOUBLE_EQ(rec.average().nrmse, n / 6);
  EXPECT_LT(rec.steps[0].nrmse, 1e-15);
}

TEST(Aggregate, SingleRecordIsItself) {
  const Cloud truth = ks_truth(4, 8);
  const RolloutRecord rec = closed_loop(noisy_decay, truth, {4, 3, false});
  const RolloutSummary s = aggregate({rec});
  for (std::size_t t = 0; t < rec.steps.size(); ++t) EXPECT_EQ(s.curve[t].crps, rec.steps[t].crps);
  EXPECT_EQ(s.average.ssr, rec.average().ssr);
}

TEST(Aggregate, CurvesAverage) {
  RolloutRecord a, b;
  for (int t = 0; t < 4; ++t) {
    a.steps.push_back({0.1 * t, 0.0, 0.0});
    b.steps.push_back({0.3 * t, 0.0, 0.0});
  }
  const RolloutSummary s = aggregate({a, b});
  for (int t = 0; t < 4; ++t) EXPECT_NEAR(s.curve[std::size_t(t)].nrmse, 0.2 * t, 1e-15);
  EXPECT_THROW(aggregate({}), UsageError);
}
