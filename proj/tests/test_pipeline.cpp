#include <gtest/gtest.h>

#include "odpo/evaluation.hpp"
#include "odpo/pipeline.hpp"
#include "test_support.hpp"

namespace odpo {
namespace {

using testing::orthonormal_arms;
using testing::unit;
using testing::vec;

Design design_of(std::vector<DesignAtom> atoms, int d) {
  Design des;
  des.support = std::move(atoms);
  des.dimension = d;
  return des;
}

TEST(Allocate, EvenSplit) {
  const Allocation a = allocate(design_of({{0, 0.5}, {1, 0.5}}, 2), 10);
  ASSERT_EQ(a.entries.size(), 2u);
  EXPECT_EQ(a.entries[0].count, 5);
  EXPECT_EQ(a.entries[1].count, 5);
  EXPECT_EQ(a.requested_t, 10);
  EXPECT_EQ(a.effective_t, 10);
}

TEST(Allocate, CeilRounding) {
  const Allocation a = allocate(design_of({{0, 0.34}, {1, 0.33}, {2, 0.33}}, 2), 10);
  ASSERT_EQ(a.entries.size(), 3u);
  for (const auto& e : a.entries) EXPECT_EQ(e.count, 4);
  EXPECT_EQ(a.effective_t, 12);
}

TEST(Allocate, OvershootBoundedBySupport) {
  Rng rng(1);
  for (int rep = 0; rep < 200; ++rep) {
    const int size = 1 + static_cast<int>(rng.below(10));
    std::vector<DesignAtom> atoms;
    double total = 0.0;
    for (int k = 0; k < size; ++k) {
      atoms.push_back({k, 0.01 + rng.uniform()});
      total += atoms.back().weight;
    }
    for (auto& a : atoms) a.weight /= total;
    const int horizon = 1 + static_cast<int>(rng.below(500));
    const Allocation alloc = allocate(design_of(atoms, 3), horizon);
    EXPECT_GE(alloc.effective_t, horizon);
    EXPECT_LE(alloc.effective_t - horizon, size);
    int sum = 0;
    for (const auto& e : alloc.entries) sum += e.count;
    EXPECT_EQ(sum, alloc.effective_t);
  }
  EXPECT_THROW(allocate(design_of({{0, 1.0}}, 1), 0), DomainError);
}

TEST(Predict, ArgmaxWithLowestIndexTies) {
  const std::vector<ActionSet> sets = {
      {0, {vec({0.1, 0.0}), vec({0.9, 0.0}), vec({0.5, 0.5})}},
      {1, {vec({0.0, 0.3}), vec({0.0, 0.3})}},
  };
  const Prediction p = predict(unit(2, 0), sets);
  EXPECT_EQ(p.chosen, (std::vector<int>{1, 0}));
  EXPECT_DOUBLE_EQ(p.scores[0], 0.9);
  EXPECT_THROW(predict(unit(3, 0), sets), DimensionMismatch);
}

TEST(Predict, InvariantToPositiveScalingAndMatchesBruteForce) {
  Rng rng(2);
  for (int rep = 0; rep < 50; ++rep) {
    const Instance inst = make_random_instance(8, 5, 4, 100 + rep);
    const Vector theta = sample_unit_ball(4, rng);
    const Prediction p = predict(theta, inst);
    EXPECT_EQ(predict(3.7 * theta, inst).chosen, p.chosen);
    for (int n = 0; n < inst.num_contexts(); ++n) {
      const auto& arms = inst.action_sets()[n].arms;
      for (std::size_t k = 0; k < arms.size(); ++k) {
        EXPECT_LE(theta.dot(arms[k]), theta.dot(arms[p.chosen[n]]));
      }
    }
  }
}

TEST(RunOdpo, OneDimensionalSignRecovered) {
  const Instance inst = build_instance({{0, {vec({1.0}), vec({-1.0})}}}, vec({0.5}));
  int correct = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    OdpoConfig cfg;
    cfg.seed = seed;
    correct += run_odpo(inst, 200, cfg).prediction.chosen[0] == 0;
  }
  EXPECT_GE(correct, 99);
}

TEST(RunOdpo, ZeroParameterHasZeroRegret) {
  const Instance inst = build_instance(make_random_instance(10, 3, 3, 5).action_sets(),
                                       Vector::Zero(3));
  OdpoConfig cfg;
  cfg.seed = 3;
  const OdpoRun run = run_odpo(inst, 50, cfg);
  EXPECT_EQ(simple_regret(inst, run.prediction), 0.0);
}

TEST(RunOdpo, DeterministicAndConserving) {
  const Instance inst = make_random_instance(20, 3, 4, 9);
  OdpoConfig cfg;
  cfg.seed = 77;
  const OdpoRun a = run_odpo(inst, 64, cfg);
  const OdpoRun b = run_odpo(inst, 64, cfg);
  EXPECT_EQ(a.estimate.theta_hat_projected, b.estimate.theta_hat_projected);
  EXPECT_EQ(a.prediction.chosen, b.prediction.chosen);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t s = 0; s < a.samples.size(); ++s) {
    EXPECT_EQ(a.samples[s].outcome, b.samples[s].outcome);
  }
  EXPECT_EQ(static_cast<int>(a.samples.size()), a.allocation.effective_t);
  EXPECT_LE(simple_regret(inst, a.prediction), 2.0);
  EXPECT_TRUE(a.warnings.empty());
}

TEST(RunOdpo, RealizedDesignNormsWithinApproximationFactor) {
  for (int d : {2, 3, 5}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Instance inst = make_random_instance(15, 3, d, seed);
      if (!inst.spans()) continue;
      OdpoConfig cfg;
      cfg.seed = seed;
      for (int horizon : {d * d, 4 * d * d}) {
        const OdpoRun run = run_odpo(inst, horizon, cfg);
        const Matrix v_inv = run.estimate.v.matrix.inverse();
        double worst = 0.0;
        for (const auto& b : inst.diff_arms()) {
          worst = std::max(worst, std::sqrt(b.vector.dot(v_inv * b.vector)));
        }
        EXPECT_LE(worst, std::sqrt((1.0 + cfg.epsilon) * d / run.allocation.effective_t))
            << "d=" << d << " T=" << horizon;
      }
    }
  }
}

TEST(RunOdpo, WarnsBelowMinimumHorizon) {
  const Instance inst = make_random_instance(20, 3, 4, 2);
  OdpoConfig cfg;
  const OdpoRun run = run_odpo(inst, 5, cfg);
  ASSERT_EQ(run.warnings.size(), 1u);
  EXPECT_NE(run.warnings[0].find("d(d+1)/2"), std::string::npos);
}

TEST(Baselines, GreedyOnOrthonormalPicksEachOnce) {
  const auto arms = orthonormal_arms(6);
  const Allocation a = baseline_greedy_norm(arms, 6, 1.0);
  ASSERT_EQ(a.entries.size(), 6u);
  for (int l = 0; l < 6; ++l) {
    EXPECT_EQ(a.entries[l].arm, l);
    EXPECT_EQ(a.entries[l].count, 1);
  }
  EXPECT_THROW(baseline_greedy_norm(arms, 6, 0.0), DomainError);
}

TEST(Baselines, UniformReproducibleAndConserving) {
  const Allocation a = baseline_uniform(10, 500, 4);
  const Allocation b = baseline_uniform(10, 500, 4);
  ASSERT_EQ(a.entries.size(), b.entries.size());
  int total = 0;
  for (std::size_t k = 0; k < a.entries.size(); ++k) {
    EXPECT_EQ(a.entries[k].arm, b.entries[k].arm);
    EXPECT_EQ(a.entries[k].count, b.entries[k].count);
    total += a.entries[k].count;
  }
  EXPECT_EQ(total, 500);
  EXPECT_EQ(a.effective_t, 500);
  EXPECT_THROW(baseline_uniform(0, 5, 1), SpanDeficient);
}

TEST(Algorithms, NameRoundTrip) {
  for (Algorithm a : {Algorithm::kOdpo, Algorithm::kUniform, Algorithm::kGreedy}) {
    EXPECT_EQ(parse_algorithm(to_string(a)), a);
  }
  EXPECT_THROW(parse_algorithm("thompson"), Error);
}

}  // namespace
}  // namespace odpo
