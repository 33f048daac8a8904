#include <gtest/gtest.h>

#include "odpo/evaluation.hpp"
#include "test_support.hpp"

namespace odpo {
namespace {

using testing::vec;

TEST(SimpleRegret, HandExamples) {
  const std::vector<ActionSet> sets = {{0, {vec({1.0, 0.0}), vec({0.0, 1.0})}}};
  const Vector theta = vec({0.8, 0.0});
  EXPECT_DOUBLE_EQ(simple_regret(theta, sets, Prediction{{1}, {}}), 0.8);
  EXPECT_DOUBLE_EQ(simple_regret(theta, sets, Prediction{{0}, {}}), 0.0);
  EXPECT_THROW(simple_regret(theta, sets, Prediction{{0, 1}, {}}), DimensionMismatch);
}

TEST(SimpleRegret, MatchesBruteForceMaximum) {
  Rng rng(1);
  for (int rep = 0; rep < 50; ++rep) {
    const Instance inst = make_random_instance(6, 4, 3, 500 + rep);
    Prediction p;
    for (int n = 0; n < 6; ++n) p.chosen.push_back(static_cast<int>(rng.below(4)));
    double oracle = 0.0;
    for (int n = 0; n < 6; ++n) {
      const auto& arms = inst.action_sets()[n].arms;
      for (const auto& a : arms) {
        oracle = std::max(oracle, inst.theta_star().dot(a - arms[p.chosen[n]]));
      }
    }
    EXPECT_NEAR(simple_regret(inst, p), oracle, 1e-15);
    EXPECT_GE(simple_regret(inst, p), 0.0);
    EXPECT_LE(simple_regret(inst, p), 2.0);
  }
}

TEST(Bounds, ExpectedBoundIndependentReevaluation) {
  const double d = 5, t = 1e4;
  const double oracle = 30 * (d + 2) / std::sqrt(t) *
                            std::sqrt(std::log((4 * t + 1) / std::pow(d, 1 - 1 / d))) +
                        31 / std::sqrt(t);
  EXPECT_NEAR(corollary_expected_bound(5, 1e4), oracle, 1e-12);
}

TEST(Bounds, HighProbabilityBoundIndependentReevaluation) {
  const double d = 4, t = 400, delta = 0.05;
  const double inner = 2 * std::log(1 / delta) + d * std::log((1 + 4 * t) / std::pow(d, 1 - 1 / d));
  const double oracle = 30 * std::sqrt(d / t) * (std::sqrt(inner) + 1 / std::sqrt(d));
  EXPECT_NEAR(corollary_hp_bound(4, 400, 0.05), oracle, 1e-12);
  const CorollaryBound both = corollary_bound(4, 400, 0.05);
  EXPECT_EQ(both.high_probability, corollary_hp_bound(4, 400, 0.05));
  EXPECT_EQ(both.expected, corollary_expected_bound(4, 400));
}

TEST(Bounds, GeneralBoundSpecializesAtDefaults) {
  for (int d : {1, 2, 4, 8, 16}) {
    for (double t : {16.0, 100.0, 1e4}) {
      EXPECT_NEAR(theorem1_bound(d, t, 0.5, 1.0 / d, 0.05), corollary_hp_bound(d, t, 0.05),
                  1e-10 * corollary_hp_bound(d, t, 0.05));
    }
  }
}

TEST(Bounds, DecreaseInHorizon) {
  for (int d : {2, 4, 8}) {
    double prev_hp = 1e300, prev_exp = 1e300, prev_floor = 1e300;
    for (double t = d * d; t <= 1e6; t *= 1.5) {
      const double hp = corollary_hp_bound(d, t, 0.05);
      const double ex = corollary_expected_bound(d, t);
      const double fl = hypercube_regret_floor(d, t);
      EXPECT_LT(hp, prev_hp);
      EXPECT_LT(ex, prev_exp);
      EXPECT_LT(fl, prev_floor);
      EXPECT_LT(fl, ex);
      prev_hp = hp;
      prev_exp = ex;
      prev_floor = fl;
    }
  }
}

TEST(Bounds, HypercubeFloorAndExpectedDelta) {
  EXPECT_NEAR(hypercube_regret_floor(16, 256), std::exp(-5.0) / 4.0, 1e-15);
  EXPECT_NEAR(hypercube_regret_floor(16, 256), 0.0016844867497713668, 1e-15);
  EXPECT_NEAR(corollary_expected_delta(4, 100), std::pow(4.0, 0.75) / 401.0, 1e-15);
}

TEST(Bounds, DomainErrors) {
  EXPECT_THROW(theorem1_bound(0, 10, 0.5, 0.1, 0.05), DomainError);
  EXPECT_THROW(theorem1_bound(2, 0, 0.5, 0.1, 0.05), DomainError);
  EXPECT_THROW(theorem1_bound(2, 10, 0.5, 0.1, 1.0), DomainError);
  EXPECT_THROW(corollary_hp_bound(2, 10, 0.0), DomainError);
  EXPECT_THROW(hypercube_regret_floor(2, 0), DomainError);
}

TEST(Divergences, HandValues) {
  EXPECT_EQ(kl_bernoulli(0.5, 0.5), 0.0);
  EXPECT_EQ(chi2_bernoulli(0.5, 0.5), 0.0);
  EXPECT_NEAR(chi2_bernoulli(0.3, 0.6), 0.375, 1e-15);
  EXPECT_NEAR(kl_bernoulli(0.0, 0.5), std::log(2.0), 1e-15);
  EXPECT_NEAR(kl_bernoulli(1.0, 0.25), std::log(4.0), 1e-15);
  EXPECT_NEAR(kl_bernoulli(0.2, 0.4),
              0.2 * std::log(0.5) + 0.8 * std::log(0.8 / 0.6), 1e-15);
  EXPECT_NEAR(bretagnolle_huber_rhs(0.0), 0.5, 1e-15);
  EXPECT_NEAR(bretagnolle_huber_rhs(5.0), std::exp(-5.0) / 2.0, 1e-18);
}

TEST(Divergences, DomainErrors) {
  EXPECT_THROW(kl_bernoulli(-0.1, 0.5), DomainError);
  EXPECT_THROW(kl_bernoulli(0.5, 1.5), DomainError);
  EXPECT_THROW(kl_bernoulli(0.5, 0.0), DomainError);
  EXPECT_THROW(chi2_bernoulli(0.5, 1.0), DomainError);
  EXPECT_NO_THROW(kl_bernoulli(1.0, 1.0));
}

TEST(Divergences, ChainOnGrid) {
  int violations = 0;
  for (int i = 1; i < 100; ++i) {
    for (int j = 1; j < 100; ++j) {
      const double p = i / 100.0, q = j / 100.0;
      const double kl = kl_bernoulli(p, q);
      const double chi2 = chi2_bernoulli(p, q);
      violations += kl > std::log1p(chi2) + 1e-12;
      violations += std::log1p(chi2) > chi2 + 1e-12;
      violations += kl < -1e-12;
    }
  }
  EXPECT_EQ(violations, 0);
}

}  // namespace
}  // namespace odpo
