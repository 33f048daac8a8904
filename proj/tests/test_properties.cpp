#include <gtest/gtest.h>

#include "odpo/evaluation.hpp"
#include "odpo/pipeline.hpp"
#include "test_support.hpp"

namespace odpo {
namespace {

// Random instance shapes: N in [1, 12], K in [2, 5], d in [1, 6].
struct InstanceGen {
  Rng rng;
  explicit InstanceGen(std::uint64_t seed) : rng(seed) {}

  int between(int lo, int hi) { return lo + static_cast<int>(rng.below(hi - lo + 1)); }

  Instance next() {
    const int n = between(1, 12), k = between(2, 5), d = between(1, 6);
    return make_random_instance(n, k, d, rng.next_u64());
  }

  Instance next_spanning() {
    for (;;) {
      Instance inst = next();
      if (inst.spans()) return inst;
    }
  }
};

constexpr int kCases = 100;

TEST(Property, DifferenceArmsWellFormed) {
  InstanceGen gen(1);
  for (int c = 0; c < kCases; ++c) {
    const Instance inst = gen.next();
    const int n = inst.num_contexts(), k = inst.max_arms();
    EXPECT_LE(static_cast<int>(inst.diff_arms().size()), n * k * (k - 1));
    for (const auto& b : inst.diff_arms()) {
      EXPECT_GT(b.vector.norm(), 0.0);
      EXPECT_LE(b.vector.norm(), 2.0 + 1e-12);
      EXPECT_NE(b.origin.first, b.origin.second);
    }
  }
}

TEST(Property, DesignIsDistributionWithCertificate) {
  InstanceGen gen(2);
  for (int c = 0; c < kCases; ++c) {
    const Instance inst = gen.next_spanning();
    FrankWolfeOptions opts;
    opts.epsilon = 0.1;
    const FrankWolfeResult res = frank_wolfe_design(inst.diff_arms(), opts);
    EXPECT_NO_THROW(res.design.validate(inst.diff_arms().size()));
    const int d = inst.dimension();
    EXPECT_TRUE(res.converged());
    EXPECT_LE(res.final_g, 1.1 * d + 1e-9);
    // Weak duality: no design beats d, up to the ridge contribution.
    const Matrix m = design_matrix_of(res.design, inst.diff_arms(), opts.lambda).matrix;
    EXPECT_GE(res.final_g, d - opts.lambda * m.inverse().trace() - 1e-9);
    for (std::size_t m_it = 1; m_it < res.logdet_trace.size(); ++m_it) {
      EXPECT_GE(res.logdet_trace[m_it], res.logdet_trace[m_it - 1] - 1e-12);
    }
  }
}

TEST(Property, AllocationOvershootBounded) {
  InstanceGen gen(3);
  for (int c = 0; c < kCases; ++c) {
    const Instance inst = gen.next_spanning();
    const FrankWolfeResult res = frank_wolfe_design(inst.diff_arms(), {});
    const int horizon = gen.between(1, 400);
    const Allocation a = allocate(res.design, horizon);
    EXPECT_GE(a.effective_t, horizon);
    EXPECT_LE(a.effective_t - horizon, static_cast<int>(res.design.support.size()));
    for (const auto& e : a.entries) EXPECT_GE(e.count, 1);
  }
}

TEST(Property, PipelineConservationAndRegretRange) {
  InstanceGen gen(4);
  for (int c = 0; c < kCases; ++c) {
    const Instance inst = gen.next_spanning();
    OdpoConfig cfg;
    cfg.seed = gen.rng.next_u64();
    const int horizon = gen.between(1, 200);
    const OdpoRun run = run_odpo(inst, horizon, cfg);
    EXPECT_EQ(static_cast<int>(run.samples.size()), run.allocation.effective_t);
    EXPECT_LE(run.estimate.theta_hat_projected.norm(), 1.0 + 1e-9);
    const double r = simple_regret(inst, run.prediction);
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, 2.0 + 1e-12);
    EXPECT_LE(run.estimate.diagnostics.grad_norm, 1e-8);
  }
}

TEST(Property, StationarityIdentityAtMle) {
  InstanceGen gen(5);
  for (int c = 0; c < kCases; ++c) {
    const Instance inst = gen.next_spanning();
    Rng rng(gen.rng.next_u64());
    const Allocation a = baseline_uniform(inst.diff_arms().size(), gen.between(1, 60),
                                          rng.next_u64());
    const double lambda = 1.0 / inst.dimension();
    const AllocationFit fit = fit_allocation(inst.theta_star(), inst.diff_arms(), a, lambda,
                                             0.05, rng);
    const Dataset data = make_dataset(inst.diff_arms(), fit.samples, inst.dimension());
    const Vector sum_yb = data.arms.transpose() * data.outcomes;
    EXPECT_LE((h_map(data, fit.estimate.theta_hat, lambda) - sum_yb).norm(), 1e-7);
  }
}

TEST(Property, PredictionScaleInvariant) {
  InstanceGen gen(6);
  for (int c = 0; c < kCases; ++c) {
    const Instance inst = gen.next();
    const Vector theta = sample_unit_ball(inst.dimension(), gen.rng);
    const double scale = 0.01 + 10.0 * gen.rng.uniform();
    EXPECT_EQ(predict(theta, inst).chosen, predict(scale * theta, inst).chosen);
    EXPECT_EQ(simple_regret(theta, inst.action_sets(), predict(theta, inst)), 0.0);
  }
}

TEST(Property, DivergencesNonNegative) {
  Rng rng(7);
  for (int c = 0; c < 10 * kCases; ++c) {
    const double p = rng.uniform(), q = 0.001 + 0.998 * rng.uniform();
    EXPECT_GE(kl_bernoulli(p, q), 0.0);
    EXPECT_GE(chi2_bernoulli(p, q), 0.0);
    EXPECT_EQ(kl_bernoulli(q, q), 0.0);
    EXPECT_LE(kl_bernoulli(p, q), std::log1p(chi2_bernoulli(p, q)) + 1e-12);
    EXPECT_LE(bretagnolle_huber_rhs(kl_bernoulli(p, q)), 0.5);
  }
}

TEST(Property, BoundsOrderedAndPositive) {
  Rng rng(8);
  for (int c = 0; c < kCases; ++c) {
    const int d = 1 + static_cast<int>(rng.below(32));
    const double t = d * d * (1.0 + 100.0 * rng.uniform());
    const double delta = 0.001 + 0.5 * rng.uniform();
    const double hp = corollary_hp_bound(d, t, delta);
    EXPECT_GT(hp, 0.0);
    EXPECT_GT(corollary_expected_bound(d, t), hypercube_regret_floor(d, t));
    EXPECT_GT(confidence_radius(t + 1, d, 1.0 / d, delta), confidence_radius(t, d, 1.0 / d, delta));
    EXPECT_LE(theorem1_bound(d, t, 0.1, 1.0 / d, delta), theorem1_bound(d, t, 0.5, 1.0 / d, delta));
  }
}

}  // namespace
}  // namespace odpo
