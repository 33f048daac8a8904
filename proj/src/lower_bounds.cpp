#include "odpo/lower_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "odpo/design.hpp"
#include "odpo/evaluation.hpp"
#include "odpo/preference.hpp"

namespace odpo {

namespace {

class OdpoOnlineLearner final : public OnlineLearner {
 public:
  explicit OdpoOnlineLearner(FrankWolfeOptions options) : options_(options) {}
  std::string name() const override { return "odpo"; }
  void reset(int) override {}
  int choose(std::span<const DifferenceArm> pool, Rng& rng) override {
    const FrankWolfeResult fw = frank_wolfe_design(pool, options_);
    const double u = rng.uniform();
    double cumulative = 0.0;
    for (const auto& atom : fw.design.support) {
      cumulative += atom.weight;
      if (u < cumulative) return atom.arm;
    }
    return fw.design.support.back().arm;
  }
  void observe(const Vector&, int) override {}

 private:
  FrankWolfeOptions options_;
};

class UniformOnlineLearner final : public OnlineLearner {
 public:
  std::string name() const override { return "uniform"; }
  void reset(int) override {}
  int choose(std::span<const DifferenceArm> pool, Rng& rng) override {
    return static_cast<int>(rng.below(pool.size()));
  }
  void observe(const Vector&, int) override {}
};

class GreedyOnlineLearner final : public OnlineLearner {
 public:
  explicit GreedyOnlineLearner(std::optional<double> lambda) : lambda_(lambda) {}
  std::string name() const override { return "greedy"; }
  void reset(int dimension) override {
    const double lambda = lambda_ ? *lambda_ : 1.0 / dimension;
    v_ = lambda * Matrix::Identity(dimension, dimension);
  }
  int choose(std::span<const DifferenceArm> pool, Rng&) override {
    const Eigen::LLT<Matrix> llt(v_);
    int best = 0;
    double best_norm = -1.0;
    for (std::size_t k = 0; k < pool.size(); ++k) {
      const double n = pool[k].vector.dot(llt.solve(pool[k].vector));
      if (n > best_norm) {
        best_norm = n;
        best = static_cast<int>(k);
      }
    }
    return best;
  }
  void observe(const Vector& b, int) override { v_.noalias() += b * b.transpose(); }

 private:
  std::optional<double> lambda_;
  Matrix v_;
};

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

double std_error_of(const std::vector<double>& xs) {
  const auto n = xs.size();
  if (n < 2) return 0.0;
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
}

double bernoulli_std_error(double p, int n) {
  return n > 0 ? std::sqrt(p * (1.0 - p) / n) : 0.0;
}

}  // namespace

std::unique_ptr<OnlineLearner> make_online_learner(Algorithm algorithm,
                                                   const OdpoConfig& config) {
  switch (algorithm) {
    case Algorithm::kOdpo:
      return std::make_unique<OdpoOnlineLearner>(config.design_options());
    case Algorithm::kUniform:
      return std::make_unique<UniformOnlineLearner>();
    case Algorithm::kGreedy:
      return std::make_unique<GreedyOnlineLearner>(config.lambda_est);
  }
  throw Error("unknown algorithm");
}

double online_kl_constant(const OnlineLowerBoundFamily& family) {
  double c = 0.0;
  for (const auto& set : family.action_sets) {
    double best = 0.0;
    for (const auto& b : difference_arms(set)) {
      best = std::max(best, kl_bernoulli(sigmoid(family.theta.dot(b.vector)),
                                         sigmoid(family.theta_prime.dot(b.vector))));
    }
    c += best;
  }
  return c;
}

OnlineLowerBoundReport verify_online_lower_bound(int horizon, Algorithm algorithm,
                                                 int replicas, std::uint64_t seed,
                                                 const OdpoConfig& config) {
  if (replicas < 1) throw DomainError("replicas must be >= 1");
  const OnlineLowerBoundFamily family = make_online_lower_bound_instance(horizon);
  const int d = 2;
  std::vector<std::vector<DifferenceArm>> pools;
  pools.reserve(family.action_sets.size());
  for (const auto& set : family.action_sets) pools.push_back(difference_arms(set));

  OnlineLowerBoundReport report;
  report.horizon = horizon;
  report.replicas = replicas;
  report.algorithm = to_string(algorithm);
  report.kl_constant = online_kl_constant(family);
  report.floor = bretagnolle_huber_rhs(report.kl_constant);

  auto learner = make_online_learner(algorithm, config);
  const std::vector<Vector> environments = {family.theta, family.theta_prime};
  const ActionSet& last = family.action_sets.back();
  double p_err[2] = {0.0, 0.0};
  double mean_regret[2] = {0.0, 0.0};
  for (std::size_t env = 0; env < environments.size(); ++env) {
    const Vector& theta = environments[env];
    int mistakes = 0;
    double regret_sum = 0.0;
    for (int r = 0; r < replicas; ++r) {
      Rng rng(derive_seed(seed, {env, static_cast<std::uint64_t>(r)}));
      learner->reset(d);
      Dataset data;
      data.arms.resize(horizon, d);
      data.outcomes.resize(horizon);
      for (int t = 0; t < horizon; ++t) {
        const auto& pool = pools[static_cast<std::size_t>(t)];
        const Vector& b = pool.at(static_cast<std::size_t>(learner->choose(pool, rng))).vector;
        const int y = sample_outcome(theta, b, rng);
        learner->observe(b, y);
        data.arms.row(t) = b.transpose();
        data.outcomes[t] = y;
      }
      const EstimatorResult est =
          estimate(data, config.estimation_lambda(d), config.delta);
      const Prediction pred = predict(est.theta_hat_projected, family.action_sets);
      regret_sum += simple_regret(theta, family.action_sets, pred);
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& a : last.arms) best = std::max(best, theta.dot(a));
      if (theta.dot(last.arms[static_cast<std::size_t>(pred.chosen.back())]) < best) {
        ++mistakes;
      }
    }
    p_err[env] = static_cast<double>(mistakes) / replicas;
    mean_regret[env] = regret_sum / replicas;
  }
  report.p_err_theta = p_err[0];
  report.p_err_theta_prime = p_err[1];
  report.p_err_sum = p_err[0] + p_err[1];
  report.std_error = std::hypot(bernoulli_std_error(p_err[0], replicas),
                                bernoulli_std_error(p_err[1], replicas));
  report.mean_regret_theta = mean_regret[0];
  report.mean_regret_theta_prime = mean_regret[1];
  report.floor_holds = report.p_err_sum >= report.floor - 3.0 * report.std_error;

  std::set<int> horizons = {2, horizon, 2 * horizon, 10 * horizon};
  report.floor_horizon_independent = true;
  for (int h : horizons) {
    const double c = online_kl_constant(make_online_lower_bound_instance(h));
    const double f = bretagnolle_huber_rhs(c);
    report.floors_by_horizon.push_back({h, c, f});
    if (std::abs(f - report.floor) > 1e-15) report.floor_horizon_independent = false;
  }
  return report;
}

HypercubeLowerBoundReport verify_hypercube_lower_bound(int dimension, int horizon,
                                                       Algorithm algorithm,
                                                       int replicas,
                                                       std::uint64_t seed,
                                                       const OdpoConfig& config) {
  if (replicas < 1) throw DomainError("replicas must be >= 1");
  const HypercubeFamily family(dimension, horizon);
  const std::vector<DifferenceArm> pool = family.difference_pool();
  const double lambda_est = config.estimation_lambda(dimension);

  std::optional<Allocation> shared;
  if (algorithm == Algorithm::kOdpo) {
    const FrankWolfeResult fw = frank_wolfe_design(pool, config.design_options());
    shared = allocate(fw.design, horizon);
  } else if (algorithm == Algorithm::kGreedy) {
    shared = baseline_greedy_norm(pool, horizon, lambda_est);
  }

  HypercubeLowerBoundReport report;
  report.dimension = dimension;
  report.horizon = horizon;
  report.replicas = replicas;
  report.algorithm = to_string(algorithm);
  report.floor = hypercube_regret_floor(dimension, horizon);
  report.pair_floor = bretagnolle_huber_rhs(5.0);
  report.kl_limit = 5.0;
  report.desk_scale = dimension < 16;

  std::vector<double> regrets;
  regrets.reserve(static_cast<std::size_t>(replicas));
  std::vector<int> errors(static_cast<std::size_t>(dimension), 0);
  std::vector<double> max_kl(static_cast<std::size_t>(dimension), 0.0);
  for (int r = 0; r < replicas; ++r) {
    const auto ur = static_cast<std::uint64_t>(r);
    const Allocation alloc =
        shared ? *shared : baseline_uniform(pool.size(), horizon, derive_seed(seed, {ur, 1}));
    report.effective_t = std::max(report.effective_t, alloc.effective_t);
    Rng rng(derive_seed(seed, {ur}));
    const std::uint64_t mask = family.random_mask(rng);
    const Vector theta = family.theta(mask);
    const AllocationFit fit =
        fit_allocation(theta, pool, alloc, lambda_est, config.delta, rng);
    const std::uint64_t chosen = family.best_vertex(fit.estimate.theta_hat_projected);
    regrets.push_back(family.regret(theta, chosen));
    for (int i = 0; i < dimension; ++i) {
      if (((chosen ^ mask) >> i) & 1U) ++errors[static_cast<std::size_t>(i)];
      double kl = 0.0;
      for (const auto& e : alloc.entries) {
        const Vector& b = pool[static_cast<std::size_t>(e.arm)].vector;
        const double z = theta.dot(b);
        const double z_flip = z - 2.0 * theta[i] * b[i];
        kl += e.count * kl_bernoulli(sigmoid(z), sigmoid(z_flip));
      }
      max_kl[static_cast<std::size_t>(i)] = std::max(max_kl[static_cast<std::size_t>(i)], kl);
    }
  }

  report.mean_regret = mean_of(regrets);
  report.std_error = std_error_of(regrets);
  report.corollary_expected = corollary_expected_bound(dimension, report.effective_t);
  report.corollary_high_probability =
      corollary_hp_bound(dimension, report.effective_t, config.delta);
  report.regret_above_floor = report.mean_regret >= report.floor;
  report.regret_below_corollary = report.mean_regret <= report.corollary_expected;
  report.pair_floor_holds = true;
  report.kl_within_limit = true;
  for (int i = 0; i < dimension; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    CoordinateReport c;
    c.coordinate = i;
    c.error_rate = static_cast<double>(errors[ui]) / replicas;
    c.pair_sum = 2.0 * c.error_rate;
    c.pair_std_error = 2.0 * bernoulli_std_error(c.error_rate, replicas);
    c.max_kl = max_kl[ui];
    if (c.pair_sum < report.pair_floor - 3.0 * c.pair_std_error) report.pair_floor_holds = false;
    if (c.max_kl > report.kl_limit) report.kl_within_limit = false;
    report.coordinates.push_back(c);
  }
  return report;
}

}  // namespace odpo
