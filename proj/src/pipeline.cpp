#include "odpo/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/format.h>

namespace odpo {

Allocation allocate(const Design& design, int horizon) {
  if (horizon < 1) throw DomainError("T must be >= 1");
  Allocation alloc;
  alloc.requested_t = horizon;
  for (const auto& atom : design.support) {
    if (atom.weight <= 0.0) continue;
    const double raw = std::ceil(horizon * atom.weight - 1e-9);
    const int count = std::max(1, static_cast<int>(raw));
    alloc.entries.push_back({atom.arm, count});
    alloc.effective_t += count;
  }
  return alloc;
}

Prediction predict(const Vector& theta, std::span<const ActionSet> action_sets) {
  Prediction p;
  p.chosen.reserve(action_sets.size());
  p.scores.reserve(action_sets.size());
  for (const auto& set : action_sets) {
    int best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < set.arms.size(); ++k) {
      if (set.arms[k].size() != theta.size()) {
        throw DimensionMismatch("prediction parameter and arms differ in dimension");
      }
      const double s = theta.dot(set.arms[k]);
      if (s > best_score) {
        best_score = s;
        best = static_cast<int>(k);
      }
    }
    p.chosen.push_back(best);
    p.scores.push_back(best_score);
  }
  return p;
}

Prediction predict(const Vector& theta, const Instance& instance) {
  return predict(theta, instance.action_sets());
}

AllocationFit fit_allocation(const Vector& theta_star,
                             std::span<const DifferenceArm> arms,
                             const Allocation& allocation, double lambda_est,
                             double delta, Rng& rng) {
  AllocationFit fit;
  fit.samples = collect_feedback(theta_star, arms, allocation.entries, rng);
  const auto d = static_cast<int>(theta_star.size());
  const Dataset data = make_dataset(arms, fit.samples, d);
  fit.estimate = estimate(data, lambda_est, delta);
  return fit;
}

OdpoRun run_odpo(const Instance& instance, int horizon, const OdpoConfig& config) {
  return run_odpo(instance, horizon, config,
                  frank_wolfe_design(instance.diff_arms(), config.design_options()));
}

OdpoRun run_odpo(const Instance& instance, int horizon, const OdpoConfig& config,
                 const FrankWolfeResult& design) {
  const int d = instance.dimension();
  OdpoRun run;
  run.design = design;
  if (design.span_deficient) {
    run.warnings.push_back(
        "SpanDeficient: difference arms do not span R^d; the design ridge "
        "dominates the missing directions");
  }
  if (!design.converged()) {
    run.warnings.push_back(fmt::format(
        "MaxIters: design stopped at g = {:.6g} above threshold {:.6g}",
        design.final_g, design.threshold));
  }
  if (horizon < d * (d + 1) / 2) {
    run.warnings.push_back(fmt::format(
        "T = {} is below d(d+1)/2 = {}; the upper bound does not apply",
        horizon, d * (d + 1) / 2));
  }
  run.allocation = allocate(design.design, horizon);
  Rng rng(config.seed);
  AllocationFit fit = fit_allocation(instance.theta_star(), instance.diff_arms(),
                                     run.allocation, config.estimation_lambda(d),
                                     config.delta, rng);
  run.samples = std::move(fit.samples);
  run.estimate = std::move(fit.estimate);
  run.prediction = predict(run.estimate.theta_hat_projected, instance);
  return run;
}

Allocation baseline_uniform(std::size_t num_arms, int horizon, std::uint64_t seed) {
  if (horizon < 1) throw DomainError("T must be >= 1");
  if (num_arms == 0) throw SpanDeficient("no difference arms to sample");
  Rng rng(seed);
  std::map<int, int> counts;
  for (int t = 0; t < horizon; ++t) ++counts[static_cast<int>(rng.below(num_arms))];
  Allocation alloc;
  alloc.requested_t = horizon;
  alloc.effective_t = horizon;
  for (const auto& [arm, count] : counts) alloc.entries.push_back({arm, count});
  return alloc;
}

Allocation baseline_greedy_norm(std::span<const DifferenceArm> arms,
                                int horizon, double lambda) {
  if (horizon < 1) throw DomainError("T must be >= 1");
  if (!(lambda > 0.0)) throw DomainError("greedy baseline needs lambda > 0");
  if (arms.empty()) throw SpanDeficient("no difference arms to sample");
  const Matrix cols = stack_arms(arms);
  const auto d = cols.rows();
  Matrix v_inv = Matrix::Identity(d, d) / lambda;
  std::vector<int> counts(arms.size(), 0);
  for (int t = 0; t < horizon; ++t) {
    const Matrix y = v_inv * cols;
    const Vector norms = cols.cwiseProduct(y).colwise().sum().transpose();
    Eigen::Index best = 0;
    for (Eigen::Index l = 1; l < norms.size(); ++l) {
      if (norms[l] > norms[best]) best = l;
    }
    ++counts[static_cast<std::size_t>(best)];
    const Vector u = y.col(best);
    v_inv -= (u * u.transpose()) / (1.0 + norms[best]);
  }
  Allocation alloc;
  alloc.requested_t = horizon;
  alloc.effective_t = horizon;
  for (std::size_t l = 0; l < counts.size(); ++l) {
    if (counts[l] > 0) alloc.entries.push_back({static_cast<int>(l), counts[l]});
  }
  return alloc;
}

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kOdpo: return "odpo";
    case Algorithm::kUniform: return "uniform";
    case Algorithm::kGreedy: return "greedy";
  }
  return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "odpo") return Algorithm::kOdpo;
  if (name == "uniform") return Algorithm::kUniform;
  if (name == "greedy") return Algorithm::kGreedy;
  throw Error(fmt::format("unknown algorithm '{}' (expected odpo, uniform or greedy)", name));
}

}  // namespace odpo
