#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "odpo/design.hpp"
#include "odpo/estimator.hpp"
#include "odpo/instance.hpp"
#include "odpo/preference.hpp"

namespace odpo {

struct Allocation {
  std::vector<AllocationEntry> entries;  // sorted by arm index
  int requested_t = 0;
  int effective_t = 0;  // sum of counts
};

// Each supported arm gets ceil(T * weight) duels. A 1e-9 allowance absorbs
// representation error in T * weight before the ceiling.
Allocation allocate(const Design& design, int horizon);

// Per-context argmax of <theta, a>, lowest index on ties.
struct Prediction {
  std::vector<int> chosen;
  std::vector<double> scores;
};

Prediction predict(const Vector& theta, std::span<const ActionSet> action_sets);
Prediction predict(const Vector& theta, const Instance& instance);

struct OdpoConfig {
  double lambda_design = 1e-6;
  // Estimation ridge; 1/d when unset.
  std::optional<double> lambda_est;
  double epsilon = 0.5;
  double delta = 0.05;
  std::uint64_t seed = 0;
  int fw_max_iters = 5000;
  StopRule stop_rule = StopRule::kOnePlusEpsilon;
  DesignInit init = DesignInit::kGreedyVolume;

  double estimation_lambda(int dimension) const {
    return lambda_est ? *lambda_est : 1.0 / dimension;
  }
  FrankWolfeOptions design_options() const {
    return {lambda_design, epsilon, fw_max_iters, stop_rule, init};
  }
};

struct OdpoRun {
  FrankWolfeResult design;
  Allocation allocation;
  std::vector<PreferenceSample> samples;
  EstimatorResult estimate;
  Prediction prediction;
  std::vector<std::string> warnings;
};

// Design, ceil-rounded allocation, simulated labels, MLE, projected MLE and
// per-context prediction. Deterministic in (instance, T, config).
OdpoRun run_odpo(const Instance& instance, int horizon, const OdpoConfig& config);

// Same, reusing a design already computed for this instance with
// config.design_options(); the design does not depend on theta* or the seed.
OdpoRun run_odpo(const Instance& instance, int horizon, const OdpoConfig& config,
                 const FrankWolfeResult& design);

// T i.i.d. uniform draws from the arm list.
Allocation baseline_uniform(std::size_t num_arms, int horizon, std::uint64_t seed);

// T offline greedy picks of argmax |b|_{V^{-1}}, V <- V + b b^T after each.
Allocation baseline_greedy_norm(std::span<const DifferenceArm> arms,
                                int horizon, double lambda);

// Labels an allocation under theta* and fits the estimator.
struct AllocationFit {
  std::vector<PreferenceSample> samples;
  EstimatorResult estimate;
};

AllocationFit fit_allocation(const Vector& theta_star,
                             std::span<const DifferenceArm> arms,
                             const Allocation& allocation, double lambda_est,
                             double delta, Rng& rng);

enum class Algorithm { kOdpo, kUniform, kGreedy };

std::string to_string(Algorithm algorithm);
// Throws Error for unknown names.
Algorithm parse_algorithm(const std::string& name);

}  // namespace odpo
