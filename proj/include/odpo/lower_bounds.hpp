#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "odpo/instance.hpp"
#include "odpo/pipeline.hpp"

namespace odpo {

// Sequential learner for changing action sets. At each step it picks one
// duel from the current set's difference arms and is then shown the
// outcome. The final estimate (projected MLE on everything observed) and
// the prediction are computed by the driver, so learners differ only in
// how they select duels.
class OnlineLearner {
 public:
  virtual ~OnlineLearner() = default;
  virtual std::string name() const = 0;
  virtual void reset(int dimension) = 0;
  // Index into `pool`.
  virtual int choose(std::span<const DifferenceArm> pool, Rng& rng) = 0;
  virtual void observe(const Vector& b, int outcome) = 0;
};

// kOdpo: optimal design over the step's pool, one duel drawn from it.
// kUniform: uniform over the pool. kGreedy: argmax |b|_{V^{-1}}, V updated
// with every duel played.
std::unique_ptr<OnlineLearner> make_online_learner(Algorithm algorithm,
                                                   const OdpoConfig& config);

// sum_t max_{b in B_t} KL(Ber(sigma(<theta, b>)) || Ber(sigma(<theta', b>))).
// Only the final set contributes in the e1/e2 construction.
double online_kl_constant(const OnlineLowerBoundFamily& family);

struct HorizonFloor {
  int horizon = 0;
  double kl_constant = 0.0;
  double floor = 0.0;
};

struct OnlineLowerBoundReport {
  int horizon = 0;
  int replicas = 0;
  std::string algorithm;
  double kl_constant = 0.0;
  double floor = 0.0;  // exp(-c) / 2
  double p_err_theta = 0.0;
  double p_err_theta_prime = 0.0;
  double p_err_sum = 0.0;
  double std_error = 0.0;  // of p_err_sum
  double mean_regret_theta = 0.0;
  double mean_regret_theta_prime = 0.0;
  std::vector<HorizonFloor> floors_by_horizon;
  // p_err_sum >= floor - 3 SE.
  bool floor_holds = false;
  // Every entry of floors_by_horizon has the same floor.
  bool floor_horizon_independent = false;
};

OnlineLowerBoundReport verify_online_lower_bound(int horizon, Algorithm algorithm,
                                                 int replicas, std::uint64_t seed,
                                                 const OdpoConfig& config = {});

struct CoordinateReport {
  int coordinate = 0;
  double error_rate = 0.0;  // p(theta, i), averaged over theta
  double pair_sum = 0.0;    // averaged p(theta, i) + p(theta^(i), i) = 2 p
  double pair_std_error = 0.0;
  double max_kl = 0.0;  // over replicas, for the realized allocation
};

struct HypercubeLowerBoundReport {
  int dimension = 0;
  int horizon = 0;
  int replicas = 0;
  std::string algorithm;
  int effective_t = 0;  // largest realized sample count over replicas
  double mean_regret = 0.0;
  double std_error = 0.0;
  double floor = 0.0;                     // d e^{-5} / (4 sqrt(T))
  double corollary_expected = 0.0;        // at effective_t
  double corollary_high_probability = 0.0;  // at effective_t, config.delta
  double pair_floor = 0.0;                // e^{-5} / 2
  double kl_limit = 0.0;                  // 5 effective_t / T
  std::vector<CoordinateReport> coordinates;
  bool desk_scale = false;  // d < 16: outside the formal regime
  bool regret_above_floor = false;
  bool regret_below_corollary = false;
  bool pair_floor_holds = false;
  bool kl_within_limit = false;
};

// Draws theta uniformly from {+-sqrt(d/T)}^d per replica, allocates over the
// antipodal difference pool, fits the projected MLE and plays the sign
// vertex. For kOdpo and kGreedy the allocation does not depend on theta and
// is computed once. Throws InvalidScale when sqrt(d/T) > 1.
HypercubeLowerBoundReport verify_hypercube_lower_bound(int dimension, int horizon,
                                                       Algorithm algorithm,
                                                       int replicas,
                                                       std::uint64_t seed,
                                                       const OdpoConfig& config = {});

}  // namespace odpo
