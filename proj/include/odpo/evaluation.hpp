#pragma once

#include <span>

#include "odpo/instance.hpp"
#include "odpo/pipeline.hpp"

namespace odpo {

// max_n max_a <theta, a - chosen_n>.
double simple_regret(const Vector& theta, std::span<const ActionSet> action_sets,
                     const Prediction& prediction);
double simple_regret(const Instance& instance, const Prediction& prediction);

// High-probability regret bound for a (1+eps)-approximate design:
// 20 (1+eps) sqrt(d/T) [sqrt(2 log(1/delta)
//   + d log(lambda^{1-1/d} + 4T/(d lambda^{1/d}))) + sqrt(lambda)].
double theorem1_bound(int dimension, double horizon, double epsilon,
                      double lambda, double delta);

// eps = 1/2 and lambda = 1/d:
// 30 sqrt(d/T) [sqrt(2 log(1/delta) + d log((1+4T)/d^{1-1/d})) + 1/sqrt(d)].
double corollary_hp_bound(int dimension, double horizon, double delta);

// 30 (d+2)/sqrt(T) sqrt(log((4T+1)/d^{1-1/d})) + 31/sqrt(T).
double corollary_expected_bound(int dimension, double horizon);

struct CorollaryBound {
  double high_probability = 0.0;
  double expected = 0.0;
};

CorollaryBound corollary_bound(int dimension, double horizon, double delta);

// delta = d^{1-1/d}/(4T+1), the choice behind the expected-regret form.
double corollary_expected_delta(int dimension, double horizon);

// d e^{-5} / (4 sqrt(T)): minimax floor of the hypercube construction.
double hypercube_regret_floor(int dimension, double horizon);

// KL(Ber(p) || Ber(q)) with 0 log 0 = 0. Throws DomainError for p outside
// [0,1], q outside [0,1], or q in {0,1} with p != q.
double kl_bernoulli(double p, double q);

// (p - q)^2 / (q (1 - q)). Same domain as kl_bernoulli.
double chi2_bernoulli(double p, double q);

// exp(-kl) / 2.
double bretagnolle_huber_rhs(double kl);

}  // namespace odpo
