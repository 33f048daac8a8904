#pragma once

#include <span>
#include <vector>

#include "odpo/instance.hpp"
#include "odpo/rng.hpp"
#include "odpo/types.hpp"

namespace odpo {

// 1 / (1 + exp(-x)), branching on the sign so exp never overflows.
double sigmoid(double x);
double sigmoid_prime(double x);
// log(sigmoid(x)) without cancellation for large |x|.
double log_sigmoid(double x);

// One labeled duel: outcome = 1 when arms[first] beat arms[second] for the
// difference arm at index `arm`.
struct PreferenceSample {
  int arm = 0;
  int outcome = 0;
  int draw_index = 0;
};

// Y ~ Bernoulli(sigmoid(<theta*, b>)); consumes exactly one uniform draw.
int sample_outcome(const Vector& theta_star, const Vector& b, Rng& rng);

PreferenceSample sample_preference(const Vector& theta_star,
                                   std::span<const DifferenceArm> arms,
                                   int arm, int draw_index, Rng& rng);

struct AllocationEntry {
  int arm = 0;
  int count = 0;
};

// Emits sum(count) samples ordered by (entry order, repetition), draw
// indices 0, 1, ... in emission order.
std::vector<PreferenceSample> collect_feedback(
    const Vector& theta_star, std::span<const DifferenceArm> arms,
    std::span<const AllocationEntry> allocation, Rng& rng);

std::vector<PreferenceSample> collect_feedback(
    const Instance& instance, std::span<const AllocationEntry> allocation,
    Rng& rng);

}  // namespace odpo
