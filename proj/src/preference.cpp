#include "odpo/preference.hpp"

#include <cmath>

#include <fmt/format.h>

namespace odpo {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double sigmoid_prime(double x) {
  const double s = sigmoid(x);
  return s * (1.0 - s);
}

double log_sigmoid(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

int sample_outcome(const Vector& theta_star, const Vector& b, Rng& rng) {
  return rng.uniform() < sigmoid(theta_star.dot(b)) ? 1 : 0;
}

PreferenceSample sample_preference(const Vector& theta_star,
                                   std::span<const DifferenceArm> arms,
                                   int arm, int draw_index, Rng& rng) {
  if (arm < 0 || static_cast<std::size_t>(arm) >= arms.size()) {
    throw Error(fmt::format("arm index {} out of range", arm));
  }
  return {arm, sample_outcome(theta_star, arms[arm].vector, rng), draw_index};
}

std::vector<PreferenceSample> collect_feedback(
    const Vector& theta_star, std::span<const DifferenceArm> arms,
    std::span<const AllocationEntry> allocation, Rng& rng) {
  std::size_t total = 0;
  for (const auto& e : allocation) {
    if (e.count < 1) throw Error("allocation counts must be >= 1");
    total += static_cast<std::size_t>(e.count);
  }
  std::vector<PreferenceSample> samples;
  samples.reserve(total);
  int t = 0;
  for (const auto& e : allocation) {
    for (int r = 0; r < e.count; ++r) {
      samples.push_back(sample_preference(theta_star, arms, e.arm, t++, rng));
    }
  }
  return samples;
}

std::vector<PreferenceSample> collect_feedback(
    const Instance& instance, std::span<const AllocationEntry> allocation,
    Rng& rng) {
  return collect_feedback(instance.theta_star(), instance.diff_arms(),
                          allocation, rng);
}

}  // namespace odpo
