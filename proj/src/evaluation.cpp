#include "odpo/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace odpo {

namespace {

void check_bound_args(int dimension, double horizon) {
  if (dimension < 1) throw DomainError("dimension must be >= 1");
  if (!(horizon > 0.0)) throw DomainError("T must be > 0");
}

double checked_sqrt(double x, const char* what) {
  if (!(x >= 0.0)) throw DomainError(fmt::format("{} is negative ({:.6g})", what, x));
  return std::sqrt(x);
}

double checked_log(double x, const char* what) {
  if (!(x > 0.0)) throw DomainError(fmt::format("{} is <= 0 ({:.6g})", what, x));
  return std::log(x);
}

void check_bernoulli_args(double p, double q) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError(fmt::format("p = {} outside [0, 1]", p));
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError(fmt::format("q = {} outside [0, 1]", q));
  if ((q == 0.0 || q == 1.0) && p != q) {
    throw DomainError(fmt::format("Ber({}) is not absolutely continuous w.r.t. Ber({})", p, q));
  }
}

}  // namespace

double simple_regret(const Vector& theta, std::span<const ActionSet> action_sets,
                     const Prediction& prediction) {
  if (prediction.chosen.size() != action_sets.size()) {
    throw DimensionMismatch("prediction does not cover every context");
  }
  double regret = 0.0;
  for (std::size_t n = 0; n < action_sets.size(); ++n) {
    const auto& arms = action_sets[n].arms;
    const double chosen = theta.dot(arms.at(static_cast<std::size_t>(prediction.chosen[n])));
    for (const auto& a : arms) regret = std::max(regret, theta.dot(a) - chosen);
  }
  return regret;
}

double simple_regret(const Instance& instance, const Prediction& prediction) {
  return simple_regret(instance.theta_star(), instance.action_sets(), prediction);
}

double theorem1_bound(int dimension, double horizon, double epsilon,
                      double lambda, double delta) {
  check_bound_args(dimension, horizon);
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
  if (!(lambda > 0.0)) throw DomainError("lambda must be > 0");
  const double d = dimension;
  const double arg =
      std::pow(lambda, 1.0 - 1.0 / d) + 4.0 * horizon / (d * std::pow(lambda, 1.0 / d));
  const double inner = 2.0 * std::log(1.0 / delta) + d * checked_log(arg, "log argument");
  return 20.0 * (1.0 + epsilon) * std::sqrt(d / horizon) *
         (checked_sqrt(inner, "square-root argument") + std::sqrt(lambda));
}

double corollary_hp_bound(int dimension, double horizon, double delta) {
  check_bound_args(dimension, horizon);
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
  const double d = dimension;
  const double arg = (1.0 + 4.0 * horizon) / std::pow(d, 1.0 - 1.0 / d);
  const double inner = 2.0 * std::log(1.0 / delta) + d * checked_log(arg, "log argument");
  return 30.0 * std::sqrt(d / horizon) *
         (checked_sqrt(inner, "square-root argument") + 1.0 / std::sqrt(d));
}

double corollary_expected_bound(int dimension, double horizon) {
  check_bound_args(dimension, horizon);
  const double d = dimension;
  const double arg = (4.0 * horizon + 1.0) / std::pow(d, 1.0 - 1.0 / d);
  const double root_t = std::sqrt(horizon);
  return 30.0 * (d + 2.0) / root_t *
             checked_sqrt(checked_log(arg, "log argument"), "square-root argument") +
         31.0 / root_t;
}

CorollaryBound corollary_bound(int dimension, double horizon, double delta) {
  return {corollary_hp_bound(dimension, horizon, delta),
          corollary_expected_bound(dimension, horizon)};
}

double corollary_expected_delta(int dimension, double horizon) {
  check_bound_args(dimension, horizon);
  const double d = dimension;
  return std::pow(d, 1.0 - 1.0 / d) / (4.0 * horizon + 1.0);
}

double hypercube_regret_floor(int dimension, double horizon) {
  check_bound_args(dimension, horizon);
  return dimension * std::exp(-5.0) / (4.0 * std::sqrt(horizon));
}

double kl_bernoulli(double p, double q) {
  check_bernoulli_args(p, q);
  if (p == q) return 0.0;
  double kl = 0.0;
  if (p > 0.0) kl += p * std::log(p / q);
  if (p < 1.0) kl += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
  return std::max(kl, 0.0);
}

double chi2_bernoulli(double p, double q) {
  check_bernoulli_args(p, q);
  if (p == q) return 0.0;
  return (p - q) * (p - q) / (q * (1.0 - q));
}

double bretagnolle_huber_rhs(double kl) {
  if (!(kl >= 0.0)) throw DomainError("KL divergence must be >= 0");
  return 0.5 * std::exp(-kl);
}

}  // namespace odpo
