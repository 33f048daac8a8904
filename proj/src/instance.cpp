#include "odpo/instance.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <set>

#include <fmt/format.h>

namespace odpo {

namespace {

void check_in_ball(const Vector& v, const std::string& label) {
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (!std::isfinite(v[k])) {
      throw NormViolation(fmt::format("{} has a non-finite coordinate", label),
                          std::numeric_limits<double>::quiet_NaN());
    }
  }
  const double norm = v.norm();
  if (norm > 1.0 + kNormTolerance) {
    throw NormViolation(
        fmt::format("{} has Euclidean norm {:.12g} > 1", label, norm), norm);
  }
}

bool is_zero(const Vector& v) {
  return (v.array() == 0.0).all();
}

std::vector<double> key_of(const Vector& v) {
  return {v.data(), v.data() + v.size()};
}

bool is_power_of_two(int x) { return x > 0 && (x & (x - 1)) == 0; }

}  // namespace

Instance build_instance(std::vector<ActionSet> action_sets, Vector theta_star) {
  const auto d = static_cast<int>(theta_star.size());
  if (d < 1) throw DimensionMismatch("theta* must have dimension >= 1");
  check_in_ball(theta_star, "theta*");

  Instance inst;
  std::set<std::vector<double>> seen;
  for (std::size_t n = 0; n < action_sets.size(); ++n) {
    const auto& arms = action_sets[n].arms;
    if (arms.empty()) {
      throw DimensionMismatch(fmt::format("action set {} is empty", n));
    }
    for (std::size_t i = 0; i < arms.size(); ++i) {
      if (arms[i].size() != d) {
        throw DimensionMismatch(fmt::format(
            "arm {} of action set {} has dimension {}, expected {}", i, n,
            arms[i].size(), d));
      }
      check_in_ball(arms[i], fmt::format("arm {} of action set {}", i, n));
    }
    inst.max_arms_ = std::max(inst.max_arms_, static_cast<int>(arms.size()));
    for (std::size_t i = 0; i < arms.size(); ++i) {
      for (std::size_t j = 0; j < arms.size(); ++j) {
        if (i == j) continue;
        Vector b = arms[i] - arms[j];
        if (is_zero(b)) continue;
        if (!seen.insert(key_of(b)).second) continue;
        inst.diff_arms_.push_back(
            {std::move(b),
             {static_cast<int>(n), static_cast<int>(i), static_cast<int>(j)}});
      }
    }
  }
  inst.action_sets_ = std::move(action_sets);
  inst.theta_star_ = std::move(theta_star);
  inst.dimension_ = d;
  inst.spans_ = spans_space(inst.diff_arms_, d);
  return inst;
}

std::vector<DifferenceArm> difference_arms(const ActionSet& set) {
  std::vector<DifferenceArm> out;
  std::set<std::vector<double>> seen;
  const auto& arms = set.arms;
  for (std::size_t i = 0; i < arms.size(); ++i) {
    for (std::size_t j = 0; j < arms.size(); ++j) {
      if (i == j) continue;
      Vector b = arms[i] - arms[j];
      if (is_zero(b) || !seen.insert(key_of(b)).second) continue;
      out.push_back({std::move(b),
                     {set.context_id, static_cast<int>(i), static_cast<int>(j)}});
    }
  }
  return out;
}

bool spans_space(std::span<const DifferenceArm> arms, int dimension) {
  if (arms.empty() || dimension < 1) return false;
  Matrix gram = Matrix::Zero(dimension, dimension);
  for (const auto& b : arms) gram.selfadjointView<Eigen::Lower>().rankUpdate(b.vector);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram.selfadjointView<Eigen::Lower>());
  const Vector& ev = eig.eigenvalues();
  const double top = ev[dimension - 1];
  return top > 0.0 && ev[0] > 1e-10 * top;
}

Vector sample_unit_ball(int dimension, Rng& rng) {
  Vector dir(dimension);
  double norm = 0.0;
  do {
    for (int k = 0; k < dimension; ++k) dir[k] = rng.normal();
    norm = dir.norm();
  } while (norm == 0.0);
  const double radius = std::pow(rng.uniform(), 1.0 / dimension);
  return dir * (radius / norm);
}

Instance make_random_instance(int num_contexts, int arms_per_context,
                              int dimension, std::uint64_t seed) {
  if (num_contexts < 1 || arms_per_context < 1 || dimension < 1) {
    throw DimensionMismatch("random instance needs N, K, d >= 1");
  }
  Rng rng(seed);
  std::vector<ActionSet> sets(num_contexts);
  for (int n = 0; n < num_contexts; ++n) {
    sets[n].context_id = n;
    sets[n].arms.reserve(arms_per_context);
    for (int k = 0; k < arms_per_context; ++k) {
      sets[n].arms.push_back(sample_unit_ball(dimension, rng));
    }
  }
  Vector theta = sample_unit_ball(dimension, rng);
  return build_instance(std::move(sets), std::move(theta));
}

Instance make_anisotropic_instance(int num_contexts, int dimension,
                                   std::uint64_t seed) {
  if (num_contexts < 2 || dimension < 2) {
    throw DimensionMismatch("anisotropic instance needs N >= 2 and d >= 2");
  }
  Rng rng(seed);
  const int sub = dimension - 1;
  std::vector<ActionSet> sets(num_contexts);
  for (int n = 0; n + 1 < num_contexts; ++n) {
    sets[n].context_id = n;
    for (int k = 0; k < 2; ++k) {
      Vector a = Vector::Zero(dimension);
      a.head(sub) = sample_unit_ball(sub, rng);
      sets[n].arms.push_back(std::move(a));
    }
  }
  ActionSet& rare = sets.back();
  rare.context_id = num_contexts - 1;
  rare.arms = {-0.9 * Vector::Unit(dimension, sub),
               0.9 * Vector::Unit(dimension, sub)};

  Vector theta = Vector::Zero(dimension);
  theta.head(sub) = 0.5 * sample_unit_ball(sub, rng);
  theta[sub] = 0.8;
  return build_instance(std::move(sets), std::move(theta));
}

OnlineLowerBoundFamily make_online_lower_bound_instance(int horizon) {
  if (horizon < 2) throw DomainError("online construction needs T >= 2");
  const Vector e1 = Vector::Unit(2, 0);
  const Vector e2 = Vector::Unit(2, 1);
  OnlineLowerBoundFamily family;
  family.action_sets.resize(horizon);
  for (int t = 0; t < horizon; ++t) {
    const Vector& e = (t + 1 < horizon) ? e1 : e2;
    family.action_sets[t] = {t, {e, -e}};
  }
  family.theta = e2;
  family.theta_prime = -e2;
  return family;
}

HypercubeFamily::HypercubeFamily(int dimension, int horizon)
    : dimension_(dimension), horizon_(horizon) {
  if (dimension < 1 || dimension > kMaxDimension) {
    throw DimensionMismatch(
        fmt::format("hypercube dimension must be in [1, {}]", kMaxDimension));
  }
  if (horizon < 1) throw InvalidScale("hypercube horizon must be >= 1");
  scale_ = std::sqrt(static_cast<double>(dimension) / horizon);
  if (scale_ > 1.0) {
    throw InvalidScale(fmt::format(
        "sqrt(d/T) = {:.6g} > 1 puts theta outside the unit ball", scale_));
  }
}

Vector HypercubeFamily::theta(std::uint64_t mask) const {
  Vector v(dimension_);
  for (int i = 0; i < dimension_; ++i) v[i] = ((mask >> i) & 1U) ? scale_ : -scale_;
  return v;
}

Vector HypercubeFamily::vertex(std::uint64_t mask) const {
  const double c = 1.0 / std::sqrt(static_cast<double>(dimension_));
  Vector v(dimension_);
  for (int i = 0; i < dimension_; ++i) v[i] = ((mask >> i) & 1U) ? c : -c;
  return v;
}

std::uint64_t HypercubeFamily::random_mask(Rng& rng) const {
  return rng.next_u64() & full_mask();
}

std::uint64_t HypercubeFamily::best_vertex(const Vector& theta) const {
  std::uint64_t mask = 0;
  for (int i = 0; i < dimension_; ++i) {
    if (theta[i] >= 0.0) mask |= std::uint64_t{1} << i;
  }
  return mask;
}

double HypercubeFamily::regret(const Vector& theta,
                               std::uint64_t chosen) const {
  const double c = 1.0 / std::sqrt(static_cast<double>(dimension_));
  double r = 0.0;
  for (int i = 0; i < dimension_; ++i) {
    const double s = ((chosen >> i) & 1U) ? 1.0 : -1.0;
    r += (std::abs(theta[i]) - s * theta[i]) * c;
  }
  return r;
}

std::vector<DifferenceArm> HypercubeFamily::difference_pool() const {
  std::vector<DifferenceArm> pool;
  const std::uint64_t full = full_mask();
  if (dimension_ <= 12) {
    pool.reserve(num_parameters());
    for (std::uint64_t m = 0; m <= full; ++m) {
      const std::uint64_t anti = ~m & full;
      pool.push_back({vertex(m) - vertex(anti),
                      {0, static_cast<int>(m), static_cast<int>(anti)}});
    }
    return pool;
  }
  if (!is_power_of_two(dimension_)) {
    throw Error(fmt::format(
        "no hypercube difference pool for d = {} (needs d <= 12 or a power "
        "of two)",
        dimension_));
  }
  // Sylvester construction: H[r][c] = (-1)^{popcount(r & c)}.
  for (int sign = 1; sign >= -1; sign -= 2) {
    for (int r = 0; r < dimension_; ++r) {
      std::uint64_t m = 0;
      for (int c = 0; c < dimension_; ++c) {
        const bool plus = (std::popcount(static_cast<unsigned>(r & c)) % 2 == 0) == (sign > 0);
        if (plus) m |= std::uint64_t{1} << c;
      }
      const std::uint64_t anti = ~m & full;
      // Mask indices do not fit in int for d > 31; origin records the row.
      pool.push_back({vertex(m) - vertex(anti), {0, r, sign > 0 ? 0 : 1}});
    }
  }
  return pool;
}

}  // namespace odpo
