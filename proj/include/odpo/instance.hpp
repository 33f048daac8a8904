#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "odpo/rng.hpp"
#include "odpo/types.hpp"

namespace odpo {

// Slack allowed on the unit-ball constraint for arms and parameters, to
// absorb rounding in vectors such as (1/sqrt(d)) * ones.
inline constexpr double kNormTolerance = 1e-9;

// The K embedded completions of one prompt.
struct ActionSet {
  int context_id = 0;
  std::vector<Vector> arms;
};

// b = arms[first] - arms[second] inside action set `context`.
struct ArmOrigin {
  int context = 0;
  int first = 0;
  int second = 0;
};

struct DifferenceArm {
  Vector vector;
  ArmOrigin origin;
};

// Action sets, hidden parameter and the deduplicated difference-arm set B.
// Immutable once built; construct through build_instance().
class Instance {
 public:
  int dimension() const { return dimension_; }
  int num_contexts() const { return static_cast<int>(action_sets_.size()); }
  // Largest action-set size (K for rectangular instances).
  int max_arms() const { return max_arms_; }
  const std::vector<ActionSet>& action_sets() const { return action_sets_; }
  const Vector& theta_star() const { return theta_star_; }
  const std::vector<DifferenceArm>& diff_arms() const { return diff_arms_; }
  // Whether diff_arms spans R^d.
  bool spans() const { return spans_; }

 private:
  friend Instance build_instance(std::vector<ActionSet>, Vector);

  std::vector<ActionSet> action_sets_;
  Vector theta_star_;
  std::vector<DifferenceArm> diff_arms_;
  int dimension_ = 0;
  int max_arms_ = 0;
  bool spans_ = false;
};

// Enumerates a_n^i - a_n^j over i != j in every context, dropping zero
// vectors and exact duplicates (first occurrence kept, so both b and -b
// survive). Throws DimensionMismatch or NormViolation.
Instance build_instance(std::vector<ActionSet> action_sets, Vector theta_star);

// The same enumeration for a single action set, deduplicated within the set
// only; origins carry set.context_id.
std::vector<DifferenceArm> difference_arms(const ActionSet& set);

// True when the vectors span R^d (relative eigenvalue test on the Gram
// matrix).
bool spans_space(std::span<const DifferenceArm> arms, int dimension);

// Uniform draw from the closed unit ball: Gaussian direction, radius U^{1/d}.
Vector sample_unit_ball(int dimension, Rng& rng);

// N contexts of K arms, arms and theta* uniform in the unit ball.
Instance make_random_instance(int num_contexts, int arms_per_context,
                              int dimension, std::uint64_t seed);

// N - 1 contexts whose two arms live in span(e_1..e_{d-1}), plus a single
// context {-0.9 e_d, +0.9 e_d} carrying the only information about the last
// coordinate; theta* puts weight 0.8 on e_d. Uniform sampling rarely visits
// the informative pair. Requires N >= 2 and d >= 2.
Instance make_anisotropic_instance(int num_contexts, int dimension,
                                   std::uint64_t seed);

// Changing-action-set construction in R^2: A_1 = ... = A_{T-1} = {e1, -e1},
// A_T = {e2, -e2}, with candidate parameters theta = e2 and theta' = -e2.
struct OnlineLowerBoundFamily {
  std::vector<ActionSet> action_sets;
  Vector theta;
  Vector theta_prime;
};

OnlineLowerBoundFamily make_online_lower_bound_instance(int horizon);

// Hypercube construction: parameters Theta = {+-sqrt(d/T)}^d and action set
// the vertices {+-1/sqrt(d)}^d. Vertices and parameters are addressed by a
// sign mask (bit i set means coordinate i is positive), so nothing of size
// 2^d is materialized except the optional difference pool.
class HypercubeFamily {
 public:
  static constexpr int kMaxDimension = 32;

  // Throws InvalidScale when sqrt(d/T) > 1.
  HypercubeFamily(int dimension, int horizon);

  int dimension() const { return dimension_; }
  int horizon() const { return horizon_; }
  // |theta_i| = sqrt(d/T).
  double scale() const { return scale_; }
  std::uint64_t num_parameters() const { return std::uint64_t{1} << dimension_; }
  std::uint64_t full_mask() const { return num_parameters() - 1; }

  Vector theta(std::uint64_t mask) const;
  Vector vertex(std::uint64_t mask) const;
  std::uint64_t random_mask(Rng& rng) const;

  // Best vertex for `theta`: coordinatewise sign, zero counted as positive.
  std::uint64_t best_vertex(const Vector& theta) const;

  // <theta, best vertex - chosen vertex>, evaluated coordinatewise.
  double regret(const Vector& theta, std::uint64_t chosen) const;

  // Candidate duels: differences of antipodal vertices 2s/sqrt(d). All 2^d of
  // them for d <= 12; for larger d (power of two only) the rows of a
  // Sylvester-Hadamard matrix and their negatives, which already support an
  // exact optimal design. Throws Error otherwise.
  std::vector<DifferenceArm> difference_pool() const;

 private:
  int dimension_;
  int horizon_;
  double scale_;
};

}  // namespace odpo
