#pragma once

#include <span>
#include <vector>

#include "odpo/instance.hpp"
#include "odpo/types.hpp"

namespace odpo {

struct DesignAtom {
  int arm = 0;  // index into the difference-arm list
  double weight = 0.0;
};

// Finitely supported probability distribution over difference arms, atoms
// sorted by arm index.
struct Design {
  std::vector<DesignAtom> support;
  int dimension = 0;

  // Throws Error unless weights are nonnegative, sum to 1 within 1e-12, and
  // indices are strictly increasing and below num_arms.
  void validate(std::size_t num_arms) const;
};

// lambda * I + sum_b pi(b) b b^T.
struct DesignMatrix {
  Matrix matrix;
  double lambda = 0.0;
};

// Arms as columns of a d x L matrix.
Matrix stack_arms(std::span<const DifferenceArm> arms);

// Throws SingularMatrix when the result is not positive definite (only
// possible for lambda == 0 with a support that does not span R^d).
DesignMatrix design_matrix_of(const Design& design,
                              std::span<const DifferenceArm> arms,
                              double lambda);

double log_det(const Matrix& spd);

// max over every arm (not only the support) of b^T M(pi)^{-1} b.
double g_value(const Design& design, std::span<const DifferenceArm> arms,
               double lambda);

enum class StopRule {
  kOnePlusEpsilon,      // g <= (1 + eps) d
  kSqrtOnePlusEpsilon,  // g <= sqrt(1 + eps) d
};

enum class DesignInit {
  kGreedyVolume,  // pivoted Gram-Schmidt core set, uniform over <= d arms
  kUniform,       // uniform over all arms
};

struct FrankWolfeOptions {
  double lambda = 1e-6;
  double epsilon = 0.05;
  int max_iters = 5000;
  StopRule stop_rule = StopRule::kOnePlusEpsilon;
  DesignInit init = DesignInit::kGreedyVolume;
};

enum class DesignStatus { kConverged, kMaxIters };

struct FrankWolfeResult {
  Design design;
  int iterations = 0;
  double final_g = 0.0;
  double threshold = 0.0;
  DesignStatus status = DesignStatus::kConverged;
  // B does not span R^d; lambda then dominates the missing directions.
  bool span_deficient = false;
  // log det M(pi_m) for m = 0..iterations.
  std::vector<double> logdet_trace;

  bool converged() const { return status == DesignStatus::kConverged; }
};

// Frank-Wolfe (Fedorov-Wynn) iterations on log det M(pi), each step moving
// mass toward the arm of largest M^{-1}-norm with an exact line search.
// Stops when g <= threshold; otherwise returns the best iterate with
// kMaxIters. Weights below 1e-9 are pruned before returning. Throws
// SpanDeficient for an empty arm list and DomainError for invalid options.
FrankWolfeResult frank_wolfe_design(std::span<const DifferenceArm> arms,
                                    const FrankWolfeOptions& options);

// argmax over [0, 1] of log det(lambda I + (1 - g) A + g b b^T), where A is
// the unregularized M(pi). Ternary search to width 1e-10.
double line_search_step(const Matrix& a, const Vector& b, double lambda);

// Closed-form D-optimal step (g/d - 1)/(g - 1), valid for lambda = 0.
double closed_form_step(double g, int dimension);

struct KwCertificate {
  double g = 0.0;
  double logdet = 0.0;
  int support_size = 0;
  int dimension = 0;
  // More atoms than d(d+1)/2; allowed for approximate designs.
  bool support_exceeds_bound = false;

  bool is_optimal_within(double tol) const {
    return g <= (1.0 + tol) * dimension;
  }
};

KwCertificate kw_certificate(const Design& design,
                             std::span<const DifferenceArm> arms,
                             double lambda);

}  // namespace odpo
