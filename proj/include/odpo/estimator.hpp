#pragma once

#include <span>

#include "odpo/design.hpp"
#include "odpo/instance.hpp"
#include "odpo/preference.hpp"
#include "odpo/types.hpp"

namespace odpo {

// Labeled duels in matrix form: row s of `arms` is b_s, outcomes[s] is Y_s.
struct Dataset {
  Matrix arms;
  Vector outcomes;

  int dimension() const { return static_cast<int>(arms.cols()); }
  int size() const { return static_cast<int>(arms.rows()); }
};

Dataset make_dataset(std::span<const DifferenceArm> arms,
                     std::span<const PreferenceSample> samples, int dimension);

// sum_s [Y_s log s(<theta,b_s>) + (1-Y_s) log s(-<theta,b_s>)] - lambda |theta|^2 / 2
double log_likelihood(const Dataset& data, const Vector& theta, double lambda);

// sum_s (Y_s - s(<theta,b_s>)) b_s - lambda theta
Vector likelihood_gradient(const Dataset& data, const Vector& theta,
                           double lambda);

// lambda I + sum_s s'(<theta,b_s>) b_s b_s^T: the negated Hessian of the
// log-likelihood, and also the Jacobian of h_map.
Matrix curvature(const Dataset& data, const Vector& theta, double lambda);

struct MleOptions {
  double tol = 1e-8;
  int max_iters = 100;
};

struct MleResult {
  Vector theta;
  int iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;
};

// Damped Newton ascent with Armijo backtracking. Requires lambda > 0, which
// makes the maximizer unique. On kMaxIters the best iterate is returned
// with converged = false.
MleResult mle(const Dataset& data, double lambda, const MleOptions& options = {});

// lambda theta + sum_s s(<theta,b_s>) b_s
Vector h_map(const Dataset& data, const Vector& theta, double lambda);

struct ProjectionOptions {
  double tol = 1e-10;           // relative decrease of the objective
  double mapping_tol = 1e-8;    // norm of the gradient mapping
  int max_iters = 10000;
};

struct ProjectionResult {
  Vector theta;
  double objective = 0.0;  // |H(theta) - H(theta_hat)|^2 in the V^{-1} norm
  int iterations = 0;
  bool converged = true;
};

// argmin over the unit ball of |H(theta) - H(theta_hat)|_{V^{-1}}. Returns
// theta_hat untouched when it is already feasible; otherwise projected
// gradient descent with backtracking, started from theta_hat / |theta_hat|.
// The objective need not be convex, so the result is a stationary point.
ProjectionResult project_mle(const Vector& theta_hat, const Dataset& data,
                             const Matrix& v, double lambda,
                             const ProjectionOptions& options = {});

// Euclidean projection onto the closed unit ball.
Vector project_unit_ball(const Vector& theta);

// V = lambda I + sum_s b_s b_s^T over the realized samples.
DesignMatrix sampling_design_matrix(const Dataset& data, double lambda);
DesignMatrix sampling_design_matrix(std::span<const DifferenceArm> arms,
                                    std::span<const AllocationEntry> allocation,
                                    int dimension, double lambda);

inline constexpr double kConfidenceConstant = 20.0;

// 20 [sqrt(2 log(1/delta) + d log(lambda^{1-1/d} + 4t/(d lambda^{1/d})))
//     + sqrt(lambda)]
// with t the number of labeled duels. Throws DomainError outside
// delta in (0,1), lambda > 0, t >= 0, or when the square-root argument is
// negative.
double confidence_radius(double t, int dimension, double lambda, double delta);

struct EstimatorDiagnostics {
  int newton_iters = 0;
  double grad_norm = 0.0;
  bool mle_converged = false;
  double projection_objective = 0.0;
  int projection_iters = 0;
  bool projection_converged = true;
};

struct EstimatorResult {
  Vector theta_hat;
  Vector theta_hat_projected;
  DesignMatrix v;
  double radius = 0.0;
  EstimatorDiagnostics diagnostics;
};

// MLE, projected MLE, V and the radius at confidence delta in one pass.
EstimatorResult estimate(const Dataset& data, double lambda, double delta,
                         const MleOptions& mle_options = {},
                         const ProjectionOptions& projection_options = {});

}  // namespace odpo
