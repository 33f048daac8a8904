#include "odpo/estimator.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace odpo {

Dataset make_dataset(std::span<const DifferenceArm> arms,
                     std::span<const PreferenceSample> samples, int dimension) {
  Dataset data;
  data.arms.resize(static_cast<Eigen::Index>(samples.size()), dimension);
  data.outcomes.resize(static_cast<Eigen::Index>(samples.size()));
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const auto& sample = samples[s];
    if (sample.arm < 0 || static_cast<std::size_t>(sample.arm) >= arms.size()) {
      throw Error(fmt::format("sample {} references arm {} out of range", s,
                              sample.arm));
    }
    const Vector& b = arms[sample.arm].vector;
    if (b.size() != dimension) throw DimensionMismatch("sample arm dimension");
    if (sample.outcome != 0 && sample.outcome != 1) {
      throw Error(fmt::format("sample {} has outcome {}", s, sample.outcome));
    }
    data.arms.row(static_cast<Eigen::Index>(s)) = b.transpose();
    data.outcomes[static_cast<Eigen::Index>(s)] = sample.outcome;
  }
  return data;
}

double log_likelihood(const Dataset& data, const Vector& theta, double lambda) {
  const Vector z = data.arms * theta;
  double total = 0.0;
  for (Eigen::Index s = 0; s < z.size(); ++s) {
    total += data.outcomes[s] != 0.0 ? log_sigmoid(z[s]) : log_sigmoid(-z[s]);
  }
  return total - 0.5 * lambda * theta.squaredNorm();
}

Vector likelihood_gradient(const Dataset& data, const Vector& theta,
                           double lambda) {
  const Vector z = data.arms * theta;
  Vector residual(z.size());
  for (Eigen::Index s = 0; s < z.size(); ++s) {
    residual[s] = data.outcomes[s] - sigmoid(z[s]);
  }
  return data.arms.transpose() * residual - lambda * theta;
}

Matrix curvature(const Dataset& data, const Vector& theta, double lambda) {
  const int d = data.dimension();
  const Vector z = data.arms * theta;
  Vector w(z.size());
  for (Eigen::Index s = 0; s < z.size(); ++s) w[s] = sigmoid_prime(z[s]);
  Matrix j = lambda * Matrix::Identity(d, d);
  j.noalias() += data.arms.transpose() * w.asDiagonal() * data.arms;
  return j;
}

MleResult mle(const Dataset& data, double lambda, const MleOptions& options) {
  if (!(lambda > 0.0)) throw DomainError("MLE needs lambda > 0");
  constexpr double kArmijo = 1e-4;
  // Below this Newton decrement the full step is taken without line search:
  // likelihood differences are then under floating-point resolution.
  constexpr double kLocalDecrement = 1e-10;

  MleResult result;
  result.theta = Vector::Zero(data.dimension());
  double value = log_likelihood(data, result.theta, lambda);
  Vector grad = likelihood_gradient(data, result.theta, lambda);
  result.grad_norm = grad.norm();

  for (int it = 0; it < options.max_iters; ++it) {
    if (result.grad_norm <= options.tol) {
      result.converged = true;
      return result;
    }
    const Eigen::LLT<Matrix> llt(curvature(data, result.theta, lambda));
    const Vector step = llt.solve(grad);
    const double decrement = grad.dot(step);

    Vector next;
    double next_value = 0.0;
    if (decrement < kLocalDecrement) {
      next = result.theta + step;
      next_value = log_likelihood(data, next, lambda);
    } else {
      double alpha = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
        next = result.theta + alpha * step;
        next_value = log_likelihood(data, next, lambda);
        if (next_value >= value + kArmijo * alpha * decrement) {
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
    }
    const Vector next_grad = likelihood_gradient(data, next, lambda);
    if (decrement < kLocalDecrement && next_grad.norm() >= result.grad_norm) break;
    result.theta = std::move(next);
    value = next_value;
    grad = next_grad;
    result.grad_norm = grad.norm();
    result.iterations = it + 1;
  }
  result.converged = result.grad_norm <= options.tol;
  return result;
}

Vector h_map(const Dataset& data, const Vector& theta, double lambda) {
  const Vector z = data.arms * theta;
  Vector p(z.size());
  for (Eigen::Index s = 0; s < z.size(); ++s) p[s] = sigmoid(z[s]);
  return lambda * theta + data.arms.transpose() * p;
}

Vector project_unit_ball(const Vector& theta) {
  const double n = theta.norm();
  return n > 1.0 ? Vector(theta / n) : theta;
}

ProjectionResult project_mle(const Vector& theta_hat, const Dataset& data,
                             const Matrix& v, double lambda,
                             const ProjectionOptions& options) {
  ProjectionResult result;
  const double norm = theta_hat.norm();
  if (norm <= 1.0) {
    result.theta = theta_hat;
    return result;
  }
  const Eigen::LLT<Matrix> v_llt(v);
  if (v_llt.info() != Eigen::Success) {
    throw SingularMatrix("V must be positive definite for the projection");
  }
  const Vector target = h_map(data, theta_hat, lambda);
  auto objective = [&](const Vector& theta) {
    const Vector r = h_map(data, theta, lambda) - target;
    return r.dot(v_llt.solve(r));
  };
  auto gradient = [&](const Vector& theta) {
    const Vector r = h_map(data, theta, lambda) - target;
    return Vector(2.0 * curvature(data, theta, lambda) * v_llt.solve(r));
  };

  Vector theta = theta_hat / norm;
  double value = objective(theta);
  double eta = 1.0;
  result.converged = false;
  int it = 0;
  for (; it < options.max_iters; ++it) {
    if (value == 0.0) {
      result.converged = true;
      break;
    }
    const Vector grad = gradient(theta);
    Vector next;
    double next_value = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 100; ++ls) {
      next = project_unit_ball(theta - eta * grad);
      next_value = objective(next);
      const Vector delta = next - theta;
      if (next_value <= value + grad.dot(delta) + delta.squaredNorm() / (2.0 * eta)) {
        accepted = true;
        break;
      }
      eta *= 0.5;
    }
    if (!accepted) {
      result.converged = true;  // no representable decrease left
      break;
    }
    const double mapping = (next - theta).norm() / eta;
    const double decrease = value - next_value;
    if (next_value <= value) {
      theta = std::move(next);
      value = next_value;
    }
    if (mapping < options.mapping_tol ||
        (decrease >= 0.0 && decrease < options.tol * value)) {
      result.converged = true;
      ++it;
      break;
    }
    eta *= 2.0;
  }
  result.theta = std::move(theta);
  result.objective = value;
  result.iterations = it;
  return result;
}

DesignMatrix sampling_design_matrix(const Dataset& data, double lambda) {
  const int d = data.dimension();
  Matrix v = lambda * Matrix::Identity(d, d);
  v.noalias() += data.arms.transpose() * data.arms;
  return {std::move(v), lambda};
}

DesignMatrix sampling_design_matrix(std::span<const DifferenceArm> arms,
                                    std::span<const AllocationEntry> allocation,
                                    int dimension, double lambda) {
  Matrix v = lambda * Matrix::Identity(dimension, dimension);
  for (const auto& e : allocation) {
    const Vector& b = arms[e.arm].vector;
    v.noalias() += static_cast<double>(e.count) * b * b.transpose();
  }
  return {std::move(v), lambda};
}

double confidence_radius(double t, int dimension, double lambda, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
  if (!(lambda > 0.0)) throw DomainError("lambda must be > 0");
  if (!(t >= 0.0)) throw DomainError("t must be >= 0");
  if (dimension < 1) throw DomainError("dimension must be >= 1");
  const double d = dimension;
  const double arg =
      std::pow(lambda, 1.0 - 1.0 / d) + 4.0 * t / (d * std::pow(lambda, 1.0 / d));
  if (!(arg > 0.0)) throw DomainError("log argument of the radius is <= 0");
  const double inner = 2.0 * std::log(1.0 / delta) + d * std::log(arg);
  if (inner < 0.0) {
    throw DomainError(fmt::format(
        "radius square-root argument is negative ({:.6g})", inner));
  }
  return kConfidenceConstant * (std::sqrt(inner) + std::sqrt(lambda));
}

EstimatorResult estimate(const Dataset& data, double lambda, double delta,
                         const MleOptions& mle_options,
                         const ProjectionOptions& projection_options) {
  EstimatorResult out;
  const MleResult fit = mle(data, lambda, mle_options);
  out.theta_hat = fit.theta;
  out.diagnostics.newton_iters = fit.iterations;
  out.diagnostics.grad_norm = fit.grad_norm;
  out.diagnostics.mle_converged = fit.converged;
  out.v = sampling_design_matrix(data, lambda);
  const ProjectionResult proj =
      project_mle(fit.theta, data, out.v.matrix, lambda, projection_options);
  out.theta_hat_projected = proj.theta;
  out.diagnostics.projection_objective = proj.objective;
  out.diagnostics.projection_iters = proj.iterations;
  out.diagnostics.projection_converged = proj.converged;
  out.radius = confidence_radius(data.size(), data.dimension(), lambda, delta);
  return out;
}

}  // namespace odpo
