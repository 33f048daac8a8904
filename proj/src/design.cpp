#include "odpo/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace odpo {

namespace {

constexpr double kPruneWeight = 1e-9;

Matrix weighted_gram(const Matrix& cols, const Vector& weights) {
  const auto d = cols.rows();
  Matrix a = Matrix::Zero(d, d);
  for (Eigen::Index l = 0; l < cols.cols(); ++l) {
    if (weights[l] == 0.0) continue;
    a.selfadjointView<Eigen::Lower>().rankUpdate(cols.col(l), weights[l]);
  }
  return a.selfadjointView<Eigen::Lower>();
}

// Squared M^{-1}-norm of every column, via the Cholesky factor of M.
Vector inverse_norms(const Eigen::LLT<Matrix>& llt, const Matrix& cols) {
  const Matrix y = llt.matrixL().solve(cols);
  return y.colwise().squaredNorm().transpose();
}

// Lowest index among the maxima.
Eigen::Index argmax_first(const Vector& v) {
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < v.size(); ++k) {
    if (v[k] > v[best]) best = k;
  }
  return best;
}

Eigen::LLT<Matrix> factor_or_throw(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    throw SingularMatrix("design matrix is not positive definite");
  }
  return llt;
}

double log_det_llt(const Eigen::LLT<Matrix>& llt) {
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

Vector greedy_volume_init(const Matrix& cols) {
  const auto d = cols.rows();
  const auto n = cols.cols();
  Matrix residual = cols;
  Vector weights = Vector::Zero(n);
  const double scale = cols.colwise().squaredNorm().maxCoeff();
  int picked = 0;
  for (Eigen::Index step = 0; step < d; ++step) {
    const Vector norms = residual.colwise().squaredNorm().transpose();
    const Eigen::Index pick = argmax_first(norms);
    if (norms[pick] <= 1e-12 * scale) break;
    weights[pick] = 1.0;
    ++picked;
    const Vector q = residual.col(pick) / std::sqrt(norms[pick]);
    residual -= q * (q.transpose() * residual);
  }
  if (picked == 0) return Vector::Constant(n, 1.0 / static_cast<double>(n));
  return weights / picked;
}

}  // namespace

void Design::validate(std::size_t num_arms) const {
  if (support.empty()) throw Error("design has empty support");
  double total = 0.0;
  int prev = -1;
  for (const auto& atom : support) {
    if (atom.arm <= prev || atom.arm < 0 ||
        static_cast<std::size_t>(atom.arm) >= num_arms) {
      throw Error(fmt::format("design atom index {} invalid or out of order",
                              atom.arm));
    }
    if (!(atom.weight >= 0.0)) {
      throw Error(fmt::format("design weight {} on arm {} is negative",
                              atom.weight, atom.arm));
    }
    prev = atom.arm;
    total += atom.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(fmt::format("design weights sum to {:.17g}, not 1", total));
  }
}

Matrix stack_arms(std::span<const DifferenceArm> arms) {
  if (arms.empty()) return {};
  const auto d = arms.front().vector.size();
  Matrix cols(d, static_cast<Eigen::Index>(arms.size()));
  for (std::size_t l = 0; l < arms.size(); ++l) {
    if (arms[l].vector.size() != d) {
      throw DimensionMismatch("difference arms have inconsistent dimensions");
    }
    cols.col(static_cast<Eigen::Index>(l)) = arms[l].vector;
  }
  return cols;
}

DesignMatrix design_matrix_of(const Design& design,
                              std::span<const DifferenceArm> arms,
                              double lambda) {
  if (lambda < 0.0) throw DomainError("lambda must be >= 0");
  design.validate(arms.size());
  const int d = design.dimension;
  Matrix m = lambda * Matrix::Identity(d, d);
  for (const auto& atom : design.support) {
    const Vector& b = arms[atom.arm].vector;
    if (b.size() != d) throw DimensionMismatch("arm dimension differs from design");
    m.noalias() += atom.weight * b * b.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
  const Vector& ev = eig.eigenvalues();
  if (!(ev[0] > 1e-12 * std::max(1.0, ev[d - 1]))) {
    throw SingularMatrix(
        fmt::format("design matrix is singular (smallest eigenvalue {:.3g}); "
                    "the support does not span R^{}",
                    ev[0], d));
  }
  return {std::move(m), lambda};
}

double log_det(const Matrix& spd) {
  return log_det_llt(factor_or_throw(spd));
}

double g_value(const Design& design, std::span<const DifferenceArm> arms,
               double lambda) {
  const DesignMatrix m = design_matrix_of(design, arms, lambda);
  const auto llt = factor_or_throw(m.matrix);
  return inverse_norms(llt, stack_arms(arms)).maxCoeff();
}

double line_search_step(const Matrix& a, const Vector& b, double lambda) {
  const auto d = a.rows();
  const Matrix id = lambda * Matrix::Identity(d, d);
  const Matrix bbt = b * b.transpose();
  auto objective = [&](double g) {
    Eigen::LLT<Matrix> llt(id + (1.0 - g) * a + g * bbt);
    if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
    return log_det_llt(llt);
  };
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > 1e-10) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (objective(m1) < objective(m2)) {
      lo = m1;
    } else {
      hi = m2;
    }
  }
  return 0.5 * (lo + hi);
}

double closed_form_step(double g, int dimension) {
  return (g / dimension - 1.0) / (g - 1.0);
}

FrankWolfeResult frank_wolfe_design(std::span<const DifferenceArm> arms,
                                    const FrankWolfeOptions& options) {
  if (arms.empty()) {
    throw SpanDeficient("no difference arms: every duel compares an arm with itself");
  }
  if (!(options.epsilon > 0.0)) throw DomainError("epsilon must be > 0");
  if (!(options.lambda > 0.0)) throw DomainError("design lambda must be > 0");
  if (options.max_iters < 0) throw DomainError("max_iters must be >= 0");

  const Matrix cols = stack_arms(arms);
  const auto d = static_cast<int>(cols.rows());
  const auto n = cols.cols();
  const Matrix ridge = options.lambda * Matrix::Identity(d, d);

  FrankWolfeResult result;
  result.span_deficient = !spans_space(arms, d);
  result.threshold = options.stop_rule == StopRule::kOnePlusEpsilon
                         ? (1.0 + options.epsilon) * d
                         : std::sqrt(1.0 + options.epsilon) * d;

  Vector weights = options.init == DesignInit::kUniform
                       ? Vector::Constant(n, 1.0 / static_cast<double>(n))
                       : greedy_volume_init(cols);

  Vector best_weights = weights;
  double best_g = std::numeric_limits<double>::infinity();
  int m = 0;
  for (;; ++m) {
    const Matrix a = weighted_gram(cols, weights);
    const auto llt = factor_or_throw(ridge + a);
    result.logdet_trace.push_back(log_det_llt(llt));
    const Vector norms = inverse_norms(llt, cols);
    const Eigen::Index top = argmax_first(norms);
    const double g = norms[top];
    if (g < best_g) {
      best_g = g;
      best_weights = weights;
    }
    if (g <= result.threshold || m >= options.max_iters) break;

    const double gamma = line_search_step(a, cols.col(top), options.lambda);
    weights *= (1.0 - gamma);
    weights[top] += gamma;
  }
  result.iterations = m;

  double kept = 0.0;
  for (Eigen::Index l = 0; l < n; ++l) {
    if (best_weights[l] >= kPruneWeight) kept += best_weights[l];
  }
  result.design.dimension = d;
  for (Eigen::Index l = 0; l < n; ++l) {
    if (best_weights[l] >= kPruneWeight) {
      result.design.support.push_back({static_cast<int>(l), best_weights[l] / kept});
    }
  }
  result.final_g = g_value(result.design, arms, options.lambda);
  result.status = result.final_g <= result.threshold ? DesignStatus::kConverged
                                                     : DesignStatus::kMaxIters;
  return result;
}

KwCertificate kw_certificate(const Design& design,
                             std::span<const DifferenceArm> arms,
                             double lambda) {
  const DesignMatrix m = design_matrix_of(design, arms, lambda);
  const auto llt = factor_or_throw(m.matrix);
  KwCertificate cert;
  cert.g = inverse_norms(llt, stack_arms(arms)).maxCoeff();
  cert.logdet = log_det_llt(llt);
  cert.support_size = static_cast<int>(design.support.size());
  cert.dimension = design.dimension;
  cert.support_exceeds_bound =
      cert.support_size > design.dimension * (design.dimension + 1) / 2;
  return cert;
}

}  // namespace odpo
