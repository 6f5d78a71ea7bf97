#include "arx/estimator.hpp"

#include "arx/error.hpp"

#include <cmath>
#include <numbers>

namespace arx {

Estimator::Estimator(int regressor_dim, int output_dim, EstimatorOptions options)
    : Estimator(Matrix::Zero(regressor_dim, output_dim), options) {}

Estimator::Estimator(Matrix theta0, EstimatorOptions options)
    : options_(options), theta_(std::move(theta0)) {
  if (theta_.rows() < 1 || theta_.cols() < 1) {
    throw ConfigError("estimator: empty parameter matrix");
  }
  if (!theta_.allFinite()) throw ConfigError("estimator: non-finite initial estimate");
  if (options_.mode == WeightMode::wls && !(options_.gamma > 0.0)) {
    throw ConfigError("estimator.gamma: WLS exponent must be positive");
  }
  const auto delta = theta_.rows();
  s_inv_ = Matrix::Identity(delta, delta);
  s_raw_ = Matrix::Identity(delta, delta);
}

double Estimator::weight_for(double s_n, const EstimatorOptions& options) {
  if (options.mode == WeightMode::ls) return 1.0;
  const double log_s = std::log(std::max(s_n, std::numbers::e));
  return std::pow(1.0 / log_s, 1.0 + options.gamma);
}

double Estimator::weight() const { return weight_for(s_n_, options_); }

void Estimator::update(const Vector& phi, const Vector& x_next, const Vector& u) {
  check_inputs(phi, x_next, u);
  s_n_ += phi.squaredNorm();
  apply(phi, x_next, u, weight());
}

void Estimator::update_weighted(const Vector& phi, const Vector& x_next, const Vector& u,
                                double weight) {
  check_inputs(phi, x_next, u);
  if (!std::isfinite(weight) || weight < 0.0) {
    throw ConfigError("estimator: weight must be finite and nonnegative");
  }
  s_n_ += phi.squaredNorm();
  apply(phi, x_next, u, weight);
}

void Estimator::check_inputs(const Vector& phi, const Vector& x_next, const Vector& u) {
  if (poisoned_) throw NumericalError("estimator is poisoned by earlier non-finite data");
  if (phi.size() != theta_.rows() || x_next.size() != theta_.cols() ||
      u.size() != theta_.cols()) {
    throw ConfigError("estimator: dimension mismatch in update");
  }
  if (!phi.allFinite() || !x_next.allFinite() || !u.allFinite()) {
    poisoned_ = true;
    throw NumericalError("estimator: non-finite input at step " + std::to_string(step_));
  }
}

void Estimator::apply(const Vector& phi, const Vector& x_next, const Vector& u,
                      double weight) {
  last_weight_ = weight;

  // Sherman-Morrison: (S + a phi phi^t)^{-1} = S^{-1} - a g g^t / (1 + a phi^t g).
  const Vector g = s_inv_ * phi;
  const double denom = 1.0 + weight * phi.dot(g);
  s_inv_.noalias() -= (weight / denom) * g * g.transpose();
  s_raw_.noalias() += weight * phi * phi.transpose();

  const Vector innovation = x_next - u - theta_.transpose() * phi;
  theta_.noalias() += weight * (s_inv_ * phi) * innovation.transpose();
  ++step_;

  if (!theta_.allFinite()) {
    poisoned_ = true;
    throw NumericalError("estimator: estimate became non-finite at step " +
                         std::to_string(step_));
  }
  if (options_.resync_interval > 0 && step_ % options_.resync_interval == 0) resync();
}

double Estimator::resync() {
  const auto delta = s_raw_.rows();
  Eigen::LLT<Matrix> llt(s_raw_);
  if (llt.info() != Eigen::Success) {
    poisoned_ = true;
    throw NumericalError("estimator: S_n(a) lost positive definiteness");
  }
  Matrix fresh = llt.solve(Matrix::Identity(delta, delta));
  last_drift_ = (fresh - s_inv_).norm() / fresh.norm();
  s_inv_ = std::move(fresh);
  return last_drift_;
}

double Estimator::error_norm(const Matrix& theta) const {
  return (theta_ - theta).squaredNorm();
}

}  // namespace arx
