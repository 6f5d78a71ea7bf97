#pragma once

#include "arx/linalg.hpp"

#include <cstdint>

namespace arx {

enum class WeightMode { ls, wls };

struct EstimatorOptions {
  WeightMode mode = WeightMode::ls;
  /// WLS exponent: a_n = (1 / log s_n)^{1 + gamma}. Unused for LS.
  double gamma = 1.0;
  /// The rank-one maintained inverse is re-synchronized against a fresh
  /// factorization of S_raw every this many updates (0 disables).
  int resync_interval = 500;
};

/// Recursive (weighted) least squares for X_{n+1} - U_n = theta^t Phi_n + eps_{n+1}:
///
///   S_n(a)     = sum_{k<=n} a_k Phi_k Phi_k^t + I
///   theta_{n+1} = theta_n + a_n S_n(a)^{-1} Phi_n (X_{n+1} - U_n - theta_n^t Phi_n)^t
///
/// One step updates s_n, then a_n, then S^{-1}, then theta, in that order.
class Estimator {
 public:
  Estimator(int regressor_dim, int output_dim, EstimatorOptions options = {});
  Estimator(Matrix theta0, EstimatorOptions options = {});

  /// Weight a_n for the current s_n: 1 for LS, (1 / log max(s_n, e))^{1+gamma}
  /// for WLS.
  double weight() const;
  static double weight_for(double s_n, const EstimatorOptions& options);

  /// Consumes (Phi_n, X_{n+1}, U_n). Throws NumericalError on non-finite
  /// data; the estimator is then poisoned and rejects further updates.
  void update(const Vector& phi, const Vector& x_next, const Vector& u);

  /// Same step with an externally supplied weight a_n (s_n is still updated).
  void update_weighted(const Vector& phi, const Vector& x_next, const Vector& u,
                       double weight);

  const Matrix& theta_hat() const noexcept { return theta_; }
  const Matrix& s_inv() const noexcept { return s_inv_; }
  const Matrix& s_raw() const noexcept { return s_raw_; }
  double s_n() const noexcept { return s_n_; }
  std::int64_t step() const noexcept { return step_; }
  double last_weight() const noexcept { return last_weight_; }
  /// Relative Frobenius gap between the maintained inverse and a fresh one,
  /// measured at the last re-synchronization.
  double last_resync_drift() const noexcept { return last_drift_; }
  bool poisoned() const noexcept { return poisoned_; }
  const EstimatorOptions& options() const noexcept { return options_; }

  /// ||theta_hat - theta||_F^2.
  double error_norm(const Matrix& theta) const;

  /// Forces the re-synchronization immediately; returns the measured drift.
  double resync();

 private:
  void check_inputs(const Vector& phi, const Vector& x_next, const Vector& u);
  void apply(const Vector& phi, const Vector& x_next, const Vector& u, double weight);

  EstimatorOptions options_;
  Matrix theta_;
  Matrix s_inv_;
  Matrix s_raw_;
  double s_n_ = 0.0;
  std::int64_t step_ = 0;
  double last_weight_ = 1.0;
  double last_drift_ = 0.0;
  bool poisoned_ = false;
};

}  // namespace arx
