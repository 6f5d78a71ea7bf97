#pragma once

#include "arx/estimator.hpp"
#include "arx/matpoly.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>

namespace arx {

enum class TrajectoryKind { zero, decaying };

/// Predictable reference trajectory. `decaying` is x_n = scale n^{-1/2} u with
/// u = (1, ..., 1) / sqrt(d), so sum_{k<=n} ||x_k||^2 grows like scale^2 log n.
struct Trajectory {
  TrajectoryKind kind = TrajectoryKind::zero;
  double scale = 1.0;

  Vector at(std::int64_t n, int d) const;
};

struct SimConfig {
  ArxModel model;
  std::int64_t horizon = 0;
  Trajectory trajectory{};
  bool excitation_on = true;
  std::uint64_t seed = 0;
  EstimatorOptions estimator{};
  /// Initial estimate; zero when empty.
  std::optional<Matrix> theta0{};
  /// Keep theta_hat at theta0 (used for oracle runs).
  bool freeze_estimator = false;
  int record_stride = 1;
  /// Adds a_n and the extreme eigenvalues of S_n / n to recorded rows.
  bool diagnostics = false;
};

struct NoiseDraw {
  Vector eps;
  Vector xi;
};

/// Gaussian driven noise eps ~ N(0, Gamma) and excitation xi ~ N(0, Delta)
/// from two independent engines. xi is identically zero when excitation is off.
class NoiseSource {
 public:
  NoiseSource(const Matrix& gamma, const Matrix& delta, std::uint64_t seed,
              bool excitation_on);

  NoiseDraw draw();

 private:
  Vector standard_normal(std::mt19937_64& engine);

  Matrix gamma_factor_;
  Matrix delta_factor_;
  std::mt19937_64 eps_engine_;
  std::mt19937_64 xi_engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  bool excitation_on_;
};

/// U_n = x_{n+1} - theta_hat^t Phi_n + xi_{n+1}.
Vector control(const Matrix& theta_hat, const Vector& phi, const Vector& x_next,
               const Vector& xi_next);

/// X_{n+1} = theta^t Phi_n + U_n + eps_{n+1}.
Vector plant_step(const Matrix& theta, const Vector& phi, const Vector& u,
                  const Vector& eps_next);

/// Holds (X_n, ..., X_{n-p+1}, U_{n-1}, ..., U_{n-q}); pre-sample values are zero.
class RegressorHistory {
 public:
  RegressorHistory(int d, int p, int q);

  const Vector& phi() const noexcept { return phi_; }
  /// Shifts in X_{n+1} and U_n, producing Phi_{n+1}.
  void push(const Vector& x_next, const Vector& u);

 private:
  int d_;
  int p_;
  int q_;
  Vector phi_;
};

/// Incremental mean of outer products v v^t.
class RunningOuterMean {
 public:
  explicit RunningOuterMean(int d) : mean_(Matrix::Zero(d, d)) {}
  void add(const Vector& v);
  const Matrix& mean() const noexcept { return mean_; }
  std::int64_t count() const noexcept { return count_; }

 private:
  Matrix mean_;
  std::int64_t count_ = 0;
};

/// Row k describes the transition n = k - 1 -> k.
struct TraceRow {
  std::int64_t step = 0;      // k
  Vector output;              // X_k
  Vector control;             // U_{k-1}
  Vector reference;           // x_k
  Vector regressor;           // Phi_{k-1}
  Vector prediction_error;    // pi_{k-1} = (theta - theta_hat_{k-1})^t Phi_{k-1}
  Vector eps;                 // eps_k
  Vector xi;                  // xi_k
  Matrix cost;                // C_k
  Matrix noise_mean;          // Delta_k = mean of (eps + xi)(eps + xi)^t
  Matrix gamma_mean;          // Gamma_k = mean of eps eps^t
  double error_sq = 0.0;      // ||theta_hat_k - theta||^2
  double s_n = 0.0;           // s_{k-1}
  double weight = 0.0;        // a_{k-1} (diagnostics)
  double s_eig_min = 0.0;     // lambda_min(S_{k-1}(a) / k) (diagnostics)
  double s_eig_max = 0.0;
};

struct SimTrace {
  int d = 0;
  bool diagnostics = false;
  std::vector<TraceRow> rows;
};

/// Read-only view handed to observers after every step.
struct StepView {
  std::int64_t step;  // k
  const Vector& output;
  const Vector& reference;
  const Vector& prediction_error;
  const Vector& eps;
  const Vector& xi;
  const RunningOuterMean& cost;
  const RunningOuterMean& noise_mean;
  const Estimator& estimator;
};

using StepObserver = std::function<void(const StepView&)>;

struct SimResult {
  SimTrace trace;
  Estimator estimator;
  Matrix cost;
  Matrix noise_mean;
  Matrix gamma_mean;
  std::int64_t steps = 0;
};

inline constexpr double kDivergenceThreshold = 1e12;

/// Runs the excited adaptive tracking loop for `horizon` steps: draw noises,
/// compute U_n, advance the plant, update the estimator. Throws
/// SimulationAborted when ||X_n|| exceeds kDivergenceThreshold.
SimResult run(const SimConfig& config, const StepObserver& observer = {});

/// CSV with columns step, X*, U*, x*, pi_norm, error_sq, tr_C, tr_Delta, s_n
/// (and weight, s_eig_min, s_eig_max with diagnostics). 17 significant digits.
void write_trace_csv(std::ostream& out, const SimTrace& trace);

}  // namespace arx
