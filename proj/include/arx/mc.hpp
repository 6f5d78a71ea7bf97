#pragma once

#include "arx/limitmat.hpp"
#include "arx/sim.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace arx::mc {

/// Directions for the iterated-logarithm check on v^t (theta_hat_n - theta) u.
struct LilDirections {
  Vector u;  // d
  Vector v;  // d (p + q)
};

struct EnsembleConfig {
  SimConfig base;
  int runs = 1;
  std::uint64_t base_seed = 0;
  int workers = 1;
  /// Defaults to {N/4, N/2, N} when empty.
  std::vector<std::int64_t> checkpoints{};
  /// Defaults to the first basis vectors when empty.
  std::optional<LilDirections> lil{};
};

struct CheckpointValues {
  std::int64_t n = 0;
  double error_sq = 0.0;
  /// ||C_n - Delta_n|| (spectral norm).
  double cost_gap = 0.0;
  /// S_n / n for LS, (log n)^{1+gamma} S_n(a) / n for WLS.
  Matrix s_normalized;
};

struct RunSummary {
  std::int64_t index = 0;
  std::uint64_t seed = 0;
  Matrix theta_hat;
  double error_sq = 0.0;
  double cost_gap = 0.0;
  Matrix s_normalized;
  std::vector<CheckpointValues> checkpoints;
  /// max over n in [N/2, N] of (n / (2 log log n))^{1/2} v^t (theta_hat_n - theta) u.
  double lil_sup = 0.0;
};

struct RunFailure {
  std::int64_t index = 0;
  std::uint64_t seed = 0;
  std::int64_t abort_step = 0;
  std::string reason;
};

struct RunOutcome {
  std::int64_t index = 0;
  std::optional<RunSummary> summary;
  std::optional<RunFailure> failure;
};

struct RateRow {
  std::int64_t n = 0;
  double error_ratio_median = 0.0;
  double error_ratio_p90 = 0.0;
  double cost_ratio_median = 0.0;
  double cost_ratio_p90 = 0.0;
  /// ||mean_runs(S_normalized) - Lambda||_F / ||Lambda||_F.
  double mean_s_relative_gap = 0.0;
  /// Median over runs of ||S_normalized - Lambda||_F.
  double s_gap_median = 0.0;
};

struct LilBand {
  double predicted = 0.0;
  double ratio_max = 0.0;
  double ratio_median = 0.0;
  double ratio_mean = 0.0;
};

struct EnsembleSummary {
  int runs = 0;
  std::int64_t horizon = 0;
  WeightMode mode = WeightMode::ls;
  std::vector<RunSummary> completed;
  std::vector<RunFailure> failures;
  /// completed x d(p+q)d, row-major flattening of each Z_N.
  Matrix z;
  std::vector<double> z_mean;
  std::vector<double> z_variance;
  std::vector<double> ks;
  std::vector<RateRow> rates;
  std::optional<LilBand> lil;
};

/// Analytic quantities shared by every run of an ensemble.
struct EnsembleContext {
  Matrix theta;
  std::optional<LimitSet> limit;
  Matrix lambda_sqrt;
  Matrix gamma_inv_sqrt;
  LilDirections lil;
  double lil_predicted = 0.0;
  std::vector<std::int64_t> checkpoints;
};

EnsembleContext make_context(const EnsembleConfig& config);

/// Executes one run with seed base_seed + index.
RunOutcome simulate_run(const EnsembleConfig& config, const EnsembleContext& context,
                        std::int64_t index);

/// Runs concurrently on `workers` OpenMP threads. Output does not depend on
/// the worker count.
EnsembleSummary run_ensemble(const EnsembleConfig& config);

/// Single-threaded reference implementation of run_ensemble.
EnsembleSummary run_ensemble_serial(const EnsembleConfig& config);

/// Deterministic reduction; outcomes may arrive in any order.
EnsembleSummary aggregate(const EnsembleConfig& config, const EnsembleContext& context,
                          std::vector<RunOutcome> outcomes);

/// sqrt(N) Lambda^{1/2} (theta_hat - theta) Gamma^{-1/2}, flattened row-major.
Vector clt_statistic(const Matrix& theta_hat, const Matrix& theta, const Matrix& lambda,
                     const Matrix& gamma, std::int64_t n);
Vector clt_statistic_factored(const Matrix& theta_hat, const Matrix& theta,
                              const Matrix& lambda_sqrt, const Matrix& gamma_inv_sqrt,
                              std::int64_t n);

double standard_normal_cdf(double x);

/// One-sample Kolmogorov-Smirnov distance to N(0, 1).
double ks_normality(std::span<const double> samples);

/// Per-checkpoint rate table. Rates are normalized by log n (LS) or
/// (log n)^{1+gamma} (WLS).
std::vector<RateRow> rate_diagnostics(const std::vector<RunSummary>& runs,
                                      const std::vector<std::int64_t>& checkpoints,
                                      const Matrix& lambda, const EstimatorOptions& options);

/// Tracks the running max of (n / (2 log log n))^{1/2} v^t (theta_hat_n - theta) u
/// over a window; points with n <= e^e are skipped.
class LilTracker {
 public:
  LilTracker(Vector u, Vector v, std::int64_t window_begin, std::int64_t window_end);
  void observe(std::int64_t n, const Matrix& error);
  /// Zero when no point was observed.
  double sup() const noexcept { return seen_ ? sup_ : 0.0; }

 private:
  Vector u_;
  Vector v_;
  std::int64_t begin_;
  std::int64_t end_;
  double sup_ = 0.0;
  bool seen_ = false;
};

/// (v^t Lambda^{-1} v)^{1/2} (u^t Gamma u)^{1/2}.
double lil_predicted(const LilDirections& dirs, const Matrix& lambda_inv,
                     const Matrix& gamma);

LilBand lil_band(const std::vector<RunSummary>& runs, double predicted);

struct AblationRow {
  std::string coordinate;  // e.g. "A1(1,1)"
  double fraction_below_on = 0.0;
  double fraction_below_off = 0.0;
  double median_error_on = 0.0;
  double median_error_off = 0.0;
};

struct AblationReport {
  double threshold = 0.1;
  int runs_on = 0;
  int runs_off = 0;
  int failures_on = 0;
  int failures_off = 0;
  std::vector<AblationRow> rows;
};

/// Paired ensembles with excitation on and off; reports terminal absolute
/// error of every diagonal coordinate of each A_i and B_j.
AblationReport excitation_ablation(const EnsembleConfig& config, double threshold = 0.1);

double quantile(std::vector<double> values, double prob);

}  // namespace arx::mc
