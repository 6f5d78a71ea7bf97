#include "arx/mc.hpp"

#include "arx/error.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>

namespace arx::mc {

namespace {

double rate_denominator(std::int64_t n, const EstimatorOptions& options) {
  const double log_n = std::log(static_cast<double>(n));
  return options.mode == WeightMode::ls ? log_n : std::pow(log_n, 1.0 + options.gamma);
}

Matrix normalized_s(const Estimator& estimator, std::int64_t n) {
  const double scale =
      estimator.options().mode == WeightMode::ls
          ? 1.0 / static_cast<double>(n)
          : std::pow(std::log(static_cast<double>(n)), 1.0 + estimator.options().gamma) /
                static_cast<double>(n);
  return estimator.s_raw() * scale;
}

double cost_gap(const Matrix& cost, const Matrix& noise_mean) {
  return linalg::operator_norm(cost - noise_mean);
}

}  // namespace

double quantile(std::vector<double> values, double prob) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double pos = prob * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

EnsembleContext make_context(const EnsembleConfig& config) {
  const ArxModel& model = config.base.model;
  EnsembleContext ctx;
  ctx.theta = model.theta();
  const std::int64_t n = config.base.horizon;
  ctx.checkpoints = config.checkpoints;
  if (ctx.checkpoints.empty()) {
    for (std::int64_t c : {n / 4, n / 2, n}) {
      if (c >= 1 && (ctx.checkpoints.empty() || ctx.checkpoints.back() != c)) {
        ctx.checkpoints.push_back(c);
      }
    }
  }
  for (auto c : ctx.checkpoints) {
    if (c < 1 || c > n) throw ConfigError("checkpoint outside [1, N]");
  }
  if (config.lil) {
    ctx.lil = *config.lil;
  } else {
    ctx.lil.u = Vector::Unit(model.d(), 0);
    ctx.lil.v = Vector::Unit(model.regressor_dim(), 0);
  }
  if (ctx.lil.u.size() != model.d() || ctx.lil.v.size() != model.regressor_dim()) {
    throw ConfigError("lil: direction vectors have wrong dimensions");
  }
  if (is_causal(model).causal) {
    ctx.limit = compute_limit_set(model);
    ctx.lambda_sqrt = linalg::spd_sqrt(ctx.limit->lambda);
    ctx.lil_predicted = lil_predicted(ctx.lil, ctx.limit->lambda_inv, model.gamma());
  }
  ctx.gamma_inv_sqrt = linalg::spd_inverse_sqrt(model.gamma());
  return ctx;
}

RunOutcome simulate_run(const EnsembleConfig& config, const EnsembleContext& context,
                        std::int64_t index) {
  SimConfig sim = config.base;
  sim.seed = config.base_seed + static_cast<std::uint64_t>(index);
  // Only the observer is needed; keep the trace small.
  sim.record_stride = static_cast<int>(std::max<std::int64_t>(sim.horizon, 1));
  sim.diagnostics = false;

  const std::int64_t horizon = sim.horizon;
  RunSummary summary;
  summary.index = index;
  summary.seed = sim.seed;
  LilTracker lil(context.lil.u, context.lil.v, horizon / 2, horizon);
  std::size_t next_checkpoint = 0;

  auto observer = [&](const StepView& view) {
    const Matrix error = view.estimator.theta_hat() - context.theta;
    lil.observe(view.step, error);
    if (next_checkpoint < context.checkpoints.size() &&
        context.checkpoints[next_checkpoint] == view.step) {
      summary.checkpoints.push_back(
          {view.step, error.squaredNorm(), cost_gap(view.cost.mean(), view.noise_mean.mean()),
           normalized_s(view.estimator, view.step)});
      ++next_checkpoint;
    }
  };

  RunOutcome outcome;
  outcome.index = index;
  try {
    SimResult result = run(sim, observer);
    summary.theta_hat = result.estimator.theta_hat();
    summary.error_sq = result.estimator.error_norm(context.theta);
    summary.cost_gap = cost_gap(result.cost, result.noise_mean);
    summary.s_normalized = horizon > 0 ? normalized_s(result.estimator, horizon)
                                       : result.estimator.s_raw();
    summary.lil_sup = lil.sup();
    outcome.summary = std::move(summary);
  } catch (const SimulationAborted& e) {
    outcome.failure = RunFailure{index, sim.seed, e.step(), e.what()};
  }
  return outcome;
}

EnsembleSummary run_ensemble_serial(const EnsembleConfig& config) {
  if (config.runs < 0) throw ConfigError("run.M: must be nonnegative");
  const auto context = make_context(config);
  std::vector<RunOutcome> outcomes;
  outcomes.reserve(static_cast<std::size_t>(config.runs));
  for (int i = 0; i < config.runs; ++i) outcomes.push_back(simulate_run(config, context, i));
  return aggregate(config, context, std::move(outcomes));
}

EnsembleSummary run_ensemble(const EnsembleConfig& config) {
  if (config.runs < 0) throw ConfigError("run.M: must be nonnegative");
  if (config.workers < 1) throw ConfigError("run.workers: must be >= 1");
  const auto context = make_context(config);
  std::vector<RunOutcome> outcomes(static_cast<std::size_t>(config.runs));
  std::exception_ptr first_error;

#pragma omp parallel for schedule(dynamic, 1) num_threads(config.workers)
  for (int i = 0; i < config.runs; ++i) {
    try {
      outcomes[static_cast<std::size_t>(i)] = simulate_run(config, context, i);
    } catch (...) {
#pragma omp critical(arx_mc_error)
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);
  return aggregate(config, context, std::move(outcomes));
}

EnsembleSummary aggregate(const EnsembleConfig& config, const EnsembleContext& context,
                          std::vector<RunOutcome> outcomes) {
  std::sort(outcomes.begin(), outcomes.end(),
            [](const RunOutcome& a, const RunOutcome& b) { return a.index < b.index; });
  EnsembleSummary out;
  out.runs = config.runs;
  out.horizon = config.base.horizon;
  out.mode = config.base.estimator.mode;
  for (auto& o : outcomes) {
    if (o.summary) out.completed.push_back(std::move(*o.summary));
    if (o.failure) out.failures.push_back(std::move(*o.failure));
  }
  if (!context.limit || out.completed.empty() || out.horizon < 1) return out;

  const auto count = static_cast<Eigen::Index>(out.completed.size());
  const auto coords = context.theta.size();
  out.z.resize(count, coords);
  for (Eigen::Index r = 0; r < count; ++r) {
    const auto& run = out.completed[static_cast<std::size_t>(r)];
    out.z.row(r) = clt_statistic_factored(run.theta_hat, context.theta, context.lambda_sqrt,
                                          context.gamma_inv_sqrt, out.horizon)
                       .transpose();
  }
  for (Eigen::Index c = 0; c < coords; ++c) {
    std::vector<double> column(out.z.col(c).data(), out.z.col(c).data() + count);
    const double mean = out.z.col(c).mean();
    double var = 0.0;
    for (double x : column) var += (x - mean) * (x - mean);
    var = count > 1 ? var / static_cast<double>(count - 1) : 0.0;
    out.z_mean.push_back(mean);
    out.z_variance.push_back(var);
    out.ks.push_back(ks_normality(column));
  }
  out.rates = rate_diagnostics(out.completed, context.checkpoints, context.limit->lambda,
                               config.base.estimator);
  if (context.lil_predicted > 0.0) out.lil = lil_band(out.completed, context.lil_predicted);
  return out;
}

Vector clt_statistic_factored(const Matrix& theta_hat, const Matrix& theta,
                              const Matrix& lambda_sqrt, const Matrix& gamma_inv_sqrt,
                              std::int64_t n) {
  const Matrix z = std::sqrt(static_cast<double>(n)) * lambda_sqrt * (theta_hat - theta) *
                   gamma_inv_sqrt;
  Vector flat(z.size());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    for (Eigen::Index j = 0; j < z.cols(); ++j) flat(i * z.cols() + j) = z(i, j);
  }
  return flat;
}

Vector clt_statistic(const Matrix& theta_hat, const Matrix& theta, const Matrix& lambda,
                     const Matrix& gamma, std::int64_t n) {
  if (!linalg::is_positive_definite(lambda)) {
    throw NumericalError("clt_statistic: Lambda is not positive definite");
  }
  return clt_statistic_factored(theta_hat, theta, linalg::spd_sqrt(lambda),
                                linalg::spd_inverse_sqrt(gamma), n);
}

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double ks_normality(std::span<const double> samples) {
  if (samples.empty()) return 0.0;
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double stat = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = standard_normal_cdf(sorted[i]);
    const double below = f - static_cast<double>(i) / n;
    const double above = static_cast<double>(i + 1) / n - f;
    stat = std::max({stat, below, above});
  }
  return stat;
}

std::vector<RateRow> rate_diagnostics(const std::vector<RunSummary>& runs,
                                      const std::vector<std::int64_t>& checkpoints,
                                      const Matrix& lambda, const EstimatorOptions& options) {
  std::vector<RateRow> rows;
  const double lambda_norm = lambda.norm();
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    const std::int64_t n = checkpoints[c];
    RateRow row;
    row.n = n;
    const double factor = static_cast<double>(n) / rate_denominator(n, options);
    std::vector<double> errors;
    std::vector<double> costs;
    std::vector<double> gaps;
    Matrix mean_s = Matrix::Zero(lambda.rows(), lambda.cols());
    std::size_t used = 0;
    for (const auto& run : runs) {
      if (c >= run.checkpoints.size()) continue;
      const auto& values = run.checkpoints[c];
      errors.push_back(factor * values.error_sq);
      costs.push_back(factor * values.cost_gap);
      gaps.push_back((values.s_normalized - lambda).norm());
      mean_s += values.s_normalized;
      ++used;
    }
    if (used == 0) continue;
    mean_s /= static_cast<double>(used);
    row.error_ratio_median = quantile(errors, 0.5);
    row.error_ratio_p90 = quantile(errors, 0.9);
    row.cost_ratio_median = quantile(costs, 0.5);
    row.cost_ratio_p90 = quantile(costs, 0.9);
    row.mean_s_relative_gap = (mean_s - lambda).norm() / lambda_norm;
    row.s_gap_median = quantile(gaps, 0.5);
    rows.push_back(row);
  }
  return rows;
}

LilTracker::LilTracker(Vector u, Vector v, std::int64_t window_begin,
                       std::int64_t window_end)
    : u_(std::move(u)), v_(std::move(v)), begin_(window_begin), end_(window_end) {}

void LilTracker::observe(std::int64_t n, const Matrix& error) {
  if (n < begin_ || n > end_) return;
  const double nd = static_cast<double>(n);
  // log log n must be positive and the normalization meaningful: n > e^e.
  if (nd <= std::exp(std::numbers::e)) return;
  const double value =
      std::sqrt(nd / (2.0 * std::log(std::log(nd)))) * v_.dot(error * u_);
  if (!seen_ || value > sup_) sup_ = value;
  seen_ = true;
}

double lil_predicted(const LilDirections& dirs, const Matrix& lambda_inv,
                     const Matrix& gamma) {
  return std::sqrt(dirs.v.dot(lambda_inv * dirs.v)) * std::sqrt(dirs.u.dot(gamma * dirs.u));
}

LilBand lil_band(const std::vector<RunSummary>& runs, double predicted) {
  LilBand band;
  band.predicted = predicted;
  std::vector<double> ratios;
  for (const auto& run : runs) ratios.push_back(run.lil_sup / predicted);
  if (ratios.empty()) return band;
  band.ratio_max = *std::max_element(ratios.begin(), ratios.end());
  band.ratio_median = quantile(ratios, 0.5);
  double sum = 0.0;
  for (double r : ratios) sum += r;
  band.ratio_mean = sum / static_cast<double>(ratios.size());
  return band;
}

AblationReport excitation_ablation(const EnsembleConfig& config, double threshold) {
  EnsembleConfig on = config;
  on.base.excitation_on = true;
  EnsembleConfig off = config;
  off.base.excitation_on = false;
  const auto summary_on = run_ensemble(on);
  const auto summary_off = run_ensemble(off);

  const ArxModel& model = config.base.model;
  const int d = model.d();
  const Matrix theta = model.theta();

  struct Coordinate {
    std::string name;
    Eigen::Index row;
    Eigen::Index col;
  };
  std::vector<Coordinate> coords;
  for (int i = 1; i <= model.p(); ++i) {
    for (int r = 0; r < d; ++r) {
      coords.push_back({"A" + std::to_string(i) + "(" + std::to_string(r + 1) + "," +
                            std::to_string(r + 1) + ")",
                        (i - 1) * d + r, r});
    }
  }
  for (int j = 1; j <= model.q(); ++j) {
    for (int r = 0; r < d; ++r) {
      coords.push_back({"B" + std::to_string(j) + "(" + std::to_string(r + 1) + "," +
                            std::to_string(r + 1) + ")",
                        (model.p() + j - 1) * d + r, r});
    }
  }

  auto errors_for = [&](const EnsembleSummary& s, const Coordinate& c) {
    std::vector<double> out;
    for (const auto& run : s.completed) {
      out.push_back(std::abs(run.theta_hat(c.row, c.col) - theta(c.row, c.col)));
    }
    return out;
  };
  // Failed runs count as not converged.
  auto fraction_below = [&](const std::vector<double>& errors, int total) {
    if (total == 0) return 0.0;
    const auto hits = std::count_if(errors.begin(), errors.end(),
                                    [&](double e) { return e < threshold; });
    return static_cast<double>(hits) / static_cast<double>(total);
  };

  AblationReport report;
  report.threshold = threshold;
  report.runs_on = config.runs;
  report.runs_off = config.runs;
  report.failures_on = static_cast<int>(summary_on.failures.size());
  report.failures_off = static_cast<int>(summary_off.failures.size());
  for (const auto& c : coords) {
    const auto e_on = errors_for(summary_on, c);
    const auto e_off = errors_for(summary_off, c);
    report.rows.push_back({c.name, fraction_below(e_on, config.runs),
                           fraction_below(e_off, config.runs), quantile(e_on, 0.5),
                           quantile(e_off, 0.5)});
  }
  return report;
}

}  // namespace arx::mc
