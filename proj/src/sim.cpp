#include "arx/sim.hpp"

#include "arx/error.hpp"

#include <cmath>
#include <ostream>

namespace arx {

Vector Trajectory::at(std::int64_t n, int d) const {
  if (kind == TrajectoryKind::zero || n < 1) return Vector::Zero(d);
  const double magnitude = scale / std::sqrt(static_cast<double>(n));
  return Vector::Constant(d, magnitude / std::sqrt(static_cast<double>(d)));
}

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32), stream};
  return std::mt19937_64(seq);
}

Matrix cholesky_factor(const Matrix& m, const char* what) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success || !linalg::is_positive_definite(m)) {
    throw ConfigError(std::string(what) + ": covariance is not positive definite");
  }
  return llt.matrixL();
}

}  // namespace

NoiseSource::NoiseSource(const Matrix& gamma, const Matrix& delta, std::uint64_t seed,
                         bool excitation_on)
    : gamma_factor_(cholesky_factor(gamma, "Gamma")),
      delta_factor_(cholesky_factor(delta, "Delta")),
      eps_engine_(make_engine(seed, 1)),
      xi_engine_(make_engine(seed, 2)),
      excitation_on_(excitation_on) {}

Vector NoiseSource::standard_normal(std::mt19937_64& engine) {
  Vector z(gamma_factor_.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal_(engine);
  return z;
}

NoiseDraw NoiseSource::draw() {
  NoiseDraw out;
  out.eps = gamma_factor_ * standard_normal(eps_engine_);
  // The two engines share one distribution object; reset its cached spare so
  // each stream depends only on its own engine.
  normal_.reset();
  if (excitation_on_) {
    out.xi = delta_factor_ * standard_normal(xi_engine_);
    normal_.reset();
  } else {
    out.xi = Vector::Zero(gamma_factor_.rows());
  }
  return out;
}

Vector control(const Matrix& theta_hat, const Vector& phi, const Vector& x_next,
               const Vector& xi_next) {
  return x_next - theta_hat.transpose() * phi + xi_next;
}

Vector plant_step(const Matrix& theta, const Vector& phi, const Vector& u,
                  const Vector& eps_next) {
  return theta.transpose() * phi + u + eps_next;
}

RegressorHistory::RegressorHistory(int d, int p, int q)
    : d_(d), p_(p), q_(q), phi_(Vector::Zero(d * (p + q))) {}

void RegressorHistory::push(const Vector& x_next, const Vector& u) {
  // Shift the X block and the U block down by one slot each.
  for (int i = p_ - 1; i > 0; --i) phi_.segment(i * d_, d_) = phi_.segment((i - 1) * d_, d_);
  phi_.segment(0, d_) = x_next;
  const int u0 = p_ * d_;
  for (int j = q_ - 1; j > 0; --j) {
    phi_.segment(u0 + j * d_, d_) = phi_.segment(u0 + (j - 1) * d_, d_);
  }
  phi_.segment(u0, d_) = u;
}

void RunningOuterMean::add(const Vector& v) {
  ++count_;
  mean_ += (v * v.transpose() - mean_) / static_cast<double>(count_);
}

SimResult run(const SimConfig& config, const StepObserver& observer) {
  const ArxModel& model = config.model;
  const int d = model.d();
  const Matrix theta = model.theta();
  if (config.horizon < 0) throw ConfigError("run.N: horizon must be nonnegative");
  if (config.record_stride < 1) throw ConfigError("run.record_stride: must be >= 1");

  Matrix theta0 = config.theta0.value_or(Matrix::Zero(theta.rows(), theta.cols()));
  if (theta0.rows() != theta.rows() || theta0.cols() != theta.cols()) {
    throw ConfigError("run.theta0: expected " + std::to_string(theta.rows()) + "x" +
                      std::to_string(theta.cols()));
  }
  SimResult result{SimTrace{d, config.diagnostics, {}},
                   Estimator(std::move(theta0), config.estimator),
                   Matrix::Zero(d, d),
                   Matrix::Zero(d, d),
                   Matrix::Zero(d, d),
                   0};
  Estimator& estimator = result.estimator;

  NoiseSource noise(model.gamma(), model.delta(), config.seed, config.excitation_on);
  RegressorHistory history(d, model.p(), model.q());
  RunningOuterMean cost(d);
  RunningOuterMean noise_mean(d);
  RunningOuterMean gamma_mean(d);

  for (std::int64_t n = 0; n < config.horizon; ++n) {
    const std::int64_t k = n + 1;
    const Vector phi = history.phi();
    const double s_before = estimator.s_n() + (config.freeze_estimator ? 0.0 : phi.squaredNorm());
    auto [eps, xi] = noise.draw();
    const Vector reference = config.trajectory.at(k, d);
    const Vector u = control(estimator.theta_hat(), phi, reference, xi);
    const Vector x_next = plant_step(theta, phi, u, eps);
    if (!x_next.allFinite() || x_next.norm() > kDivergenceThreshold) {
      throw SimulationAborted("closed loop diverged at step " + std::to_string(k), k);
    }
    const Vector pi = (theta - estimator.theta_hat()).transpose() * phi;
    if (!config.freeze_estimator) {
      try {
        estimator.update(phi, x_next, u);
      } catch (const NumericalError& e) {
        throw SimulationAborted(std::string(e.what()) + " (step " + std::to_string(k) + ")", k);
      }
    }
    cost.add(x_next - reference);
    noise_mean.add(eps + xi);
    gamma_mean.add(eps);
    history.push(x_next, u);

    if (observer) {
      observer(StepView{k, x_next, reference, pi, eps, xi, cost, noise_mean, estimator});
    }
    if (k % config.record_stride == 0) {
      TraceRow row;
      row.step = k;
      row.output = x_next;
      row.control = u;
      row.reference = reference;
      row.regressor = phi;
      row.prediction_error = pi;
      row.eps = eps;
      row.xi = xi;
      row.cost = cost.mean();
      row.noise_mean = noise_mean.mean();
      row.gamma_mean = gamma_mean.mean();
      row.error_sq = estimator.error_norm(theta);
      row.s_n = s_before;
      if (config.diagnostics) {
        row.weight = estimator.last_weight();
        const auto range =
            linalg::symmetric_eigen_range(estimator.s_raw() / static_cast<double>(k));
        row.s_eig_min = range.min;
        row.s_eig_max = range.max;
      }
      result.trace.rows.push_back(std::move(row));
    }
  }
  result.cost = cost.mean();
  result.noise_mean = noise_mean.mean();
  result.gamma_mean = gamma_mean.mean();
  result.steps = config.horizon;
  return result;
}

void write_trace_csv(std::ostream& out, const SimTrace& trace) {
  const int d = trace.d;
  out << "step";
  for (const char* name : {"X", "U", "x"}) {
    for (int i = 1; i <= d; ++i) out << ',' << name << i;
  }
  out << ",pi_norm,error_sq,tr_C,tr_Delta,s_n";
  if (trace.diagnostics) out << ",weight,s_eig_min,s_eig_max";
  out << '\n';
  using linalg::format_double;
  for (const auto& row : trace.rows) {
    out << row.step;
    for (const Vector* v : {&row.output, &row.control, &row.reference}) {
      for (Eigen::Index i = 0; i < v->size(); ++i) out << ',' << format_double((*v)(i));
    }
    out << ',' << format_double(row.prediction_error.norm()) << ','
        << format_double(row.error_sq) << ',' << format_double(row.cost.trace()) << ','
        << format_double(row.noise_mean.trace()) << ',' << format_double(row.s_n);
    if (trace.diagnostics) {
      out << ',' << format_double(row.weight) << ',' << format_double(row.s_eig_min) << ','
          << format_double(row.s_eig_max);
    }
    out << '\n';
  }
}

}  // namespace arx
