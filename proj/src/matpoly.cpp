#include "arx/matpoly.hpp"

#include "arx/error.hpp"

#include <Eigen/Eigenvalues>

namespace arx {

namespace {

void require_square(const MatrixList& list, int d, const char* name) {
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto& m = list[i];
    if (m.rows() != d || m.cols() != d) {
      throw ConfigError(std::string("model.") + name + std::to_string(i + 1) +
                        ": expected " + std::to_string(d) + "x" + std::to_string(d) +
                        ", got " + std::to_string(m.rows()) + "x" +
                        std::to_string(m.cols()));
    }
    if (!m.allFinite()) {
      throw ConfigError(std::string("model.") + name + std::to_string(i + 1) +
                        ": non-finite entries");
    }
  }
}

}  // namespace

ArxModel::ArxModel(MatrixList a, MatrixList b, Matrix gamma, Matrix delta)
    : d_(static_cast<int>(gamma.rows())),
      a_(std::move(a)),
      b_(std::move(b)),
      gamma_(std::move(gamma)),
      delta_(std::move(delta)) {
  if (a_.empty()) throw ConfigError("model.p: at least one A matrix is required (p >= 1)");
  if (b_.empty()) throw ConfigError("model.q: at least one B matrix is required (q >= 1)");
  if (d_ < 1) throw ConfigError("model.Gamma: dimension must be at least 1");
  require_square(a_, d_, "A");
  require_square(b_, d_, "B");
  if (delta_.rows() != d_ || delta_.cols() != d_) {
    throw ConfigError("model.Delta: expected " + std::to_string(d_) + "x" +
                      std::to_string(d_));
  }
  linalg::require_spd(gamma_, "model.Gamma");
  linalg::require_spd(delta_, "model.Delta");
}

Matrix ArxModel::theta() const {
  Matrix theta(regressor_dim(), d_);
  Eigen::Index row = 0;
  for (const auto& m : a_) {
    theta.middleRows(row, d_) = m.transpose();
    row += d_;
  }
  for (const auto& m : b_) {
    theta.middleRows(row, d_) = m.transpose();
    row += d_;
  }
  return theta;
}

ArxModel ArxModel::with_covariances(Matrix gamma, Matrix delta) const {
  return ArxModel(a_, b_, std::move(gamma), std::move(delta));
}

Matrix companion_of_b(const ArxModel& model) {
  const int d = model.d();
  const int q = model.q();
  Matrix c = Matrix::Zero(d * q, d * q);
  for (int j = 0; j < q; ++j) {
    linalg::block(c, 0, j, d) = -model.b()[static_cast<std::size_t>(j)].transpose();
  }
  for (int i = 1; i < q; ++i) {
    linalg::block(c, i, i - 1, d).setIdentity();
  }
  return c;
}

double spectral_radius(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(m, false);
  if (es.info() != Eigen::Success) {
    throw NumericalError("eigenvalue computation of the companion matrix failed");
  }
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Causality is_causal(const ArxModel& model, double margin) {
  const double rho = spectral_radius(companion_of_b(model));
  return {rho <= 1.0 - margin, rho};
}

}  // namespace arx
