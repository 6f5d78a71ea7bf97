#include "arx/models.hpp"

#include <cmath>

namespace arx {

ArxModel benchmark_model() {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 2.0;
  Matrix b = Matrix::Zero(2, 2);
  b(0, 0) = 0.75;
  b(1, 1) = -0.5;
  return ArxModel({a}, {b}, Matrix::Identity(2, 2), Matrix::Identity(2, 2));
}

namespace {

Matrix gaussian(std::mt19937_64& rng, int rows, int cols, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = normal(rng);
  }
  return m;
}

Matrix random_spd(std::mt19937_64& rng, int d) {
  const Matrix g = gaussian(rng, d, d, 1.0);
  return g * g.transpose() / d + 0.5 * Matrix::Identity(d, d);
}

}  // namespace

ArxModel random_causal_model(std::mt19937_64& rng, int d, int p, int q, double radius,
                             double a_scale) {
  MatrixList a;
  for (int i = 0; i < p; ++i) a.push_back(gaussian(rng, d, d, a_scale));
  MatrixList b;
  for (int j = 0; j < q; ++j) b.push_back(gaussian(rng, d, d, 1.0));
  const Matrix gamma = random_spd(rng, d);
  const Matrix delta = random_spd(rng, d);

  // B_j -> t^j B_j scales every companion eigenvalue by t.
  const double rho = is_causal(ArxModel(a, b, gamma, delta)).spectral_radius;
  if (rho > 0.0) {
    const double t = radius / rho;
    double factor = 1.0;
    for (auto& bj : b) {
      factor *= t;
      bj *= factor;
    }
  }
  return ArxModel(std::move(a), std::move(b), gamma, delta);
}

}  // namespace arx
