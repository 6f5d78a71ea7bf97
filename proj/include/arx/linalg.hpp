#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace arx {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using MatrixList = std::vector<Matrix>;

namespace linalg {

/// Relative eigenvalue threshold used for every positive-definiteness decision.
inline constexpr double kPdRelativeThreshold = 1e-10;

Matrix symmetrize(const Matrix& m);

struct EigenRange {
  double min;
  double max;
};

/// Extreme eigenvalues of (M + M^t) / 2.
EigenRange symmetric_eigen_range(const Matrix& m);

/// Smallest eigenvalue of the symmetrized matrix exceeds kPdRelativeThreshold
/// times the largest (and the largest is positive).
bool is_positive_definite(const Matrix& m);

bool is_symmetric(const Matrix& m, double rel_tol = 1e-12);

/// Throws ConfigError naming `what` unless m is square, symmetric and PD.
void require_spd(const Matrix& m, const std::string& what);

/// Symmetric square root via spectral decomposition. m must be SPD.
Matrix spd_sqrt(const Matrix& m);
Matrix spd_inverse_sqrt(const Matrix& m);

/// Largest singular value.
double operator_norm(const Matrix& m);

/// Block (row, col) of size d x d, as a writable view.
inline auto block(Matrix& m, Eigen::Index row, Eigen::Index col, Eigen::Index d) {
  return m.block(row * d, col * d, d, d);
}
inline auto block(const Matrix& m, Eigen::Index row, Eigen::Index col,
                  Eigen::Index d) {
  return m.block(row * d, col * d, d, d);
}

/// Parses "a b; c d" (rows separated by ';', entries by blanks or commas).
Matrix parse_matrix(const std::string& text);

/// Inverse of parse_matrix with 17 significant digits.
std::string format_matrix(const Matrix& m);

/// "%.17g" formatting, locale independent.
std::string format_double(double x);

}  // namespace linalg
}  // namespace arx
