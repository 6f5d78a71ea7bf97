#include "arx/linalg.hpp"

#include "arx/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace arx::linalg {

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

EigenRange symmetric_eigen_range(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericalError("symmetric eigenvalue decomposition failed");
  }
  const auto& ev = es.eigenvalues();
  return {ev.minCoeff(), ev.maxCoeff()};
}

bool is_positive_definite(const Matrix& m) {
  if (m.rows() != m.cols() || m.size() == 0 || !m.allFinite()) return false;
  const auto range = symmetric_eigen_range(m);
  return range.max > 0.0 && range.min > kPdRelativeThreshold * range.max;
}

bool is_symmetric(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

void require_spd(const Matrix& m, const std::string& what) {
  if (m.rows() != m.cols()) {
    throw ConfigError(what + ": expected a square matrix, got " +
                      std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  if (!m.allFinite()) throw ConfigError(what + ": non-finite entries");
  if (!is_symmetric(m)) throw ConfigError(what + ": matrix is not symmetric");
  if (!is_positive_definite(m)) {
    throw ConfigError(what + ": matrix is not positive definite");
  }
}

Matrix spd_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m));
  if (es.info() != Eigen::Success) throw NumericalError("spd_sqrt: eigensolver failed");
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw NumericalError("spd_sqrt: matrix is not positive definite");
  }
  return es.operatorSqrt();
}

Matrix spd_inverse_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m));
  if (es.info() != Eigen::Success) {
    throw NumericalError("spd_inverse_sqrt: eigensolver failed");
  }
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw NumericalError("spd_inverse_sqrt: matrix is not positive definite");
  }
  return es.operatorInverseSqrt();
}

double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

namespace {

std::vector<double> parse_row(const std::string& row) {
  std::vector<double> out;
  const char* p = row.data();
  const char* end = row.data() + row.size();
  while (p < end) {
    while (p < end && (*p == ' ' || *p == '\t' || *p == ',')) ++p;
    if (p == end) break;
    if (*p == '+') ++p;
    double v = 0.0;
    auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc() || next == p) {
      throw ConfigError("cannot parse number near '" + std::string(p, end) + "'");
    }
    out.push_back(v);
    p = next;
  }
  return out;
}

}  // namespace

Matrix parse_matrix(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::stringstream ss(text);
  std::string row;
  while (std::getline(ss, row, ';')) {
    auto values = parse_row(row);
    if (values.empty()) continue;
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw ConfigError("empty matrix");
  const auto cols = rows.front().size();
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) {
      throw ConfigError("ragged matrix: row " + std::to_string(i + 1) + " has " +
                        std::to_string(rows[i].size()) + " entries, expected " +
                        std::to_string(cols));
    }
    for (std::size_t j = 0; j < cols; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string format_matrix(const Matrix& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (i > 0) out += "; ";
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ' ';
      out += format_double(m(i, j));
    }
  }
  return out;
}

}  // namespace arx::linalg
