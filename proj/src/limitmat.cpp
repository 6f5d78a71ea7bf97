#include "arx/limitmat.hpp"

#include "arx/error.hpp"

#include <algorithm>
#include <cmath>

namespace arx {

namespace {

const Matrix& at(const MatrixList& list, int k) {
  return list[static_cast<std::size_t>(k)];
}

}  // namespace

Matrix h_block(const SeriesTable& series, const Matrix& gamma, const Matrix& delta,
               int i) {
  const auto d = gamma.rows();
  Matrix h = Matrix::Zero(d, d);
  // P_0 = 0, so the P-sum may start at k = i - 1 as well.
  for (int k = std::max(i - 1, 0); k <= series.kmax; ++k) {
    const int lag = k - i + 1;
    h.noalias() += at(series.p, k) * gamma * at(series.p, lag).transpose();
    h.noalias() += at(series.q, k) * delta * at(series.q, lag).transpose();
  }
  return h;
}

Matrix compute_h(const SeriesTable& series, const Matrix& gamma, const Matrix& delta,
                 int q) {
  const auto d = gamma.rows();
  MatrixList blocks;
  for (int i = 1; i <= q; ++i) blocks.push_back(h_block(series, gamma, delta, i));
  Matrix h(d * q, d * q);
  for (int r = 0; r < q; ++r) {
    for (int c = 0; c < q; ++c) {
      linalg::block(h, r, c, d) = c >= r ? at(blocks, c - r)
                                         : Matrix(at(blocks, r - c).transpose());
    }
  }
  return h;
}

Matrix compute_k(const SeriesTable& series, const Matrix& gamma, const Matrix& delta,
                 int p, int q) {
  const auto d = gamma.rows();
  if (series.kmax < p - 1) throw ConfigError("compute_k: series shorter than p");
  MatrixList blocks;
  for (int i = 0; i < p; ++i) {
    blocks.push_back(at(series.p, i) * gamma + at(series.q, i) * delta);
  }
  Matrix k = Matrix::Zero(d * q, d * p);
  for (int r = 0; r < q; ++r) {
    for (int c = r; c < p; ++c) linalg::block(k, r, c, d) = at(blocks, c - r);
  }
  return k;
}

Matrix compute_l(const Matrix& gamma, const Matrix& delta, int p) {
  linalg::require_spd(gamma, "Gamma");
  linalg::require_spd(delta, "Delta");
  if (gamma.rows() != delta.rows()) throw ConfigError("Gamma and Delta dimensions differ");
  if (p < 1) throw ConfigError("compute_l: p must be at least 1");
  const auto d = gamma.rows();
  Matrix l = Matrix::Zero(d * p, d * p);
  const Matrix sum = gamma + delta;
  for (int i = 0; i < p; ++i) linalg::block(l, i, i, d) = sum;
  return l;
}

LimitSet assemble_lambda(Matrix h, Matrix k, Matrix l) {
  if (k.rows() != h.rows() || k.cols() != l.rows()) {
    throw ConfigError("assemble_lambda: block dimensions do not match");
  }
  const auto dp = l.rows();
  const auto dq = h.rows();
  LimitSet out;
  out.lambda.resize(dp + dq, dp + dq);
  out.lambda.topLeftCorner(dp, dp) = l;
  out.lambda.topRightCorner(dp, dq) = k.transpose();
  out.lambda.bottomLeftCorner(dq, dp) = k;
  out.lambda.bottomRightCorner(dq, dq) = h;
  out.h = std::move(h);
  out.k = std::move(k);
  out.l = std::move(l);
  return out;
}

LimitSet schur_and_invert(LimitSet limit, const Matrix& gamma, const Matrix& delta) {
  const auto d = gamma.rows();
  const auto dp = limit.l.rows();
  const auto dq = limit.h.rows();
  const int p = static_cast<int>(dp / d);

  const Matrix sum = gamma + delta;
  Eigen::LLT<Matrix> sum_llt(sum);
  if (sum_llt.info() != Eigen::Success) {
    throw NumericalError("Gamma + Delta is not positive definite");
  }
  const Matrix sum_inv = sum_llt.solve(Matrix::Identity(d, d));
  Matrix l_inv = Matrix::Zero(dp, dp);
  for (int i = 0; i < p; ++i) linalg::block(l_inv, i, i, d) = sum_inv;

  limit.s = linalg::symmetrize(limit.h - limit.k * l_inv * limit.k.transpose());
  const auto range = linalg::symmetric_eigen_range(limit.s);
  if (!(range.max > 0.0) || range.min < linalg::kPdRelativeThreshold * range.max) {
    throw NumericalError(
        "Schur complement S is numerically singular (smallest eigenvalue " +
        linalg::format_double(range.min) + ", largest " +
        linalg::format_double(range.max) +
        "); check causality of B and positive definiteness of Delta");
  }
  Eigen::LLT<Matrix> s_llt(limit.s);
  if (s_llt.info() != Eigen::Success) {
    throw NumericalError("Cholesky factorization of S failed");
  }
  const Matrix s_inv = s_llt.solve(Matrix::Identity(dq, dq));

  const Matrix l_inv_kt = l_inv * limit.k.transpose();  // L^{-1} K^t
  const Matrix l_inv_kt_s_inv = l_inv_kt * s_inv;      // L^{-1} K^t S^{-1}
  limit.lambda_inv.resize(dp + dq, dp + dq);
  limit.lambda_inv.topLeftCorner(dp, dp) = l_inv + l_inv_kt_s_inv * l_inv_kt.transpose();
  limit.lambda_inv.topRightCorner(dp, dq) = -l_inv_kt_s_inv;
  limit.lambda_inv.bottomLeftCorner(dq, dp) = -l_inv_kt_s_inv.transpose();
  limit.lambda_inv.bottomRightCorner(dq, dq) = s_inv;

  double det_s = 1.0;
  for (Eigen::Index i = 0; i < dq; ++i) {
    const double diag = s_llt.matrixLLT()(i, i);
    det_s *= diag * diag;
  }
  limit.det_lambda = std::pow(sum.determinant(), p) * det_s;
  limit.sigma = linalg::symmetrize(delta - delta * sum_inv * delta);
  return limit;
}

LimitSet compute_limit_set(const ArxModel& model, const SeriesTable& series) {
  const auto& gamma = model.gamma();
  const auto& delta = model.delta();
  auto partial = assemble_lambda(compute_h(series, gamma, delta, model.q()),
                                 compute_k(series, gamma, delta, model.p(), model.q()),
                                 compute_l(gamma, delta, model.p()));
  return schur_and_invert(std::move(partial), gamma, delta);
}

LimitSet compute_limit_set(const ArxModel& model) {
  return compute_limit_set(model, make_series(model));
}

SchurDecomposition schur_decomposition(const ArxModel& model, const SeriesTable& series,
                                       LowerBlock lower) {
  const int d = model.d();
  const int p = model.p();
  const int q = model.q();
  const int kmax = series.kmax;
  const Matrix& gamma = model.gamma();
  const Matrix& delta = model.delta();

  // Column j of the arrays carries index p - r + j in row r; the last useful
  // column is the one whose top row reaches kmax.
  const int columns = kmax - p + 1;
  SchurDecomposition out;
  out.noise_term = Matrix::Zero(d * q, d * q);
  out.excitation_term = Matrix::Zero(d * q, d * q);
  if (columns > 0) {
    Matrix p_arr = Matrix::Zero(d * q, d * columns);
    Matrix q_arr = Matrix::Zero(d * q, d * columns);
    for (int r = 0; r < q; ++r) {
      for (int j = 0; j < columns; ++j) {
        const int index = p - r + j;
        if (index < 0 || index > kmax) continue;
        linalg::block(p_arr, r, j, d) = at(series.p, index);
        linalg::block(q_arr, r, j, d) = at(series.q, index);
      }
    }
    // blockdiag(G) applied column-block by column-block.
    Matrix p_weighted(p_arr.rows(), p_arr.cols());
    Matrix q_weighted(q_arr.rows(), q_arr.cols());
    for (int j = 0; j < columns; ++j) {
      p_weighted.middleCols(j * d, d) = p_arr.middleCols(j * d, d) * gamma;
      q_weighted.middleCols(j * d, d) = q_arr.middleCols(j * d, d) * delta;
    }
    out.noise_term = p_weighted * p_arr.transpose();
    out.excitation_term = q_weighted * q_arr.transpose();
  }

  const Matrix sigma = delta - delta * (gamma + delta).llt().solve(delta);
  Matrix v = Matrix::Zero(d * q, d * p);
  for (int r = 0; r < q; ++r) {
    for (int c = r; c < p; ++c) linalg::block(v, r, c, d) = at(series.d, c - r);
  }
  Matrix v_weighted(v.rows(), v.cols());
  for (int c = 0; c < p; ++c) v_weighted.middleCols(c * d, d) = v.middleCols(c * d, d) * sigma;
  out.remainder = v_weighted * v.transpose();
  if (lower == LowerBlock::explicit_delta && q > p) {
    for (int r = p; r < q; ++r) linalg::block(out.remainder, r, r, d) += delta;
  }
  return out;
}

double cross_check_tolerance(const ArxModel& model, const SeriesTable& series) {
  double accumulated = 0.0;
  for (int k = 0; k <= series.kmax; ++k) {
    accumulated += linalg::operator_norm(at(series.d, k)) +
                   linalg::operator_norm(at(series.p, k)) +
                   linalg::operator_norm(at(series.q, k));
  }
  const double cov = linalg::operator_norm(model.gamma()) + linalg::operator_norm(model.delta());
  return 10.0 * series.tail_bound * std::max(1.0, accumulated) * std::max(1.0, cov);
}

CrossCheck cross_check_schur(const ArxModel& model, const SeriesTable& series,
                             const LimitSet& limit, double tol) {
  const Matrix decomposed = schur_decomposition(model, series).s();
  const double discrepancy = (limit.s - decomposed).cwiseAbs().maxCoeff();
  return {discrepancy, tol, discrepancy <= tol};
}

CrossCheck cross_check_schur(const ArxModel& model, const SeriesTable& series,
                             const LimitSet& limit) {
  return cross_check_schur(model, series, limit, cross_check_tolerance(model, series));
}

}  // namespace arx
