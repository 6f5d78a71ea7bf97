#pragma once

#include "arx/series.hpp"

namespace arx {

/// Limiting covariance of the regressor under excited tracking:
///
///   Lambda = | L  K^t |      S = H - K L^{-1} K^t
///            | K  H   |
///
/// L is dp x dp, K is dq x dp, H is dq x dq.
struct LimitSet {
  Matrix h;
  Matrix k;
  Matrix l;
  Matrix lambda;
  Matrix s;
  Matrix lambda_inv;
  double det_lambda = 0.0;
  /// Delta - Delta (Gamma + Delta)^{-1} Delta.
  Matrix sigma;
};

/// H_i = sum_{k>=i} P_k Gamma P_{k-i+1}^t + sum_{k>=i-1} Q_k Delta Q_{k-i+1}^t
/// for i = 1..q, laid out block-Toeplitz: block (r, c) = H_{c-r+1} for
/// c >= r and H_{r-c+1}^t below the diagonal.
Matrix compute_h(const SeriesTable& series, const Matrix& gamma, const Matrix& delta,
                 int q);

/// Block i of the lag-covariance list H_i (i >= 1).
Matrix h_block(const SeriesTable& series, const Matrix& gamma, const Matrix& delta,
               int i);

/// K_i = P_i Gamma + Q_i Delta (K_0 = Delta); block (r, c) = K_{c-r} for
/// c >= r, zero otherwise. Covers both the p >= q and p <= q shapes.
Matrix compute_k(const SeriesTable& series, const Matrix& gamma, const Matrix& delta,
                 int p, int q);

/// blockdiag(Gamma + Delta, ..., Gamma + Delta), p copies. Gamma and Delta must be SPD.
Matrix compute_l(const Matrix& gamma, const Matrix& delta, int p);

/// Lambda = [[L, K^t], [K, H]]. Only h, k, l and lambda are filled.
LimitSet assemble_lambda(Matrix h, Matrix k, Matrix l);

/// Completes S, Lambda^{-1} (blockwise), det Lambda = det(Gamma + Delta)^p det(S)
/// and Sigma. L^{-1} is built from the single d x d block (Gamma + Delta)^{-1}.
/// Throws NumericalError when S is numerically singular.
LimitSet schur_and_invert(LimitSet limit, const Matrix& gamma, const Matrix& delta);

/// Full pipeline from a model and its series table.
LimitSet compute_limit_set(const ArxModel& model, const SeriesTable& series);
LimitSet compute_limit_set(const ArxModel& model);

/// The three terms of the series decomposition of S:
///   S = P_arr blockdiag(Gamma) P_arr^t + Q_arr blockdiag(Delta) Q_arr^t + R,
/// where block (r, j) of P_arr / Q_arr holds P / Q of index p - r + j
/// (r, j zero-based; zero for negative index), and R = V blockdiag(Sigma) V^t
/// with block (r, c) of the dq x dp matrix V equal to D_{c-r}.
struct SchurDecomposition {
  Matrix noise_term;
  Matrix excitation_term;
  Matrix remainder;
  Matrix s() const { return noise_term + excitation_term + remainder; }
};

enum class LowerBlock {
  /// Rows p+1..q of R are zero: the Q array already carries their Delta terms.
  absorbed,
  /// Adds blockdiag(Delta) of order d(q-p) to R's lower-right block.
  explicit_delta,
};

SchurDecomposition schur_decomposition(const ArxModel& model, const SeriesTable& series,
                                       LowerBlock lower = LowerBlock::absorbed);

struct CrossCheck {
  double max_discrepancy;
  double tolerance;
  bool pass;
};

/// Default tolerance: 10 * tail_bound scaled by the accumulated coefficient
/// and covariance norms.
double cross_check_tolerance(const ArxModel& model, const SeriesTable& series);

/// Compares S from the Schur formula against the series decomposition.
CrossCheck cross_check_schur(const ArxModel& model, const SeriesTable& series,
                             const LimitSet& limit, double tol);
CrossCheck cross_check_schur(const ArxModel& model, const SeriesTable& series,
                             const LimitSet& limit);

}  // namespace arx
