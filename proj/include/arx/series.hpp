#pragma once

#include "arx/matpoly.hpp"

namespace arx {

/// Truncated power-series coefficients of
///   B^{-1}(z) = sum D_k z^k,
///   P(z) = B^{-1}(z) (A(z) - I) = sum P_k z^k,
///   Q_k = D_k + P_k,
/// for k = 0..kmax.
struct SeriesTable {
  int kmax = 0;
  MatrixList d;
  MatrixList p;
  MatrixList q;
  /// Spectral radius of the B companion matrix.
  double rho = 0.0;
  /// Geometric rate used for the tail fit, in [rho, 1).
  double rho_fit = 0.0;
  /// Operator-norm bound on the discarded tail sum_{k > kmax} ||M_k|| of any
  /// of the three sequences, plus a floating-point floor.
  double tail_bound = 0.0;
  /// True when the safety cap limited kmax before tail_bound reached the tolerance.
  bool capped = false;
};

struct TruncationOrder {
  int order;
  bool capped;
};

inline constexpr int kDefaultSafetyCap = 10000;
inline constexpr double kDefaultSeriesTolerance = 1e-12;

/// Smallest K >= min_order with c * rho^K < tol, capped at safety_cap.
/// Throws NonCausalError when rho >= 1.
TruncationOrder truncation_order(double rho, double tol, double c, int min_order,
                                 int safety_cap = kDefaultSafetyCap);

/// D_0 = I; D_k = -sum_{j=0}^{k-1} D_j B_{k-j} (k <= q);
/// D_k = -sum_{j=1}^{q} D_{k-j} B_j (k > q).
MatrixList compute_d(const ArxModel& model, int kmax);

/// P_0 = 0; P_k = -sum_{j=0}^{k-1} D_j A_{k-j} (k <= p);
/// P_k = -sum_{j=1}^{p} D_{k-j} A_j (k > p).
MatrixList compute_p(const ArxModel& model, const MatrixList& d, int kmax);

MatrixList compute_q(const MatrixList& d, const MatrixList& p);

struct SeriesOptions {
  double tol = kDefaultSeriesTolerance;
  int safety_cap = kDefaultSafetyCap;
};

/// Computes D, P, Q with an a-posteriori tail certificate. Throws
/// NonCausalError if B is not causal.
SeriesTable make_series(const ArxModel& model, const SeriesOptions& options = {});

/// Geometric tail estimate c * rho_fit^{kmax+1} / (1 - rho_fit), c fitted so
/// that ||M_k|| <= c rho_fit^k on k in [first, kmax] for every M in the lists.
double fitted_tail(const std::vector<const MatrixList*>& sequences, int first,
                   int kmax, double rho_fit);

}  // namespace arx
