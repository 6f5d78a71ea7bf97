#pragma once

#include "arx/linalg.hpp"

namespace arx {

/// Multidimensional ARX(p, q) model
///
///   A(R) X_n = B(R) U_{n-1} + eps_n,
///   A(z) = I - A_1 z - ... - A_p z^p,  B(z) = I + B_1 z + ... + B_q z^q,
///
/// with driven-noise covariance Gamma and excitation covariance Delta.
/// Immutable once constructed; the constructor enforces every invariant.
class ArxModel {
 public:
  ArxModel(MatrixList a, MatrixList b, Matrix gamma, Matrix delta);

  int d() const noexcept { return d_; }
  int p() const noexcept { return static_cast<int>(a_.size()); }
  int q() const noexcept { return static_cast<int>(b_.size()); }
  /// Regressor dimension d (p + q).
  int regressor_dim() const noexcept { return d_ * (p() + q()); }

  const MatrixList& a() const noexcept { return a_; }
  const MatrixList& b() const noexcept { return b_; }
  const Matrix& a(int i) const { return a_.at(static_cast<std::size_t>(i - 1)); }
  const Matrix& b(int j) const { return b_.at(static_cast<std::size_t>(j - 1)); }
  const Matrix& gamma() const noexcept { return gamma_; }
  const Matrix& delta() const noexcept { return delta_; }

  /// The (d(p+q)) x d parameter matrix whose transpose is (A_1..A_p, B_1..B_q).
  Matrix theta() const;

  /// Same model with noise covariances replaced.
  ArxModel with_covariances(Matrix gamma, Matrix delta) const;

 private:
  int d_;
  MatrixList a_;
  MatrixList b_;
  Matrix gamma_;
  Matrix delta_;
};

/// Block companion matrix of dimension dq. Its top block row is
/// (-B_1^t, ..., -B_q^t) and the sub-diagonal blocks are identities, so the
/// stacked transposes (D_k^t; ...; D_{k-q+1}^t) = C (D_{k-1}^t; ...; D_{k-q}^t).
/// Its eigenvalues are the reciprocals of the zeros of det B(z), padded
/// with zeros when deg det B < dq.
Matrix companion_of_b(const ArxModel& model);

/// Largest eigenvalue modulus of a general real square matrix.
double spectral_radius(const Matrix& m);

struct Causality {
  bool causal;
  double spectral_radius;
};

inline constexpr double kDefaultCausalityMargin = 1e-6;

/// B is causal when every zero of det B(z) lies outside the unit disk, i.e.
/// spectral_radius(companion) <= 1 - margin.
Causality is_causal(const ArxModel& model, double margin = kDefaultCausalityMargin);

}  // namespace arx
