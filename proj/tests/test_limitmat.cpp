#include "arx/limitmat.hpp"
#include "arx/models.hpp"

#include <gtest/gtest.h>

#include <random>

using arx::ArxModel;
using arx::Matrix;

TEST(LimitMatrix, BenchmarkGoldenValues) {
  const auto limit = arx::compute_limit_set(arx::benchmark_model());
  Matrix h(2, 2);
  h << 576, 0, 0, 28;
  EXPECT_LT((limit.h - h / 21.0).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_NEAR(limit.det_lambda, 1885.0 / 21.0, 1e-9);
  Matrix s(2, 2);
  s << 377.0 / 14.0, 0, 0, 5.0 / 6.0;
  EXPECT_LT((limit.s - s).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(LimitMatrix, ZeroCoefficientModel) {
  const Matrix z = Matrix::Zero(2, 2), i = Matrix::Identity(2, 2);
  const auto limit = arx::compute_limit_set(ArxModel({z}, {z}, i, i));
  Matrix expected(4, 4);
  expected << 2 * i, i, i, i;
  EXPECT_LT((limit.lambda - expected).cwiseAbs().maxCoeff(), 1e-14);
}

// Diagonal ARX(1,1) with Gamma = Delta = I: H = I + (A^2 + (A+B)^2)(I - B^2)^{-1}.
TEST(LimitMatrix, DiagonalClosedFormH) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ua(-2, 2), ub(-0.9, 0.9);
  for (int t = 0; t < 10; ++t) {
    Matrix a = Matrix::Zero(3, 3), b = Matrix::Zero(3, 3);
    for (int k = 0; k < 3; ++k) {
      a(k, k) = ua(rng);
      b(k, k) = ub(rng);
    }
    const Matrix i = Matrix::Identity(3, 3);
    const auto limit = arx::compute_limit_set(ArxModel({a}, {b}, i, i));
    const Matrix expected = i + (a * a + (a + b) * (a + b)) * (i - b * b).inverse();
    EXPECT_LT((limit.h - expected).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(LimitMatrix, BlockwiseInverseAndDeterminantMatchDense) {
  std::mt19937_64 rng(10);
  for (int t = 0; t < 20; ++t) {
    const int d = 1 + t % 3, p = 1 + (t / 3) % 3, q = 1 + (t / 9) % 3;
    const auto m = arx::random_causal_model(rng, d, p, q);
    const auto limit = arx::compute_limit_set(m);
    const Matrix dense_inv = limit.lambda.inverse();
    EXPECT_LT((limit.lambda_inv - dense_inv).cwiseAbs().maxCoeff() /
                  dense_inv.cwiseAbs().maxCoeff(),
              1e-9);
    const double det = limit.lambda.determinant();
    EXPECT_NEAR(limit.det_lambda / det, 1.0, 1e-9);
    EXPECT_LT((limit.lambda - limit.lambda.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(LimitMatrix, SchurDecompositionMatchesBothBranches) {
  std::mt19937_64 rng(11);
  for (auto [p, q] : {std::pair{3, 1}, {2, 2}, {1, 3}, {2, 3}}) {
    const auto m = arx::random_causal_model(rng, 2, p, q);
    const auto series = arx::make_series(m);
    const auto limit = arx::compute_limit_set(m, series);
    const auto check = arx::cross_check_schur(m, series, limit);
    EXPECT_TRUE(check.pass) << p << "," << q << " " << check.max_discrepancy;
  }
}

// The variant with an explicit Delta block in the lower corner double-counts
// the excitation when p < q.
TEST(LimitMatrix, ExplicitDeltaVariantDisagreesWhenPBelowQ) {
  std::mt19937_64 rng(12);
  const auto m = arx::random_causal_model(rng, 2, 1, 3);
  const auto series = arx::make_series(m);
  const auto limit = arx::compute_limit_set(m, series);
  const auto variant = arx::schur_decomposition(m, series, arx::LowerBlock::explicit_delta);
  EXPECT_GT((variant.s() - limit.s).cwiseAbs().maxCoeff(), 0.1);
}

TEST(LimitMatrix, SigmaFormula) {
  const auto m = arx::benchmark_model();
  const auto limit = arx::compute_limit_set(m);
  const Matrix expected =
      m.delta() - m.delta() * (m.gamma() + m.delta()).inverse() * m.delta();
  EXPECT_LT((limit.sigma - expected).cwiseAbs().maxCoeff(), 1e-14);
}
