#include "arx/mc.hpp"
#include "arx/models.hpp"

#include <boost/math/distributions/normal.hpp>
#include <gtest/gtest.h>

#include <algorithm>
#include <random>

namespace mc = arx::mc;
using arx::Matrix;
using arx::Vector;

namespace {

mc::EnsembleConfig small_ensemble(int runs, int n) {
  mc::EnsembleConfig c{arx::SimConfig{arx::benchmark_model()}};
  c.base.horizon = n;
  c.runs = runs;
  c.base_seed = 100;
  return c;
}

}  // namespace

TEST(Normality, CdfMatchesBoost) {
  const boost::math::normal n01;
  for (double x = -8; x <= 8; x += 0.37) {
    EXPECT_NEAR(mc::standard_normal_cdf(x), boost::math::cdf(n01, x), 1e-15);
  }
}

TEST(Normality, QuantileConstruction) {
  const boost::math::normal n01;
  for (int m : {10, 100, 500}) {
    std::vector<double> s;
    for (int i = 1; i <= m; ++i) s.push_back(boost::math::quantile(n01, (i - 0.5) / m));
    EXPECT_LE(mc::ks_normality(s), 1.0 / (2 * m) + 1e-6);
  }
}

TEST(Normality, PointMassAndSortInvariance) {
  std::vector<double> zeros(50, 0.0);
  EXPECT_DOUBLE_EQ(mc::ks_normality(zeros), 0.5);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n01;
  std::vector<double> s(300);
  for (auto& v : s) v = n01(rng);
  const double ks = mc::ks_normality(s);
  std::sort(s.begin(), s.end());
  EXPECT_EQ(mc::ks_normality(s), ks);
}

TEST(Normality, FalseRejectionRateNearFivePercent) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n01;
  int rejected = 0;
  const int trials = 400;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> s(500);
    for (auto& v : s) v = n01(rng);
    rejected += mc::ks_normality(s) >= 0.0608;
  }
  EXPECT_LT(rejected, trials * 0.09);
}

TEST(CltStatistic, Identities) {
  const Matrix theta = Matrix::Ones(2, 1);
  const Matrix i2 = Matrix::Identity(2, 2), i1 = Matrix::Identity(1, 1);
  EXPECT_EQ(mc::clt_statistic(theta, theta, i2, i1, 100).norm(), 0.0);
  Matrix v(2, 1);
  v << 0.3, -1.2;
  const Vector z = mc::clt_statistic(theta + v / 10.0, theta, i2, i1, 100);
  EXPECT_NEAR(z(0), 0.3, 1e-14);
  EXPECT_NEAR(z(1), -1.2, 1e-14);
  // Degree 1/2 in n and linear in the error.
  const Vector z4 = mc::clt_statistic(theta + 2 * v / 10.0, theta, i2, i1, 400);
  EXPECT_LT((z4 - 4 * z).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CltStatistic, RowMajorFlattening) {
  const Matrix err = (Matrix(2, 2) << 1, 2, 3, 4).finished();
  const Vector z = mc::clt_statistic(err, Matrix::Zero(2, 2), Matrix::Identity(2, 2),
                                     Matrix::Identity(2, 2), 1);
  EXPECT_EQ(z, (Vector(4) << 1, 2, 3, 4).finished());
}

TEST(Lil, TrackerOracleAndScaling) {
  mc::LilTracker zero(Vector::Ones(2), Vector::Ones(4), 20, 100);
  for (int n = 1; n <= 100; ++n) zero.observe(n, Matrix::Zero(4, 2));
  EXPECT_EQ(zero.sup(), 0.0);

  const Matrix err = Matrix::Constant(4, 2, 0.01);
  mc::LilTracker base(Vector::Unit(2, 0), Vector::Unit(4, 0), 50, 100);
  mc::LilTracker scaled(3 * Vector::Unit(2, 0), Vector::Unit(4, 0), 50, 100);
  for (int n = 1; n <= 100; ++n) {
    base.observe(n, err);
    scaled.observe(n, err);
  }
  EXPECT_NEAR(scaled.sup(), 3 * base.sup(), 1e-15);
  const auto limit = arx::compute_limit_set(arx::benchmark_model());
  const mc::LilDirections d1{Vector::Unit(2, 0), Vector::Unit(4, 0)};
  const mc::LilDirections d3{3 * Vector::Unit(2, 0), Vector::Unit(4, 0)};
  const Matrix gamma = Matrix::Identity(2, 2);
  EXPECT_NEAR(mc::lil_predicted(d3, limit.lambda_inv, gamma),
              3 * mc::lil_predicted(d1, limit.lambda_inv, gamma), 1e-14);
}

TEST(Lil, OnlyWindowAboveEeCounts) {
  mc::LilTracker t(Vector::Ones(1), Vector::Ones(1), 1, 15);
  for (int n = 1; n <= 15; ++n) t.observe(n, Matrix::Constant(1, 1, n <= 15 ? 1.0 : 0.0));
  // e^e ~ 15.15, so no point qualifies.
  EXPECT_EQ(t.sup(), 0.0);
}

TEST(Ensemble, ParallelMatchesSerial) {
  auto c = small_ensemble(12, 300);
  c.workers = 4;
  const auto par = mc::run_ensemble(c);
  const auto ser = mc::run_ensemble_serial(c);
  EXPECT_EQ(par.z, ser.z);
  EXPECT_EQ(par.ks, ser.ks);
  ASSERT_EQ(par.rates.size(), ser.rates.size());
  for (std::size_t i = 0; i < par.rates.size(); ++i) {
    EXPECT_EQ(par.rates[i].error_ratio_median, ser.rates[i].error_ratio_median);
  }
}

TEST(Ensemble, AggregationIsOrderIndependent) {
  const auto c = small_ensemble(10, 200);
  const auto ctx = mc::make_context(c);
  std::vector<mc::RunOutcome> outcomes;
  for (int i = 0; i < c.runs; ++i) outcomes.push_back(mc::simulate_run(c, ctx, i));
  const auto forward = mc::aggregate(c, ctx, outcomes);
  std::mt19937_64 rng(1);
  std::shuffle(outcomes.begin(), outcomes.end(), rng);
  const auto shuffled = mc::aggregate(c, ctx, outcomes);
  EXPECT_EQ(forward.z, shuffled.z);
  EXPECT_EQ(forward.z_mean, shuffled.z_mean);
  EXPECT_EQ(forward.lil->ratio_max, shuffled.lil->ratio_max);
}

TEST(Ensemble, SingleRunMatchesSimulation) {
  const auto c = small_ensemble(1, 400);
  const auto summary = mc::run_ensemble(c);
  auto sim = c.base;
  sim.seed = c.base_seed;
  const auto r = arx::run(sim);
  ASSERT_EQ(summary.completed.size(), 1u);
  EXPECT_EQ(summary.completed[0].theta_hat, r.estimator.theta_hat());
  EXPECT_EQ(summary.z.rows(), 1);
  EXPECT_EQ(summary.z.cols(), 8);
}

TEST(Ensemble, OracleRunsHaveZeroRates) {
  auto c = small_ensemble(3, 200);
  c.base.theta0 = c.base.model.theta();
  c.base.freeze_estimator = true;
  const auto s = mc::run_ensemble(c);
  for (const auto& row : s.rates) {
    EXPECT_EQ(row.error_ratio_median, 0.0);
    EXPECT_LT(row.cost_ratio_p90, 1e-9);
  }
  EXPECT_EQ(s.lil->ratio_max, 0.0);
}

TEST(Ensemble, Quantile) {
  EXPECT_DOUBLE_EQ(mc::quantile({3, 1, 2}, 0.5), 2.0);
  EXPECT_DOUBLE_EQ(mc::quantile({1, 2, 3, 4}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(mc::quantile({1, 2, 3, 4, 5}, 0.9), 4.6);
}
