#include "arx/error.hpp"
#include "arx/models.hpp"
#include "arx/sim.hpp"

#include <gtest/gtest.h>

#include <sstream>

using arx::Matrix;
using arx::SimConfig;

namespace {

SimConfig benchmark(std::int64_t n, std::uint64_t seed = 1) {
  SimConfig c{arx::benchmark_model()};
  c.horizon = n;
  c.seed = seed;
  return c;
}

std::string csv_of(const arx::SimResult& r) {
  std::ostringstream out;
  arx::write_trace_csv(out, r.trace);
  return out.str();
}

}  // namespace

TEST(Simulation, ZeroHorizon) {
  const auto r = arx::run(benchmark(0));
  EXPECT_TRUE(r.trace.rows.empty());
  EXPECT_EQ(r.estimator.theta_hat(), Matrix::Zero(4, 2));
  const std::string csv = csv_of(r);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1);
  EXPECT_EQ(csv.rfind("step,", 0), 0u);
}

TEST(Simulation, OracleFrozenRunHasNoPredictionError) {
  auto c = benchmark(500);
  c.theta0 = c.model.theta();
  c.freeze_estimator = true;
  const auto r = arx::run(c);
  for (const auto& row : r.trace.rows) {
    EXPECT_LT(row.prediction_error.norm(), 1e-12);
    EXPECT_LT((row.cost - row.noise_mean).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Simulation, SameSeedIsByteIdentical) {
  EXPECT_EQ(csv_of(arx::run(benchmark(300, 5))), csv_of(arx::run(benchmark(300, 5))));
  EXPECT_NE(csv_of(arx::run(benchmark(300, 5))), csv_of(arx::run(benchmark(300, 6))));
}

TEST(Simulation, ExcitationOffDrawsNoXi) {
  auto c = benchmark(50);
  c.excitation_on = false;
  const auto r = arx::run(c);
  for (const auto& row : r.trace.rows) EXPECT_EQ(row.xi.norm(), 0.0);
}

// The noise stream for epsilon does not depend on whether xi is drawn.
TEST(Simulation, EpsilonStreamIndependentOfExcitation) {
  auto on = benchmark(50, 9), off = benchmark(50, 9);
  off.excitation_on = false;
  const auto a = arx::run(on), b = arx::run(off);
  for (std::size_t k = 0; k < a.trace.rows.size(); ++k) {
    EXPECT_EQ(a.trace.rows[k].eps, b.trace.rows[k].eps);
  }
}

TEST(Simulation, TrackingErrorIdentity) {
  const auto r = arx::run(benchmark(100, 3));
  for (const auto& row : r.trace.rows) {
    const auto lhs = row.output - row.reference;
    const auto rhs = row.prediction_error + row.eps + row.xi;
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-9 * (1 + lhs.norm()));
  }
}

TEST(Simulation, FinalErrorFiniteAndPositive) {
  const auto r = arx::run(benchmark(1000, 2));
  const double e = r.estimator.error_norm(arx::benchmark_model().theta());
  EXPECT_TRUE(std::isfinite(e));
  EXPECT_GT(e, 0.0);
  EXPECT_LT(e, 0.1);
}

TEST(Simulation, DecayingTrajectory) {
  const arx::Trajectory t{arx::TrajectoryKind::decaying, 2.0};
  EXPECT_EQ(t.at(0, 2).norm(), 0.0);
  EXPECT_NEAR(t.at(4, 2).norm(), 1.0, 1e-15);
}

TEST(Simulation, DivergenceAborts) {
  // A badly wrong frozen estimate on an unstable plant explodes.
  auto c = benchmark(2000);
  Matrix wrong = Matrix::Zero(4, 2);
  wrong(0, 0) = -10;
  c.theta0 = wrong;
  c.freeze_estimator = true;
  EXPECT_THROW(arx::run(c), arx::SimulationAborted);
}
