// Copyright 2026 The ldphist Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ldphist/harness/experiment.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "gtest/gtest.h"
#include "ldphist/harness/config.h"
#include "ldphist/random.h"

namespace ldphist::harness {
namespace {

ExperimentConfig TentConfig(double alpha, double c_h, double a) {
  ExperimentConfig cfg;
  cfg.d = 1;
  cfg.alpha = alpha;
  cfg.density = "tent";
  cfg.c_h = c_h;
  cfg.a = a;
  cfg.c_r = 2.0;
  cfg.b = 0.0;
  cfg.n_grid = {256, 2048, 16384};
  cfg.replications = 2;
  cfg.master_seed = 17;
  cfg.estimators = {EstimatorKind::kPrivate, EstimatorKind::kNonPrivate,
                    EstimatorKind::kMeanNoise};
  cfg.quad = QuadratureSpec::Reference(1);
  return cfg;
}

const ReplicationRow& RowFor(const std::vector<ReplicationRow>& rows,
                             EstimatorKind kind) {
  for (const auto& row : rows) {
    if (row.estimator == kind) return row;
  }
  ADD_FAILURE() << "missing estimator " << EstimatorName(kind);
  return rows.front();
}

TEST(ExperimentTest, ReplicationIsDeterministic) {
  const auto exp = Experiment::Create(TentConfig(1.0, 1.0, 0.25)).value();
  const auto a = exp.RunReplication(2048, 3).value();
  const auto b = exp.RunReplication(2048, 3).value();
  ASSERT_EQ(a.size(), 3u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].l1_error, b[i].l1_error);
    EXPECT_EQ(a[i].total_mass, b[i].total_mass);
    EXPECT_EQ(a[i].seed, b[i].seed);
  }
  const auto c = exp.RunReplication(2048, 4).value();
  EXPECT_NE(a[0].l1_error, c[0].l1_error);
  EXPECT_EQ(a[0].seed, SeedDerive(17, 2048, 3, StreamRole::kData));
}

TEST(ExperimentTest, SingleCellBiasFloor) {
  // With h = 1 the non-private estimate is the indicator of [0, 1) and
  // int |tent - 1| = 1/2.
  auto cfg = TentConfig(1.0, 1.0, 0.0);
  const auto exp = Experiment::Create(cfg).value();
  const auto rows = exp.RunReplication(1 << 16, 0).value();
  EXPECT_NEAR(RowFor(rows, EstimatorKind::kNonPrivate).l1_error, 0.5, 1e-9);
  EXPECT_NEAR(RowFor(rows, EstimatorKind::kPrivate).l1_error, 0.5, 0.1);
  EXPECT_GE(RowFor(rows, EstimatorKind::kPrivate).l1_error, 0.5 - 1e-9);
}

TEST(ExperimentTest, HighAlphaLimit) {
  // As alpha grows the Laplace noise vanishes, so the mean-noise estimator
  // converges to the empirical histogram. The threshold estimator does not:
  // it still sees the sign of zero-mean noise in every cell not containing
  // the point, and keeps a per-cell error of order n^(-1/2).
  const std::int64_t n = 1 << 14;
  const auto hi = Experiment::Create(TentConfig(1e3, 1.0, 0.25)).value();
  const auto lo = Experiment::Create(TentConfig(1.0, 1.0, 0.25)).value();
  double raw = 0, mean_noise = 0, priv_hi = 0, priv_lo = 0;
  const int reps = 5;
  for (int rep = 0; rep < reps; ++rep) {
    const auto rows_hi = hi.RunReplication(n, rep).value();
    const auto rows_lo = lo.RunReplication(n, rep).value();
    raw += RowFor(rows_hi, EstimatorKind::kNonPrivate).l1_error;
    mean_noise += RowFor(rows_hi, EstimatorKind::kMeanNoise).l1_error;
    priv_hi += RowFor(rows_hi, EstimatorKind::kPrivate).l1_error;
    priv_lo += RowFor(rows_lo, EstimatorKind::kPrivate).l1_error;
  }
  EXPECT_NEAR(mean_noise / raw, 1.0, 0.1);
  EXPECT_LT(priv_hi, priv_lo);
  EXPECT_GT(priv_hi, raw);
  // Sign-noise prediction: each empty cell contributes
  // h * 2 E|Bin(n, 1/2)/n - 1/2| / h ~ sqrt(2 / (pi n)).
  const double h = hi.BandwidthAt(n);
  const double empty_cells = 4.0 / h - 1.0 / h;
  const double predicted = empty_cells * std::sqrt(2.0 / (std::numbers::pi * n));
  EXPECT_NEAR((priv_hi - raw) / reps, predicted, 0.5 * predicted);
}

TEST(ExperimentTest, AutoRadiusCoversSupport) {
  auto cfg = TentConfig(1.0, 1.0, 0.25);
  cfg.c_r.reset();
  const auto exp = Experiment::Create(cfg).value();
  EXPECT_NEAR(exp.RadiusAt(256), 1.0 + 0.25, 1e-15);
  const auto rows = exp.RunReplication(256, 0).value();
  EXPECT_NEAR(RowFor(rows, EstimatorKind::kNonPrivate).total_mass, 1.0,
              1e-12);
}

TEST(FitSlopeTest, Examples) {
  std::vector<std::pair<double, double>> line;
  for (double x : {1.0, 2.0, 3.0, 4.0}) line.emplace_back(x, -0.25 * x + 1.0);
  const auto fit = FitSlope(line).value();
  EXPECT_NEAR(fit.slope, -0.25, 1e-15);
  EXPECT_NEAR(fit.intercept, 1.0, 1e-14);
  EXPECT_NEAR(fit.residual, 0.0, 1e-15);

  line.emplace_back(2.0, 0.0);
  EXPECT_FALSE(FitSlope(line).ok());
  EXPECT_FALSE(FitSlope({{1.0, 1.0}, {2.0, 2.0}}).ok());

  Rng rng(8);
  std::vector<std::pair<double, double>> noisy;
  for (int i = 0; i < 6; ++i) {
    const double x = 5.0 + i;
    noisy.emplace_back(x, -x / 3.0 + UniformIn(rng, -1e-9, 1e-9));
  }
  EXPECT_NEAR(FitSlope(noisy).value().slope, -1.0 / 3.0, 1e-8);
}

TEST(RateStudyTest, IndependentOfWorkerCount) {
  auto cfg = TentConfig(1.0, 1.0, 0.25);
  const auto one = RateStudy(cfg, 1).value();
  const auto three = RateStudy(cfg, 3).value();
  ASSERT_EQ(one.rows.size(), three.rows.size());
  ASSERT_EQ(one.rows.size(), 3u * 3u * 2u);
  for (std::size_t i = 0; i < one.rows.size(); ++i) {
    EXPECT_EQ(one.rows[i].estimator, three.rows[i].estimator);
    EXPECT_EQ(one.rows[i].n, three.rows[i].n);
    EXPECT_EQ(one.rows[i].replication, three.rows[i].replication);
    EXPECT_EQ(one.rows[i].l1_error, three.rows[i].l1_error);
  }
  ASSERT_EQ(one.summaries.size(), 3u);
  for (const auto& s : one.summaries) {
    EXPECT_EQ(s.points.size(), 3u);
    EXPECT_TRUE(s.fit.has_value());
  }
  EXPECT_TRUE(one.warnings.empty());
  EXPECT_EQ(one.notes.size(), 1u);
}

TEST(RateStudyTest, ReportsScheduleWarnings) {
  auto cfg = TentConfig(1.0, 1.0, 0.7);
  cfg.replications = 1;
  cfg.estimators = {EstimatorKind::kNonPrivate};
  const auto result = RateStudy(cfg, 1).value();
  ASSERT_FALSE(result.warnings.empty());
  EXPECT_EQ(result.warnings[0].row, "UPC");
}

std::vector<BiasVariance> BandwidthSweep(EstimatorKind kind, int reps) {
  std::vector<BiasVariance> out;
  for (double h : {0.2, 0.1, 0.05}) {
    auto cfg = TentConfig(1.0, h, 0.0);
    cfg.c_r = 1.2;
    out.push_back(EmpiricalBiasVariance(cfg, 1 << 16, reps, kind).value());
  }
  return out;
}

TEST(BiasVarianceTest, NonPrivateBiasShrinksWithBandwidth) {
  const auto results = BandwidthSweep(EstimatorKind::kNonPrivate, 12);
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    EXPECT_LE(r.mean_l1, r.bias + r.stochastic + 3.0 * r.stderr_l1);
    if (i > 0) {
      EXPECT_LT(r.bias, results[i - 1].bias);
      EXPECT_GT(r.stochastic, results[i - 1].stochastic);
    }
  }
}

TEST(BiasVarianceTest, PrivateTradeOffWithinNoise) {
  // The bias estimate is the error of an average of R estimates, so it
  // carries a noise floor of about stochastic / sqrt(R).
  const int reps = 12;
  const auto results = BandwidthSweep(EstimatorKind::kPrivate, reps);
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    EXPECT_LE(r.mean_l1, r.bias + r.stochastic + 3.0 * r.stderr_l1);
    if (i > 0) {
      const double floor = 2.0 * r.stochastic / std::sqrt(reps);
      EXPECT_LT(r.bias, results[i - 1].bias + floor);
      EXPECT_GT(r.stochastic, results[i - 1].stochastic);
    }
  }
  auto cfg = TentConfig(1.0, 0.1, 0.0);
  EXPECT_FALSE(
      EmpiricalBiasVariance(cfg, 1 << 10, 5, EstimatorKind::kPrivate).ok());
}

}  // namespace
}  // namespace ldphist::harness
