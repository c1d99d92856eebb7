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

// Monte Carlo experiments: single replications, rate studies and the
// bias/stochastic-error split.
//
// A replication is a pure function of (config, n, rep): data are drawn from
// the stream SeedDerive(master, n, rep, kData) and privatised with the
// stream SeedDerive(master, n, rep, kPrivatize). Points are streamed straight
// into per-cell accumulators, so memory is O(number of cells), not O(n N).

#ifndef LDPHIST_HARNESS_EXPERIMENT_H_
#define LDPHIST_HARNESS_EXPERIMENT_H_

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "ldphist/densities.h"
#include "ldphist/estimator.h"
#include "ldphist/harness/config.h"
#include "ldphist/internal/status_macros.h"
#include "ldphist/mechanism.h"
#include "ldphist/metrics.h"
#include "ldphist/partition.h"
#include "ldphist/random.h"

namespace ldphist::harness {

struct ReplicationRow {
  EstimatorKind estimator;
  std::int64_t n;
  int replication;
  double h;
  double r;
  double l1_error;
  double total_mass;
  std::uint64_t seed;
  double wall_time_ms;
  bool converged;
};

struct ReplicationOutput {
  std::vector<ReplicationRow> rows;
  // One histogram per row, in the same order.
  std::vector<Histogram> estimates;
};

// Largest Euclidean norm over the corners of `box`.
inline double MaxCornerNorm(const Box& box) {
  double total = 0.0;
  for (std::size_t i = 0; i < box.dim(); ++i) {
    const double m = std::max(std::abs(box.lo[i]), std::abs(box.hi[i]));
    total += m * m;
  }
  return std::sqrt(total);
}

class Experiment {
 public:
  static absl::StatusOr<Experiment> Create(const ExperimentConfig& cfg) {
    LDPHIST_RETURN_IF_ERROR(ValidateConfig(cfg));
    LDPHIST_ASSIGN_OR_RETURN(
        DensityModel model,
        BuildBuiltinModel(cfg.density, cfg.d, cfg.density_params));
    Rng probe(SeedDerive(cfg.master_seed, 0, 0, StreamRole::kProbe));
    LDPHIST_ASSIGN_OR_RETURN(Sampler sampler, Sampler::Create(model, probe));
    LDPHIST_ASSIGN_OR_RETURN(const PrivacyParams params,
                             PrivacyParams::ForAlpha(cfg.alpha));
    return Experiment(cfg, std::move(model), std::move(sampler), params);
  }

  const ExperimentConfig& config() const { return cfg_; }
  const DensityModel& model() const { return model_; }

  double BandwidthAt(std::int64_t n) const {
    return cfg_.c_h * std::pow(static_cast<double>(n), -cfg_.a);
  }
  // r_n = c_r n^b, or the support's corner norm plus one cell when c_r is
  // "auto".
  double RadiusAt(std::int64_t n) const {
    if (cfg_.c_r) {
      return *cfg_.c_r * std::pow(static_cast<double>(n), cfg_.b);
    }
    return MaxCornerNorm(model_.support()) + BandwidthAt(n);
  }

  absl::StatusOr<ReplicationOutput> RunDetailed(std::int64_t n,
                                                int rep) const {
    const auto start = std::chrono::steady_clock::now();
    const double h = BandwidthAt(n);
    const double r = RadiusAt(n);
    LDPHIST_ASSIGN_OR_RETURN(const PartitionSpec spec,
                             PartitionSpec::Create(cfg_.d, h, r));
    LDPHIST_ASSIGN_OR_RETURN(ActiveCells enumerated,
                             ActiveCells::Enumerate(spec));
    auto cells = std::make_shared<const ActiveCells>(std::move(enumerated));
    const std::size_t n_cells = cells->count();

    const std::uint64_t data_seed = SeedDerive(
        cfg_.master_seed, static_cast<std::uint64_t>(n),
        static_cast<std::uint64_t>(rep), StreamRole::kData);
    Rng data_rng(data_seed);
    Rng noise_rng(SeedDerive(cfg_.master_seed, static_cast<std::uint64_t>(n),
                             static_cast<std::uint64_t>(rep),
                             StreamRole::kPrivatize));

    const bool want_private = cfg_.Wants(EstimatorKind::kPrivate);
    const bool want_mean = cfg_.Wants(EstimatorKind::kMeanNoise);
    const bool want_raw = cfg_.Wants(EstimatorKind::kNonPrivate);
    CellCounts counts(n_cells);
    NoiseSums sums(n_cells);
    TeeSink<CellCounts, NoiseSums> both{&counts, &sums};
    std::vector<std::int64_t> raw(n_cells, 0);
    std::vector<double> x(static_cast<std::size_t>(cfg_.d));
    for (std::int64_t i = 0; i < n; ++i) {
      sampler_.Draw(data_rng, x);
      if (want_raw) {
        if (const auto j = cells->FindPoint(spec, x)) ++raw[*j];
      }
      if (want_private && want_mean) {
        PrivatizeStream(x, spec, *cells, params_, noise_rng, both);
      } else if (want_private) {
        PrivatizeStream(x, spec, *cells, params_, noise_rng, counts);
      } else if (want_mean) {
        PrivatizeStream(x, spec, *cells, params_, noise_rng, sums);
      }
    }

    ReplicationOutput out;
    const double volume = CellVolume(spec);
    for (EstimatorKind kind :
         {EstimatorKind::kPrivate, EstimatorKind::kNonPrivate,
          EstimatorKind::kMeanNoise}) {
      if (!cfg_.Wants(kind)) continue;
      std::optional<Histogram> hist;
      switch (kind) {
        case EstimatorKind::kPrivate: {
          LDPHIST_ASSIGN_OR_RETURN(
              Histogram built, BuildPrivateHistogram(counts, params_, spec,
                                                     cells));
          hist.emplace(std::move(built));
          break;
        }
        case EstimatorKind::kNonPrivate: {
          std::vector<double> values(n_cells);
          for (std::size_t j = 0; j < n_cells; ++j) {
            values[j] = static_cast<double>(raw[j]) / static_cast<double>(n) /
                        volume;
          }
          hist.emplace(spec, cells, std::move(values));
          break;
        }
        case EstimatorKind::kMeanNoise:
          hist.emplace(MeanNoiseHistogram(sums, spec, cells));
          break;
      }
      const QuadratureResult err = L1Distance(model_, *hist, cfg_.quad);
      out.rows.push_back(ReplicationRow{kind, n, rep, h, r, err.value,
                                        hist->TotalMass(), data_seed, 0.0,
                                        err.converged});
      out.estimates.push_back(std::move(*hist));
    }
    const double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
    for (auto& row : out.rows) row.wall_time_ms = ms;
    return out;
  }

  absl::StatusOr<std::vector<ReplicationRow>> RunReplication(std::int64_t n,
                                                             int rep) const {
    LDPHIST_ASSIGN_OR_RETURN(ReplicationOutput out, RunDetailed(n, rep));
    return std::move(out.rows);
  }

 private:
  Experiment(ExperimentConfig cfg, DensityModel model, Sampler sampler,
             PrivacyParams params)
      : cfg_(std::move(cfg)),
        model_(std::move(model)),
        sampler_(std::move(sampler)),
        params_(params) {}

  ExperimentConfig cfg_;
  DensityModel model_;
  Sampler sampler_;
  PrivacyParams params_;
};

struct LineFit {
  double slope;
  double intercept;
  // Root mean square of the residuals.
  double residual;
};

// Ordinary least squares through (x, y) points. Needs at least three finite
// points with pairwise distinct x.
inline absl::StatusOr<LineFit> FitSlope(
    const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) {
    return absl::InvalidArgumentError("fit_slope: need at least 3 points");
  }
  std::vector<double> xs;
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : points) {
    if (!std::isfinite(x) || !std::isfinite(y)) {
      return absl::InvalidArgumentError("fit_slope: non-finite point");
    }
    xs.push_back(x);
    mx += x;
    my += y;
  }
  std::sort(xs.begin(), xs.end());
  if (std::adjacent_find(xs.begin(), xs.end()) != xs.end()) {
    return absl::InvalidArgumentError("fit_slope: repeated x value");
  }
  const double m = static_cast<double>(points.size());
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (!(sxx > 0.0)) {
    return absl::InvalidArgumentError("fit_slope: degenerate x spread");
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (const auto& [x, y] : points) {
    const double e = y - (fit.intercept + fit.slope * x);
    rss += e * e;
  }
  fit.residual = std::sqrt(rss / m);
  return fit;
}

struct ErrorSummary {
  std::int64_t n;
  double mean;
  double stderr_mean;
  double mean_abs_mass_deviation;  // mean |total_mass - 1|
  bool all_converged;
};

struct EstimatorSummary {
  EstimatorKind estimator;
  std::vector<ErrorSummary> points;
  std::optional<LineFit> fit;  // log mean L1 against log n
};

struct RateStudyResult {
  std::vector<ReplicationRow> rows;  // sorted by (estimator, n, replication)
  std::vector<EstimatorSummary> summaries;
  std::vector<ScheduleViolation> warnings;
  std::vector<std::string> notes;
};

inline std::vector<EstimatorSummary> Summarize(
    const std::vector<ReplicationRow>& rows,
    const std::vector<EstimatorKind>& estimators) {
  std::vector<EstimatorKind> kinds = estimators;
  std::sort(kinds.begin(), kinds.end());
  kinds.erase(std::unique(kinds.begin(), kinds.end()), kinds.end());
  std::vector<EstimatorSummary> out;
  for (EstimatorKind kind : kinds) {
    EstimatorSummary summary{kind, {}, std::nullopt};
    std::size_t i = 0;
    while (i < rows.size()) {
      if (rows[i].estimator != kind) {
        ++i;
        continue;
      }
      const std::int64_t n = rows[i].n;
      double sum = 0.0, sum_sq = 0.0, mass_dev = 0.0;
      int count = 0;
      bool converged = true;
      for (; i < rows.size() && rows[i].estimator == kind && rows[i].n == n;
           ++i) {
        sum += rows[i].l1_error;
        sum_sq += rows[i].l1_error * rows[i].l1_error;
        mass_dev += std::abs(rows[i].total_mass - 1.0);
        converged = converged && rows[i].converged;
        ++count;
      }
      const double mean = sum / count;
      const double var =
          count > 1 ? std::max(0.0, (sum_sq - count * mean * mean) /
                                        (count - 1))
                    : 0.0;
      summary.points.push_back(ErrorSummary{n, mean, std::sqrt(var / count),
                                            mass_dev / count, converged});
    }
    if (summary.points.size() >= 3) {
      std::vector<std::pair<double, double>> pts;
      for (const auto& p : summary.points) {
        pts.emplace_back(std::log(static_cast<double>(p.n)), std::log(p.mean));
      }
      if (auto fit = FitSlope(pts); fit.ok()) summary.fit = *fit;
    }
    out.push_back(std::move(summary));
  }
  return out;
}

// Runs every (n, replication) pair of the config on `workers` threads.
// Output does not depend on the worker count or on completion order.
inline absl::StatusOr<RateStudyResult> RateStudy(const ExperimentConfig& cfg,
                                                 int workers = 1) {
  if (cfg.n_grid.size() < 3) {
    return absl::InvalidArgumentError("rate_study: n_grid needs >= 3 sizes");
  }
  LDPHIST_ASSIGN_OR_RETURN(const Experiment experiment,
                           Experiment::Create(cfg));
  std::vector<std::pair<std::int64_t, int>> tasks;
  for (std::int64_t n : cfg.n_grid) {
    for (int rep = 0; rep < cfg.replications; ++rep) tasks.emplace_back(n, rep);
  }
  // Largest n first, so long tasks do not trail at the end.
  std::stable_sort(tasks.begin(), tasks.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });

  std::vector<std::vector<ReplicationRow>> results(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mu;
  absl::Status error;
  auto work = [&]() {
    while (true) {
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks.size()) return;
      auto rows = experiment.RunReplication(tasks[t].first, tasks[t].second);
      if (!rows.ok()) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (error.ok()) error = rows.status();
        next.store(tasks.size());
        return;
      }
      results[t] = std::move(*rows);
    }
  };
  {
    std::vector<std::jthread> pool;
    const int count = std::max(1, workers);
    for (int w = 0; w < count; ++w) pool.emplace_back(work);
  }
  if (!error.ok()) return error;

  RateStudyResult out;
  for (auto& rows : results) {
    for (auto& row : rows) out.rows.push_back(row);
  }
  std::sort(out.rows.begin(), out.rows.end(),
            [](const ReplicationRow& a, const ReplicationRow& b) {
              return std::tie(a.estimator, a.n, a.replication) <
                     std::tie(b.estimator, b.n, b.replication);
            });
  out.summaries = Summarize(out.rows, cfg.estimators);

  auto schedule = ScheduleSpec::Create(cfg.c_h, cfg.a, cfg.c_r.value_or(1.0),
                                       cfg.b);
  if (schedule.ok()) {
    const ScheduleReport report =
        ValidateSchedule(cfg.d, *schedule, cfg.schedule_mode);
    out.warnings = report.violations;
    out.notes = report.notes;
  }
  return out;
}

struct BiasVariance {
  double bias;        // L1 distance from f to the average estimate
  double stochastic;  // mean L1 distance from each estimate to the average
  double mean_l1;
  double stderr_l1;
};

// Splits the L1 error of one estimator at sample size n over `reps`
// replications (reps >= 10).
inline absl::StatusOr<BiasVariance> EmpiricalBiasVariance(
    const ExperimentConfig& cfg, std::int64_t n, int reps,
    EstimatorKind estimator) {
  if (reps < 10) {
    return absl::InvalidArgumentError("empirical_bias_variance: reps < 10");
  }
  ExperimentConfig local = cfg;
  local.estimators = {estimator};
  LDPHIST_ASSIGN_OR_RETURN(const Experiment experiment,
                           Experiment::Create(local));
  std::vector<Histogram> estimates;
  std::vector<double> errors;
  for (int rep = 0; rep < reps; ++rep) {
    LDPHIST_ASSIGN_OR_RETURN(ReplicationOutput out,
                             experiment.RunDetailed(n, rep));
    errors.push_back(out.rows.front().l1_error);
    estimates.push_back(std::move(out.estimates.front()));
  }
  std::vector<double> mean_values(estimates.front().values().size(), 0.0);
  for (const auto& e : estimates) {
    for (std::size_t j = 0; j < mean_values.size(); ++j) {
      mean_values[j] += e.values()[j] / reps;
    }
  }
  const Histogram average(estimates.front().spec(),
                          estimates.front().shared_cells(),
                          std::move(mean_values));
  BiasVariance out;
  out.bias = L1Distance(experiment.model(), average, local.quad).value;
  double spread = 0.0;
  for (const auto& e : estimates) {
    LDPHIST_ASSIGN_OR_RETURN(const double dist, L1DistanceExact(e, average));
    spread += dist;
  }
  out.stochastic = spread / reps;
  double sum = 0.0, sum_sq = 0.0;
  for (double e : errors) {
    sum += e;
    sum_sq += e * e;
  }
  out.mean_l1 = sum / reps;
  const double var =
      std::max(0.0, (sum_sq - reps * out.mean_l1 * out.mean_l1) / (reps - 1));
  out.stderr_l1 = std::sqrt(var / reps);
  return out;
}

}  // namespace ldphist::harness

#endif  // LDPHIST_HARNESS_EXPERIMENT_H_
