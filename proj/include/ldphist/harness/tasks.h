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

// Stand-alone tasks behind the command-line tool: an empirical privacy check
// and one-shot estimation from a point set.

#ifndef LDPHIST_HARNESS_TASKS_H_
#define LDPHIST_HARNESS_TASKS_H_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "ldphist/estimator.h"
#include "ldphist/internal/status_macros.h"
#include "ldphist/mechanism.h"
#include "ldphist/partition.h"
#include "ldphist/random.h"

namespace ldphist::harness {

struct LdpCheckResult {
  double alpha = 0.0;
  double sigma_w = 0.0;
  std::size_t cells = 0;
  int trials = 0;
  // Largest log density ratio over all evaluated (x, x', z).
  double max_log_ratio = 0.0;
  // Largest ratio among pairs lying in different active cells.
  double max_log_ratio_distinct = 0.0;
  bool within_alpha = false;
  bool reaches_alpha = false;
};

// Draws `trials` pairs (x, x') of points inside random active cells and one
// released vector z ~ q(. | x) per pair, and evaluates the log density ratio
// at z and at the all-zero vector.
inline absl::StatusOr<LdpCheckResult> LdpCheck(double alpha, int d, double h,
                                               double r, int trials,
                                               std::uint64_t seed) {
  LDPHIST_ASSIGN_OR_RETURN(const PrivacyParams params,
                           PrivacyParams::ForAlpha(alpha));
  LDPHIST_ASSIGN_OR_RETURN(const PartitionSpec spec,
                           PartitionSpec::Create(d, h, r));
  LDPHIST_ASSIGN_OR_RETURN(const ActiveCells cells,
                           ActiveCells::Enumerate(spec));
  if (cells.count() == 0) {
    return absl::FailedPreconditionError("ldp-check: no active cells");
  }
  if (trials < 1) {
    return absl::InvalidArgumentError("ldp-check: trials must be >= 1");
  }
  Rng rng(seed);
  auto random_point = [&](std::vector<double>& x) {
    const std::size_t j = static_cast<std::size_t>(
        UniformOpen01(rng) * static_cast<double>(cells.count()));
    const CellId& id = cells[std::min(j, cells.count() - 1)];
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = (static_cast<double>(id.coords[i]) + UniformOpen01(rng)) * h;
    }
  };

  LdpCheckResult out;
  out.alpha = alpha;
  out.sigma_w = params.sigma_w();
  out.cells = cells.count();
  out.trials = trials;
  std::vector<double> x(d), x_prime(d);
  const std::vector<double> zero(cells.count(), 0.0);
  for (int t = 0; t < trials; ++t) {
    random_point(x);
    random_point(x_prime);
    const PrivatizedRecord z = Privatize(x, spec, cells, params, rng);
    const bool distinct =
        cells.FindPoint(spec, x) != cells.FindPoint(spec, x_prime);
    for (const std::vector<double>* v : {&z.w, &zero}) {
      LDPHIST_ASSIGN_OR_RETURN(
          const double ratio,
          LdpLogRatio(params, spec, cells, x, x_prime, *v));
      out.max_log_ratio = std::max(out.max_log_ratio, ratio);
      if (distinct) {
        out.max_log_ratio_distinct =
            std::max(out.max_log_ratio_distinct, ratio);
      }
    }
  }
  out.within_alpha = out.max_log_ratio <= alpha + 1e-9;
  out.reaches_alpha = out.max_log_ratio_distinct >= 0.999 * alpha;
  return out;
}

struct EstimateOptions {
  double alpha = 1.0;
  double h = 0.1;
  double r = 1.0;
  std::uint64_t seed = 0;
  bool privacy = true;
  bool clip_normalize = false;
};

// Builds the private (or, with privacy off, the empirical) histogram of a
// point set. With privacy on, every point is released through the Laplace
// mechanism with one stream seeded by `seed`, and only the aggregate is kept.
inline absl::StatusOr<Histogram> EstimateFromPoints(
    const PointSet& data, const EstimateOptions& options) {
  if (data.empty()) {
    return absl::InvalidArgumentError("estimate: no input points");
  }
  LDPHIST_ASSIGN_OR_RETURN(const PartitionSpec spec,
                           PartitionSpec::Create(data.d(), options.h,
                                                 options.r));
  LDPHIST_ASSIGN_OR_RETURN(ActiveCells enumerated,
                           ActiveCells::Enumerate(spec));
  auto cells = std::make_shared<const ActiveCells>(std::move(enumerated));
  std::optional<Histogram> hist;
  if (options.privacy) {
    LDPHIST_ASSIGN_OR_RETURN(const PrivacyParams params,
                             PrivacyParams::ForAlpha(options.alpha));
    Rng rng(options.seed);
    CellCounts counts(cells->count());
    for (std::size_t i = 0; i < data.size(); ++i) {
      PrivatizeStream(data[i], spec, *cells, params, rng, counts);
    }
    LDPHIST_ASSIGN_OR_RETURN(Histogram built,
                             BuildPrivateHistogram(counts, params, spec,
                                                   cells));
    hist.emplace(std::move(built));
  } else {
    LDPHIST_ASSIGN_OR_RETURN(EmpiricalHistogram built,
                             BuildEmpiricalHistogram(data, spec, cells));
    hist.emplace(std::move(built.histogram));
  }
  if (options.clip_normalize) return ClipNormalize(*hist);
  return std::move(*hist);
}

}  // namespace ldphist::harness

#endif  // LDPHIST_HARNESS_TASKS_H_
