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

// Laplace privatisation of cell indicators.
//
// A data holder with point x publishes, for every active cell j in list
// order,
//   W_j = 1{x in A_j} + sigma_w * zeta_j,
// where the zeta_j are i.i.d. unit-variance Laplace, density
// exp(-sqrt(2)|z|) / sqrt(2). Two inputs change at most two indicators, so
// the log density ratio of the released vector is at most 2 sqrt(2) / sigma_w;
// sigma_w = 2^(3/2) / alpha therefore gives alpha-LDP.
//
// Reproducibility contract: one uniform draw per cell, in cell-list order,
// mapped through the inverse Laplace CDF. Records whose point lies outside
// every active cell are still released (pure noise).

#ifndef LDPHIST_MECHANISM_H_
#define LDPHIST_MECHANISM_H_

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "ldphist/partition.h"
#include "ldphist/random.h"

namespace ldphist {

// 2^(3/2) / alpha, the smallest noise scale giving alpha-LDP.
inline absl::StatusOr<double> SigmaForAlpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    return absl::InvalidArgumentError(
        absl::StrCat("privacy level alpha must be positive, got ", alpha));
  }
  return 2.0 * std::numbers::sqrt2 / alpha;
}

class PrivacyParams {
 public:
  static absl::StatusOr<PrivacyParams> Create(double alpha, double sigma_w) {
    auto minimum = SigmaForAlpha(alpha);
    if (!minimum.ok()) return minimum.status();
    if (!(sigma_w >= *minimum) || !std::isfinite(sigma_w)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "noise scale sigma_w=", sigma_w, " is below 2^(3/2)/alpha=",
          *minimum));
    }
    return PrivacyParams(alpha, sigma_w);
  }

  // The equality case sigma_w = 2^(3/2) / alpha.
  static absl::StatusOr<PrivacyParams> ForAlpha(double alpha) {
    auto sigma = SigmaForAlpha(alpha);
    if (!sigma.ok()) return sigma.status();
    return PrivacyParams(alpha, *sigma);
  }

  double alpha() const { return alpha_; }
  double sigma_w() const { return sigma_w_; }

 private:
  PrivacyParams(double alpha, double sigma_w)
      : alpha_(alpha), sigma_w_(sigma_w) {}

  double alpha_;
  double sigma_w_;
};

// Distribution function H of the unit-variance Laplace law.
inline double LaplaceCdf(double z) {
  if (z <= 0.0) return 0.5 * std::exp(std::numbers::sqrt2 * z);
  return 1.0 - 0.5 * std::exp(-std::numbers::sqrt2 * z);
}

inline double LaplacePdf(double z) {
  return std::exp(-std::numbers::sqrt2 * std::abs(z)) / std::numbers::sqrt2;
}

// Inverse of LaplaceCdf on (0, 1).
inline double LaplaceQuantile(double u) {
  if (u < 0.5) return std::log(2.0 * u) / std::numbers::sqrt2;
  return -std::log(2.0 * (1.0 - u)) / std::numbers::sqrt2;
}

template <Full64BitGenerator URBG>
double SampleUnitLaplace(URBG& rng) {
  return LaplaceQuantile(UniformOpen01(rng));
}

struct PrivatizedRecord {
  std::vector<double> w;
};

// Receives the released entries of one record, in cell order, followed by
// EndRecord().
template <typename S>
concept CellSink = requires(S sink, std::size_t j, double w) {
  sink.Observe(j, w);
  sink.EndRecord();
};

// Streams W_j for one point into `sink` without materialising the record.
template <Full64BitGenerator URBG, CellSink Sink>
void PrivatizeStream(std::span<const double> x, const PartitionSpec& spec,
                     const ActiveCells& cells, const PrivacyParams& params,
                     URBG& rng, Sink& sink) {
  const std::size_t n_cells = cells.count();
  if (n_cells == 0) return;
  const std::optional<std::size_t> own = cells.FindPoint(spec, x);
  const std::size_t hit = own.value_or(n_cells);
  const double sigma = params.sigma_w();
  for (std::size_t j = 0; j < n_cells; ++j) {
    const double indicator = (j == hit) ? 1.0 : 0.0;
    sink.Observe(j, indicator + sigma * SampleUnitLaplace(rng));
  }
  sink.EndRecord();
}

namespace internal {

struct RecordWriter {
  std::vector<double>* out;
  void Observe(std::size_t j, double w) { (*out)[j] = w; }
  void EndRecord() {}
};

}  // namespace internal

// Materialised form of PrivatizeStream; consumes the same random draws.
template <Full64BitGenerator URBG>
PrivatizedRecord Privatize(std::span<const double> x, const PartitionSpec& spec,
                           const ActiveCells& cells,
                           const PrivacyParams& params, URBG& rng) {
  PrivatizedRecord record;
  record.w.resize(cells.count());
  internal::RecordWriter writer{&record.w};
  PrivatizeStream(x, spec, cells, params, rng, writer);
  return record;
}

// log q(z | x) / q(z | x') for the product of shifted scaled Laplace
// densities:
//   (sqrt(2) / sigma_w) * sum_j (|z_j - 1{x' in A_j}| - |z_j - 1{x in A_j}|).
// Bounded above by 2 sqrt(2) / sigma_w.
inline absl::StatusOr<double> LdpLogRatio(const PrivacyParams& params,
                                          const PartitionSpec& spec,
                                          const ActiveCells& cells,
                                          std::span<const double> x,
                                          std::span<const double> x_prime,
                                          std::span<const double> z) {
  if (z.size() != cells.count()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "LdpLogRatio: |z| = ", z.size(), ", expected ", cells.count()));
  }
  const std::size_t none = cells.count();
  const std::size_t a = cells.FindPoint(spec, x).value_or(none);
  const std::size_t b = cells.FindPoint(spec, x_prime).value_or(none);
  double sum = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    const double shift = (j == a) ? 1.0 : 0.0;
    const double shift_prime = (j == b) ? 1.0 : 0.0;
    sum += std::abs(z[j] - shift_prime) - std::abs(z[j] - shift);
  }
  return std::numbers::sqrt2 / params.sigma_w() * sum;
}

}  // namespace ldphist

#endif  // LDPHIST_MECHANISM_H_
