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

// Histogram estimators built from raw or privatised data.
//
// The private estimator only looks at G_j = #{i : W_ij <= 0} / n. Since
// E[G_j | data] = H(0) + mu_n(A_j) (H(-1/sigma_w) - H(0)), inverting gives
//   mu~_j = (1/2 - G_j) / (1/2 - H(-1/sigma_w)),
// and the density estimate is mu~_j / h^d on active cell j, zero elsewhere.
// mu~_j is bounded but can be negative.

#ifndef LDPHIST_ESTIMATOR_H_
#define LDPHIST_ESTIMATOR_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "ldphist/mechanism.h"
#include "ldphist/partition.h"

namespace ldphist {

// Points in R^d stored row-major.
class PointSet {
 public:
  explicit PointSet(int d) : d_(d) {}
  PointSet(int d, std::vector<double> coords)
      : d_(d), coords_(std::move(coords)) {}

  int d() const { return d_; }
  std::size_t size() const { return coords_.size() / d_; }
  bool empty() const { return coords_.empty(); }
  std::span<const double> operator[](std::size_t i) const {
    return std::span<const double>(coords_).subspan(i * d_, d_);
  }
  std::span<double> Append() {
    coords_.resize(coords_.size() + d_);
    return std::span<double>(coords_).subspan(coords_.size() - d_, d_);
  }
  void Reserve(std::size_t n) { coords_.reserve(n * d_); }
  const std::vector<double>& coords() const { return coords_; }

 private:
  int d_;
  std::vector<double> coords_;
};

// Per-cell counts of released entries W_j <= 0. Ties at exactly zero count.
// Doubles as a CellSink for streamed aggregation; counts from disjoint shards
// merge by addition.
class CellCounts {
 public:
  explicit CellCounts(std::size_t n_cells) : le_zero_(n_cells, 0) {}

  void Observe(std::size_t j, double w) {
    if (w <= 0.0) ++le_zero_[j];
  }
  void EndRecord() { ++n_; }

  absl::Status Merge(const CellCounts& other) {
    if (other.le_zero_.size() != le_zero_.size()) {
      return absl::InvalidArgumentError("CellCounts::Merge: size mismatch");
    }
    n_ += other.n_;
    for (std::size_t j = 0; j < le_zero_.size(); ++j) {
      le_zero_[j] += other.le_zero_[j];
    }
    return absl::OkStatus();
  }

  std::int64_t n() const { return n_; }
  std::size_t size() const { return le_zero_.size(); }
  const std::vector<std::int64_t>& le_zero() const { return le_zero_; }
  // Empirical distribution function of W_j at zero.
  double G(std::size_t j) const {
    return n_ == 0 ? 0.0 : static_cast<double>(le_zero_[j]) / n_;
  }

  friend bool operator==(const CellCounts&, const CellCounts&) = default;

 private:
  std::int64_t n_ = 0;
  std::vector<std::int64_t> le_zero_;
};

// Running sums of W_j, for the mean-noise estimator.
class NoiseSums {
 public:
  explicit NoiseSums(std::size_t n_cells) : sums_(n_cells, 0.0) {}

  void Observe(std::size_t j, double w) { sums_[j] += w; }
  void EndRecord() { ++n_; }

  std::int64_t n() const { return n_; }
  const std::vector<double>& sums() const { return sums_; }

 private:
  std::int64_t n_ = 0;
  std::vector<double> sums_;
};

// Forwards every observation to two sinks.
template <CellSink A, CellSink B>
struct TeeSink {
  A* first;
  B* second;
  void Observe(std::size_t j, double w) {
    first->Observe(j, w);
    second->Observe(j, w);
  }
  void EndRecord() {
    first->EndRecord();
    second->EndRecord();
  }
};

inline absl::StatusOr<CellCounts> Aggregate(
    std::span<const PrivatizedRecord> records, std::size_t n_cells) {
  CellCounts counts(n_cells);
  for (const auto& record : records) {
    if (record.w.size() != n_cells) {
      return absl::InvalidArgumentError(absl::StrCat(
          "Aggregate: record of length ", record.w.size(), ", expected ",
          n_cells));
    }
    for (std::size_t j = 0; j < n_cells; ++j) counts.Observe(j, record.w[j]);
    counts.EndRecord();
  }
  return counts;
}

// 1/2 - H(-1/sigma_w), the slope of E[G_j] in mu_n(A_j) (up to sign).
inline double ThresholdContrast(const PrivacyParams& params) {
  return 0.5 - LaplaceCdf(-1.0 / params.sigma_w());
}

inline std::vector<double> MuTilde(const CellCounts& counts,
                                   const PrivacyParams& params) {
  const double denom = ThresholdContrast(params);
  std::vector<double> mu(counts.size());
  for (std::size_t j = 0; j < mu.size(); ++j) {
    mu[j] = (0.5 - counts.G(j)) / denom;
  }
  return mu;
}

// Piecewise-constant function on the active cells of one partition; zero
// outside them.
class Histogram {
 public:
  Histogram(PartitionSpec spec, std::shared_ptr<const ActiveCells> cells,
            std::vector<double> values)
      : spec_(spec), cells_(std::move(cells)), values_(std::move(values)) {}

  const PartitionSpec& spec() const { return spec_; }
  const ActiveCells& cells() const { return *cells_; }
  const std::shared_ptr<const ActiveCells>& shared_cells() const {
    return cells_;
  }
  const std::vector<double>& values() const { return values_; }

  // Value of the containing active cell, 0 elsewhere. Cells are half-open,
  // so a point on a left edge belongs to the cell to its right.
  double Eval(std::span<const double> x) const {
    const auto j = cells_->FindPoint(spec_, x);
    return j ? values_[*j] : 0.0;
  }

  // Integral over R^d: sum_j value_j h^d.
  double TotalMass() const {
    const double volume = CellVolume(spec_);
    double total = 0.0;
    for (double v : values_) total += v * volume;
    return total;
  }

 private:
  PartitionSpec spec_;
  std::shared_ptr<const ActiveCells> cells_;
  std::vector<double> values_;
};

inline double TotalMass(const Histogram& hist) { return hist.TotalMass(); }

inline absl::StatusOr<Histogram> BuildPrivateHistogram(
    const CellCounts& counts, const PrivacyParams& params,
    const PartitionSpec& spec, std::shared_ptr<const ActiveCells> cells) {
  if (counts.size() != cells->count()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "private histogram: ", counts.size(), " counts for ", cells->count(),
        " cells"));
  }
  std::vector<double> values = MuTilde(counts, params);
  const double volume = CellVolume(spec);
  for (double& v : values) v /= volume;
  return Histogram(spec, std::move(cells), std::move(values));
}

struct EmpiricalHistogram {
  Histogram histogram;
  // Fraction of points outside every active cell.
  double outside_mass;
};

inline absl::StatusOr<EmpiricalHistogram> BuildEmpiricalHistogram(
    const PointSet& data, const PartitionSpec& spec,
    std::shared_ptr<const ActiveCells> cells) {
  if (data.empty()) {
    return absl::InvalidArgumentError("empirical histogram: no data");
  }
  std::vector<std::int64_t> counts(cells->count(), 0);
  std::int64_t outside = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto j = cells->FindPoint(spec, data[i]);
    if (j) {
      ++counts[*j];
    } else {
      ++outside;
    }
  }
  const double n = static_cast<double>(data.size());
  const double volume = CellVolume(spec);
  std::vector<double> values(counts.size());
  for (std::size_t j = 0; j < counts.size(); ++j) {
    values[j] = static_cast<double>(counts[j]) / n / volume;
  }
  return EmpiricalHistogram{Histogram(spec, std::move(cells), std::move(values)),
                            static_cast<double>(outside) / n};
}

// Per-cell sample mean of W_j, an unbiased estimate of mu(A_j).
inline std::vector<double> MeanNoiseEstimate(const NoiseSums& sums) {
  std::vector<double> out(sums.sums().size(), 0.0);
  if (sums.n() == 0) return out;
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = sums.sums()[j] / static_cast<double>(sums.n());
  }
  return out;
}

inline absl::StatusOr<std::vector<double>> MeanNoiseEstimate(
    std::span<const PrivatizedRecord> records, std::size_t n_cells) {
  NoiseSums sums(n_cells);
  for (const auto& record : records) {
    if (record.w.size() != n_cells) {
      return absl::InvalidArgumentError("mean-noise: record length mismatch");
    }
    for (std::size_t j = 0; j < n_cells; ++j) sums.Observe(j, record.w[j]);
    sums.EndRecord();
  }
  return MeanNoiseEstimate(sums);
}

inline Histogram MeanNoiseHistogram(const NoiseSums& sums,
                                    const PartitionSpec& spec,
                                    std::shared_ptr<const ActiveCells> cells) {
  std::vector<double> values = MeanNoiseEstimate(sums);
  const double volume = CellVolume(spec);
  for (double& v : values) v /= volume;
  return Histogram(spec, std::move(cells), std::move(values));
}

// Optional post-processing outside the raw estimator: negative values are set
// to zero and the rest rescaled to unit mass. An all-nonpositive histogram
// becomes identically zero.
inline Histogram ClipNormalize(const Histogram& hist) {
  std::vector<double> values = hist.values();
  const double volume = CellVolume(hist.spec());
  double mass = 0.0;
  for (double& v : values) {
    v = std::max(v, 0.0);
    mass += v * volume;
  }
  if (mass > 0.0) {
    for (double& v : values) v /= mass;
  }
  return Histogram(hist.spec(), hist.shared_cells(), std::move(values));
}

}  // namespace ldphist

#endif  // LDPHIST_ESTIMATOR_H_
