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

// Cubic partition of R^d anchored at the origin.
//
// Cell k = (k_1, ..., k_d) is the half-open cube
//   [k_1 h, (k_1 + 1) h) x ... x [k_d h, (k_d + 1) h).
// The active cells are those whose closure lies within distance r of the
// origin, i.e. every cell meeting the closed ball of radius r plus, possibly,
// a few cells that only touch it on a removed face (a null set).

#ifndef LDPHIST_PARTITION_H_
#define LDPHIST_PARTITION_H_

#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "absl/container/flat_hash_map.h"
#include "absl/container/inlined_vector.h"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"

namespace ldphist {

class PartitionSpec {
 public:
  static absl::StatusOr<PartitionSpec> Create(int d, double h, double r) {
    if (d < 1) {
      return absl::InvalidArgumentError(
          absl::StrCat("PartitionSpec: dimension must be >= 1, got ", d));
    }
    if (!(h > 0.0) || !std::isfinite(h)) {
      return absl::InvalidArgumentError(
          absl::StrCat("PartitionSpec: bandwidth must be positive, got ", h));
    }
    if (!(r > 0.0) || !std::isfinite(r)) {
      return absl::InvalidArgumentError(
          absl::StrCat("PartitionSpec: radius must be positive, got ", r));
    }
    return PartitionSpec(d, h, r);
  }

  int d() const { return d_; }
  double h() const { return h_; }
  double r() const { return r_; }

 private:
  PartitionSpec(int d, double h, double r) : d_(d), h_(h), r_(r) {}

  int d_;
  double h_;
  double r_;
};

using CellCoords = absl::InlinedVector<std::int64_t, 4>;

struct CellId {
  CellCoords coords;

  friend bool operator==(const CellId&, const CellId&) = default;
  friend std::strong_ordering operator<=>(const CellId& a, const CellId& b) {
    return std::lexicographical_compare_three_way(
        a.coords.begin(), a.coords.end(), b.coords.begin(), b.coords.end());
  }
  template <typename H>
  friend H AbslHashValue(H state, const CellId& id) {
    return H::combine(std::move(state), id.coords);
  }
};

// h^d.
inline double CellVolume(const PartitionSpec& spec) {
  return std::pow(spec.h(), spec.d());
}

// Floor of x / h per axis. No validation; callers on hot paths have already
// checked their inputs.
inline CellId LocateUnchecked(const PartitionSpec& spec,
                              std::span<const double> x) {
  CellId id;
  id.coords.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    id.coords[i] = static_cast<std::int64_t>(std::floor(x[i] / spec.h()));
  }
  return id;
}

// Returns the cell containing x. The index is floor(x_i / h) computed in
// double precision, so points within an ulp of a cell edge may land in the
// neighbouring cell relative to exact arithmetic.
inline absl::StatusOr<CellId> Locate(const PartitionSpec& spec,
                                     std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(spec.d())) {
    return absl::InvalidArgumentError(absl::StrCat(
        "Locate: point has ", x.size(), " coordinates, expected ", spec.d()));
  }
  constexpr double kIndexLimit = 0x1.0p62;
  for (double xi : x) {
    if (!std::isfinite(xi)) {
      return absl::InvalidArgumentError("Locate: non-finite coordinate");
    }
    if (std::abs(xi / spec.h()) >= kIndexLimit) {
      return absl::OutOfRangeError(
          "Locate: coordinate too large for a 64-bit cell index");
    }
  }
  return LocateUnchecked(spec, x);
}

// Lower corner of the cell along one axis.
inline double CellLower(const PartitionSpec& spec, const CellId& id,
                        std::size_t axis) {
  return static_cast<double>(id.coords[axis]) * spec.h();
}

// Squared Euclidean distance from the origin to the closed cube of `id`.
inline double ClosedCellDistanceSquared(const PartitionSpec& spec,
                                        const CellId& id) {
  double total = 0.0;
  for (std::size_t i = 0; i < id.coords.size(); ++i) {
    const double lo = static_cast<double>(id.coords[i]) * spec.h();
    const double hi = static_cast<double>(id.coords[i] + 1) * spec.h();
    double dist = 0.0;
    if (lo > 0.0) {
      dist = lo;
    } else if (hi < 0.0) {
      dist = -hi;
    }
    total += dist * dist;
  }
  return total;
}

namespace internal {

// Per-axis distance of the closed interval [k h, (k + 1) h] from 0.
inline double AxisDistance(std::int64_t k, double h) {
  const double lo = static_cast<double>(k) * h;
  const double hi = static_cast<double>(k + 1) * h;
  if (lo > 0.0) return lo;
  if (hi < 0.0) return -hi;
  return 0.0;
}

// Index range [first, last] of cells along one axis whose distance from 0 is
// at most sqrt(budget_sq). Candidates around the analytic bound are checked
// with the same test used everywhere else so enumeration and counting agree.
inline std::pair<std::int64_t, std::int64_t> AxisRange(double h,
                                                       double budget_sq) {
  const std::int64_t guess =
      static_cast<std::int64_t>(std::floor(std::sqrt(budget_sq) / h));
  std::int64_t last = guess + 2;
  while (last > 0) {
    const double dist = AxisDistance(last, h);
    if (dist * dist <= budget_sq) break;
    --last;
  }
  std::int64_t first = -guess - 3;
  while (first < -1) {
    const double dist = AxisDistance(first, h);
    if (dist * dist <= budget_sq) break;
    ++first;
  }
  return {first, last};
}

inline std::uint64_t CountRecursive(const PartitionSpec& spec, int axis,
                                    double remaining_sq, std::uint64_t cap) {
  const auto [first, last] = AxisRange(spec.h(), remaining_sq);
  if (axis == spec.d() - 1) {
    return static_cast<std::uint64_t>(last - first + 1);
  }
  std::uint64_t total = 0;
  for (std::int64_t k = first; k <= last; ++k) {
    const double dist = AxisDistance(k, spec.h());
    total += CountRecursive(spec, axis + 1, remaining_sq - dist * dist, cap);
    if (total > cap) return total;
  }
  return total;
}

}  // namespace internal

// Number of active cells, computed without materialising them. Counting stops
// early once the running total exceeds `cap`.
inline std::uint64_t CountActiveCells(
    const PartitionSpec& spec,
    std::uint64_t cap = std::numeric_limits<std::uint64_t>::max()) {
  return internal::CountRecursive(spec, 0, spec.r() * spec.r(), cap);
}

// The ordered list of active cells and its inverse lookup.
class ActiveCells {
 public:
  static constexpr std::uint64_t kDefaultCellBudget = 10'000'000;

  // Lists every cell whose closure is within distance r of the origin, in
  // lexicographic order of coordinates. Fails with ResourceExhausted when the
  // count exceeds `cell_budget`.
  static absl::StatusOr<ActiveCells> Enumerate(
      const PartitionSpec& spec,
      std::uint64_t cell_budget = kDefaultCellBudget) {
    const std::uint64_t count = CountActiveCells(spec, cell_budget);
    if (count > cell_budget) {
      return absl::ResourceExhaustedError(absl::StrCat(
          "ActiveCells: ", count, "+ cells exceed the budget of ", cell_budget,
          " (d=", spec.d(), ", h=", spec.h(), ", r=", spec.r(), ")"));
    }
    ActiveCells out;
    out.cells_.reserve(count);
    CellId current;
    current.coords.resize(spec.d());
    out.EnumerateRecursive(spec, 0, spec.r() * spec.r(), current);
    out.lookup_.reserve(out.cells_.size());
    for (std::size_t i = 0; i < out.cells_.size(); ++i) {
      out.lookup_.emplace(out.cells_[i], i);
    }
    return out;
  }

  const std::vector<CellId>& cells() const { return cells_; }
  std::size_t count() const { return cells_.size(); }
  const CellId& operator[](std::size_t i) const { return cells_[i]; }

  // Position of `id` in the list, if active.
  std::optional<std::size_t> Find(const CellId& id) const {
    auto it = lookup_.find(id);
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
  }

  // Position of the active cell containing x, if any.
  std::optional<std::size_t> FindPoint(const PartitionSpec& spec,
                                       std::span<const double> x) const {
    return Find(LocateUnchecked(spec, x));
  }

 private:
  void EnumerateRecursive(const PartitionSpec& spec, int axis,
                          double remaining_sq, CellId& current) {
    const auto [first, last] = internal::AxisRange(spec.h(), remaining_sq);
    for (std::int64_t k = first; k <= last; ++k) {
      current.coords[axis] = k;
      if (axis == spec.d() - 1) {
        cells_.push_back(current);
      } else {
        const double dist = internal::AxisDistance(k, spec.h());
        EnumerateRecursive(spec, axis + 1, remaining_sq - dist * dist,
                           current);
      }
    }
  }

  std::vector<CellId> cells_;
  absl::flat_hash_map<CellId, std::size_t> lookup_;
};

// Polynomial bandwidth and radius schedules:
//   h_n = c_h * n^(-a),  r_n = c_r * n^b.
class ScheduleSpec {
 public:
  static absl::StatusOr<ScheduleSpec> Create(double c_h, double a, double c_r,
                                             double b) {
    if (!(c_h > 0.0) || !std::isfinite(c_h) || !(c_r > 0.0) ||
        !std::isfinite(c_r)) {
      return absl::InvalidArgumentError(
          "ScheduleSpec: c_h and c_r must be positive and finite");
    }
    if (!std::isfinite(a) || !std::isfinite(b)) {
      return absl::InvalidArgumentError(
          "ScheduleSpec: exponents must be finite");
    }
    return ScheduleSpec(c_h, a, c_r, b);
  }

  double c_h() const { return c_h_; }
  double a() const { return a_; }
  double c_r() const { return c_r_; }
  double b() const { return b_; }

  double BandwidthAt(std::uint64_t n) const {
    return c_h_ * std::pow(static_cast<double>(n), -a_);
  }
  double RadiusAt(std::uint64_t n) const {
    return c_r_ * std::pow(static_cast<double>(n), b_);
  }

 private:
  ScheduleSpec(double c_h, double a, double c_r, double b)
      : c_h_(c_h), a_(a), c_r_(c_r), b_(b) {}

  double c_h_;
  double a_;
  double c_r_;
  double b_;
};

enum class ScheduleMode { kUpc, kSuc, kRate };

inline const char* ScheduleModeName(ScheduleMode mode) {
  switch (mode) {
    case ScheduleMode::kUpc:
      return "UPC";
    case ScheduleMode::kSuc:
      return "SUC";
    case ScheduleMode::kRate:
      return "LIP";
  }
  return "?";
}

struct ScheduleViolation {
  std::string row;        // "UPC", "SUC" or "LIP"
  std::string condition;  // the limit that fails, in words
};

struct ScheduleReport {
  bool pass = true;
  std::vector<ScheduleViolation> violations;
  std::vector<std::string> notes;
};

// Checks polynomial exponents against the privatised-histogram conditions:
//   UPC: h_n -> 0, r_n -> oo, n h_n^(2d) / log n -> oo
//   SUC: UPC plus n h_n^d / (r_n^d log n) -> oo
//   LIP: a == 1 / (2d + 2)
// Exponent inequalities are strict and log factors are ignored. b == 0 is
// accepted with a note (support-known regime, r_n constant).
inline ScheduleReport ValidateSchedule(int d, const ScheduleSpec& s,
                                       ScheduleMode mode) {
  ScheduleReport report;
  auto fail = [&report](std::string row, std::string condition) {
    report.pass = false;
    report.violations.push_back({std::move(row), std::move(condition)});
  };
  const double dd = static_cast<double>(d);
  if (mode == ScheduleMode::kRate) {
    const double target = 1.0 / (2.0 * dd + 2.0);
    if (std::abs(s.a() - target) > 1e-12) {
      fail("LIP", absl::StrCat("h_n exponent a=", s.a(),
                               " differs from 1/(2d+2)=", target));
    }
    return report;
  }
  if (!(s.a() > 0.0)) {
    fail("UPC", "h_n -> 0 requires a > 0");
  }
  if (s.b() < 0.0) {
    fail("UPC", "r_n -> infinity requires b >= 0");
  } else if (s.b() == 0.0) {
    report.notes.push_back(
        "b = 0: support-known regime, r_n held constant");
  }
  if (!(1.0 - 2.0 * dd * s.a() > 0.0)) {
    fail("UPC", "n h_n^(2d) / log n -> infinity requires 1 - 2da > 0");
  }
  if (mode == ScheduleMode::kSuc) {
    if (!(1.0 - dd * s.a() - dd * s.b() > 0.0)) {
      fail("SUC",
           "n h_n^d / (r_n^d log n) -> infinity requires 1 - da - db > 0");
    }
  }
  return report;
}

}  // namespace ldphist

#endif  // LDPHIST_PARTITION_H_
