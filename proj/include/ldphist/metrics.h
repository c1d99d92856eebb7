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

// Distances between densities and histogram estimates: L1, total variation,
// Kullback-Leibler, Hellinger distance and Hellinger affinity.

#ifndef LDPHIST_METRICS_H_
#define LDPHIST_METRICS_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "ldphist/densities.h"
#include "ldphist/estimator.h"
#include "ldphist/partition.h"
#include "ldphist/quadrature.h"

namespace ldphist {

namespace internal {

struct Piece {
  Box box;
  double value;
};

// Splits the support of `f` along the partition grid. Pieces inside active
// cells carry the histogram value; the rest carry 0. `constant` collects
// |value| times the parts of active cells lying outside the support, where
// f vanishes.
inline std::vector<Piece> SplitAgainstHistogram(const DensityModel& f,
                                                const Histogram& g,
                                                double& constant) {
  const PartitionSpec& spec = g.spec();
  const Box& support = f.support();
  const std::size_t d = support.dim();
  const double h = spec.h();
  const double volume = CellVolume(spec);

  std::vector<std::int64_t> first(d), last(d);
  for (std::size_t i = 0; i < d; ++i) {
    first[i] = static_cast<std::int64_t>(std::floor(support.lo[i] / h));
    last[i] = static_cast<std::int64_t>(std::ceil(support.hi[i] / h)) - 1;
    if (last[i] < first[i]) last[i] = first[i];
  }

  std::vector<double> inside_volume(g.cells().count(), 0.0);
  std::vector<Piece> pieces;
  CellId id;
  id.coords.assign(first.begin(), first.end());
  while (true) {
    Box box{std::vector<double>(d), std::vector<double>(d)};
    bool empty = false;
    for (std::size_t i = 0; i < d; ++i) {
      box.lo[i] = std::max(support.lo[i], id.coords[i] * h);
      box.hi[i] = std::min(support.hi[i], (id.coords[i] + 1) * h);
      if (!(box.hi[i] > box.lo[i])) empty = true;
    }
    if (!empty) {
      const auto j = g.cells().Find(id);
      double value = 0.0;
      if (j) {
        value = g.values()[*j];
        inside_volume[*j] += box.Volume();
      }
      pieces.push_back({std::move(box), value});
    }
    std::size_t axis = d;
    bool done = false;
    while (true) {
      if (axis == 0) {
        done = true;
        break;
      }
      --axis;
      if (++id.coords[axis] <= last[axis]) break;
      id.coords[axis] = first[axis];
    }
    if (done) break;
  }

  CompensatedSum outside;
  for (std::size_t j = 0; j < inside_volume.size(); ++j) {
    const double rest = std::max(0.0, volume - inside_volume[j]);
    outside.Add(std::abs(g.values()[j]) * rest);
  }
  constant = outside.Value();
  return pieces;
}

inline AxisBreaks MergeBreaks(const AxisBreaks& a, const AxisBreaks& b,
                              const Box& sa, const Box& sb) {
  const std::size_t d = sa.dim();
  AxisBreaks out(d);
  for (std::size_t i = 0; i < d; ++i) {
    if (i < a.size()) out[i].insert(out[i].end(), a[i].begin(), a[i].end());
    if (i < b.size()) out[i].insert(out[i].end(), b[i].begin(), b[i].end());
    out[i].push_back(sa.lo[i]);
    out[i].push_back(sa.hi[i]);
    out[i].push_back(sb.lo[i]);
    out[i].push_back(sb.hi[i]);
    std::sort(out[i].begin(), out[i].end());
    out[i].erase(std::unique(out[i].begin(), out[i].end()), out[i].end());
  }
  return out;
}

}  // namespace internal

// Integral of |f - g| over R^d for a density and a histogram. Inside the
// support, each intersection with a partition cell is integrated separately
// (so the histogram is constant on every quadrature box); active cells outside
// the support contribute |value| times their volume exactly.
inline QuadratureResult L1Distance(const DensityModel& f, const Histogram& g,
                                   const QuadratureSpec& quad) {
  double constant = 0.0;
  const std::vector<internal::Piece> pieces =
      internal::SplitAgainstHistogram(f, g, constant);
  auto eval = [&](int m) {
    CompensatedSum sum;
    for (const auto& piece : pieces) {
      const auto grids = MakeBoxGrids(piece.box, f.breaks(), m);
      const double v = piece.value;
      sum.Add(TensorMidpoint(
          [&](std::span<const double> x) { return std::abs(f.Pdf(x) - v); },
          grids));
    }
    sum.Add(constant);
    return sum.Value();
  };
  auto cost = [&](int m) {
    std::uint64_t total = 0;
    for (const auto& piece : pieces) {
      total += TensorSize(MakeBoxGrids(piece.box, f.breaks(), m));
    }
    return total;
  };
  return RefineByDoubling(eval, cost, quad);
}

// Integral of |f - g| for two density models, over the bounding box of both
// supports.
inline QuadratureResult L1Distance(const DensityModel& f, const DensityModel& g,
                                   const QuadratureSpec& quad) {
  const Box& sf = f.support();
  const Box& sg = g.support();
  Box box{std::vector<double>(sf.dim()), std::vector<double>(sf.dim())};
  for (std::size_t i = 0; i < sf.dim(); ++i) {
    box.lo[i] = std::min(sf.lo[i], sg.lo[i]);
    box.hi[i] = std::max(sf.hi[i], sg.hi[i]);
  }
  const AxisBreaks breaks = internal::MergeBreaks(f.breaks(), g.breaks(), sf, sg);
  return Integrate(
      [&](std::span<const double> x) { return std::abs(f.Pdf(x) - g.Pdf(x)); },
      box, breaks, quad);
}

namespace internal {

inline absl::Status CheckCommonGrid(const Histogram& a, const Histogram& b) {
  if (a.spec().d() != b.spec().d() || a.spec().h() != b.spec().h()) {
    return absl::InvalidArgumentError(
        "histograms must share dimension and bandwidth");
  }
  return absl::OkStatus();
}

// Calls fn(mass_a, mass_b) for every cell active in either histogram.
template <typename Fn>
void ForEachCellMass(const Histogram& a, const Histogram& b, Fn&& fn) {
  const double volume = CellVolume(a.spec());
  for (std::size_t j = 0; j < a.cells().count(); ++j) {
    const auto other = b.cells().Find(a.cells()[j]);
    fn(a.values()[j] * volume, other ? b.values()[*other] * volume : 0.0);
  }
  for (std::size_t j = 0; j < b.cells().count(); ++j) {
    if (!a.cells().Find(b.cells()[j])) fn(0.0, b.values()[j] * volume);
  }
}

}  // namespace internal

// Exact integral of |a - b| for histograms on a shared grid.
inline absl::StatusOr<double> L1DistanceExact(const Histogram& a,
                                              const Histogram& b) {
  if (auto s = internal::CheckCommonGrid(a, b); !s.ok()) return s;
  CompensatedSum sum;
  internal::ForEachCellMass(
      a, b, [&](double pa, double pb) { sum.Add(std::abs(pa - pb)); });
  return sum.Value();
}

// Exact total variation sup_S |P(S) - Q(S)| over unions of cells, evaluated
// at the maximising sets {p > q} and {q > p}. For two probability histograms
// this equals half the L1 distance.
inline absl::StatusOr<double> TvDistanceExact(const Histogram& a,
                                              const Histogram& b) {
  if (auto s = internal::CheckCommonGrid(a, b); !s.ok()) return s;
  CompensatedSum excess_a, excess_b;
  internal::ForEachCellMass(a, b, [&](double pa, double pb) {
    if (pa > pb) excess_a.Add(pa - pb);
    if (pb > pa) excess_b.Add(pb - pa);
  });
  return std::max(excess_a.Value(), excess_b.Value());
}

inline QuadratureResult TvDistance(const DensityModel& f, const DensityModel& g,
                                   const QuadratureSpec& quad) {
  QuadratureResult r = L1Distance(f, g, quad);
  r.value *= 0.5;
  return r;
}

inline QuadratureResult TvDistance(const DensityModel& f, const Histogram& g,
                                   const QuadratureSpec& quad) {
  QuadratureResult r = L1Distance(f, g, quad);
  r.value *= 0.5;
  return r;
}

// KL(pA || pB) = int pA log(pA / pB) over [lo, hi], integrated in the
// equivalent form pA log(pA / pB) - pA + pB (pointwise nonnegative). Returns
// +infinity if pB vanishes at a node where pA does not.
template <typename PA, typename PB>
QuadratureResult Kl1d(PA&& p_a, PB&& p_b, double lo, double hi,
                      std::vector<double> breaks, const QuadratureSpec& quad) {
  bool infinite = false;
  auto integrand = [&](double x) {
    const double a = p_a(x);
    const double b = p_b(x);
    if (a <= 0.0) return b;
    if (b <= 0.0) {
      infinite = true;
      return 0.0;
    }
    const double diff = a - b;
    // log1p keeps precision when a is close to b; far apart, (a - b) / b can
    // round to -1 and the log difference is used instead.
    const double log_ratio = std::abs(diff) <= 0.5 * b
                                 ? std::log1p(diff / b)
                                 : std::log(a) - std::log(b);
    return a * log_ratio - diff;
  };
  QuadratureResult r = Integrate1d(integrand, lo, hi, std::move(breaks), quad);
  if (infinite) r.value = std::numeric_limits<double>::infinity();
  return r;
}

// Hellinger affinity rho = int sqrt(pA pB).
template <typename PA, typename PB>
QuadratureResult HellingerAffinity1d(PA&& p_a, PB&& p_b, double lo, double hi,
                                     std::vector<double> breaks,
                                     const QuadratureSpec& quad) {
  return Integrate1d(
      [&](double x) { return std::sqrt(std::max(0.0, p_a(x) * p_b(x))); }, lo,
      hi, std::move(breaks), quad);
}

// Squared Hellinger distance int (sqrt(pA) - sqrt(pB))^2 = 2 (1 - rho).
template <typename PA, typename PB>
QuadratureResult HellingerSquared1d(PA&& p_a, PB&& p_b, double lo, double hi,
                                    std::vector<double> breaks,
                                    const QuadratureSpec& quad) {
  return Integrate1d(
      [&](double x) {
        const double diff =
            std::sqrt(std::max(0.0, p_a(x))) - std::sqrt(std::max(0.0, p_b(x)));
        return diff * diff;
      },
      lo, hi, std::move(breaks), quad);
}

// Affinity of two densities on a box in any dimension.
template <typename PA, typename PB>
QuadratureResult HellingerAffinity(PA&& p_a, PB&& p_b, const Box& box,
                                   const AxisBreaks& breaks,
                                   const QuadratureSpec& quad) {
  return Integrate(
      [&](std::span<const double> x) {
        return std::sqrt(std::max(0.0, p_a(x) * p_b(x)));
      },
      box, breaks, quad);
}

}  // namespace ldphist

#endif  // LDPHIST_METRICS_H_
