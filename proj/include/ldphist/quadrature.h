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

// Tensor midpoint quadrature over axis-aligned boxes.
//
// Each axis of the box is cut at a sorted list of breakpoints (kinks of the
// integrand), and every resulting segment carries `m` equal midpoint
// subdivisions. Refinement doubles `m` until successive values differ by less
// than the tolerance or the evaluation budget would be exceeded; in the latter
// case the last value is returned with `converged == false`.

#ifndef LDPHIST_QUADRATURE_H_
#define LDPHIST_QUADRATURE_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace ldphist {

struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t dim() const { return lo.size(); }
  double Volume() const {
    double v = 1.0;
    for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
    return v;
  }
  // Closed-box membership.
  bool Contains(std::span<const double> x) const {
    for (std::size_t i = 0; i < lo.size(); ++i) {
      if (x[i] < lo[i] || x[i] > hi[i]) return false;
    }
    return true;
  }

  static Box Cube(std::size_t d, double lo, double hi) {
    return Box{std::vector<double>(d, lo), std::vector<double>(d, hi)};
  }
};

// Per-axis breakpoint lists.
using AxisBreaks = std::vector<std::vector<double>>;

struct QuadratureSpec {
  // Subdivisions per axis segment on the first pass; a power of two.
  int subdivisions = 1 << 10;
  double tol = 1e-8;
  // Optional relative tolerance: refinement also stops once the change is
  // below rel_tol * |value|.
  double rel_tol = 0.0;
  // Report the Richardson combination (4 I(2m) - I(m)) / 3 of successive
  // midpoint values, removing the h^2 error term of kinks that are not on
  // grid lines (such as the diagonal ridges of min-type functions).
  bool richardson = false;
  std::uint64_t max_evaluations = std::uint64_t{1} << 26;

  // Starting resolution: 2^10 per axis for d = 1, 2^6 for d = 2, 2^4 for
  // d = 3 and 2^2 beyond.
  static QuadratureSpec Reference(int d) {
    QuadratureSpec spec;
    switch (d) {
      case 1:
        spec.subdivisions = 1 << 10;
        break;
      case 2:
        spec.subdivisions = 1 << 6;
        break;
      case 3:
        spec.subdivisions = 1 << 4;
        break;
      default:
        spec.subdivisions = 1 << 2;
        break;
    }
    return spec;
  }
};

struct QuadratureResult {
  double value = 0.0;
  bool converged = false;
  int subdivisions = 0;
  std::uint64_t evaluations = 0;
};

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void Add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double Value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

struct AxisGrid {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Midpoint nodes on [lo, hi] split at the breakpoints strictly inside it.
inline AxisGrid MakeAxisGrid(double lo, double hi,
                             std::span<const double> breaks, int m) {
  std::vector<double> edges;
  edges.reserve(breaks.size() + 2);
  edges.push_back(lo);
  for (double b : breaks) {
    if (b > lo && b < hi) edges.push_back(b);
  }
  edges.push_back(hi);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  AxisGrid grid;
  grid.nodes.reserve((edges.size() - 1) * static_cast<std::size_t>(m));
  grid.weights.reserve(grid.nodes.capacity());
  for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
    const double a = edges[s];
    const double width = (edges[s + 1] - a) / m;
    for (int i = 0; i < m; ++i) {
      grid.nodes.push_back(a + (i + 0.5) * width);
      grid.weights.push_back(width);
    }
  }
  return grid;
}

inline std::uint64_t TensorSize(std::span<const AxisGrid> grids) {
  std::uint64_t total = 1;
  for (const auto& g : grids) total *= g.nodes.size();
  return total;
}

// Sum of f(node) * weight over the tensor grid, in odometer order with the
// last axis fastest.
template <typename F>
double TensorMidpoint(F&& f, std::span<const AxisGrid> grids) {
  const std::size_t d = grids.size();
  for (const auto& g : grids) {
    if (g.nodes.empty()) return 0.0;
  }
  std::vector<std::size_t> index(d, 0);
  std::vector<double> point(d);
  for (std::size_t i = 0; i < d; ++i) point[i] = grids[i].nodes[0];
  CompensatedSum sum;
  while (true) {
    double w = 1.0;
    for (std::size_t i = 0; i < d; ++i) w *= grids[i].weights[index[i]];
    sum.Add(w * f(std::span<const double>(point)));
    std::size_t axis = d;
    while (axis > 0) {
      --axis;
      if (++index[axis] < grids[axis].nodes.size()) {
        point[axis] = grids[axis].nodes[index[axis]];
        break;
      }
      index[axis] = 0;
      point[axis] = grids[axis].nodes[0];
      if (axis == 0) return sum.Value();
    }
  }
}

// Builds the grids for one box at resolution m.
inline std::vector<AxisGrid> MakeBoxGrids(const Box& box,
                                          const AxisBreaks& breaks, int m) {
  std::vector<AxisGrid> grids;
  grids.reserve(box.dim());
  for (std::size_t i = 0; i < box.dim(); ++i) {
    std::span<const double> b;
    if (i < breaks.size()) b = breaks[i];
    grids.push_back(MakeAxisGrid(box.lo[i], box.hi[i], b, m));
  }
  return grids;
}

// Generic doubling driver. `eval(m)` returns the estimate at resolution m and
// `cost(m)` the number of integrand evaluations it needs.
template <typename Eval, typename Cost>
QuadratureResult RefineByDoubling(Eval&& eval, Cost&& cost,
                                  const QuadratureSpec& spec) {
  QuadratureResult result;
  int m = std::max(1, spec.subdivisions);
  result.evaluations = cost(m);
  double raw = eval(m);
  result.value = raw;
  result.subdivisions = m;
  while (true) {
    const int next = 2 * m;
    const std::uint64_t next_cost = cost(next);
    if (next <= 0 || result.evaluations + next_cost > spec.max_evaluations) {
      result.converged = false;
      return result;
    }
    const double refined_raw = eval(next);
    const double refined =
        spec.richardson ? (4.0 * refined_raw - raw) / 3.0 : refined_raw;
    result.evaluations += next_cost;
    const double change = std::abs(refined - result.value);
    raw = refined_raw;
    result.value = refined;
    result.subdivisions = next;
    m = next;
    if (change < spec.tol || change <= spec.rel_tol * std::abs(refined)) {
      result.converged = true;
      return result;
    }
  }
}

// Integral of f over `box` with kink breakpoints per axis.
template <typename F>
QuadratureResult Integrate(F&& f, const Box& box, const AxisBreaks& breaks,
                           const QuadratureSpec& spec) {
  auto eval = [&](int m) {
    const auto grids = MakeBoxGrids(box, breaks, m);
    return TensorMidpoint(f, grids);
  };
  auto cost = [&](int m) { return TensorSize(MakeBoxGrids(box, breaks, m)); };
  return RefineByDoubling(eval, cost, spec);
}

// One-dimensional convenience wrapper.
template <typename F>
QuadratureResult Integrate1d(F&& f, double lo, double hi,
                             std::vector<double> breaks,
                             const QuadratureSpec& spec) {
  Box box{{lo}, {hi}};
  AxisBreaks axis_breaks{std::move(breaks)};
  return Integrate([&](std::span<const double> x) { return f(x[0]); }, box,
                   axis_breaks, spec);
}

}  // namespace ldphist

#endif  // LDPHIST_QUADRATURE_H_
