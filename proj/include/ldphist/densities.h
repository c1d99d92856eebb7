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

// True-density models: evaluable, samplable, with a certified Lipschitz
// constant and a bounded support box.
//
// Besides a few test densities, this header provides the building blocks of
// the Lipschitz-class lower-bound construction on [0,1]^d:
//   g0(x)   = L * min_i min(x_i, 1 - x_i)                 (pyramid)
//   tau(x)  = 4k x on [0, 1/(4k)),  4k (x - 1/(4k)) on [1/(4k), 1/(2k))
//   g(x)    = (-1)^#{i : x_i >= 1/(4k)} g0(tau(x_1), ..., tau(x_d)) / (4k)
//             on A = [0, 1/(2k))^d
//   f0(x)   = c_d min(4 s(x), 1),  s(x) = min_i min(x_i, 1 - x_i)
//   f_theta = f0 + theta_j g(x - y_j) on A_j = y_j + A,
//             y_j = 1/4 + j / (2k) per axis.
// f0 is constant (= c_d) on [1/4, 3/4]^d and c_d makes it integrate to one.

#ifndef LDPHIST_DENSITIES_H_
#define LDPHIST_DENSITIES_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "absl/container/inlined_vector.h"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "ldphist/quadrature.h"
#include "ldphist/random.h"

namespace ldphist {

class DensityModel {
 public:
  // Called only for points inside the support box.
  using PdfFn = std::function<double(std::span<const double>)>;
  using SamplerFn = std::function<void(Rng&, std::span<double>)>;

  DensityModel(std::string name, Box support, PdfFn pdf, double lipschitz,
               double sup_bound, AxisBreaks breaks, SamplerFn exact_sampler)
      : name_(std::move(name)),
        support_(std::move(support)),
        pdf_(std::move(pdf)),
        lipschitz_(lipschitz),
        sup_bound_(sup_bound),
        breaks_(std::move(breaks)),
        exact_sampler_(std::move(exact_sampler)) {}

  const std::string& name() const { return name_; }
  int dim() const { return static_cast<int>(support_.dim()); }
  const Box& support() const { return support_; }
  // Euclidean Lipschitz constant; 0 means not certified.
  double lipschitz() const { return lipschitz_; }
  double sup_bound() const { return sup_bound_; }
  // Per-axis kink locations, used to align quadrature grids.
  const AxisBreaks& breaks() const { return breaks_; }
  bool has_exact_sampler() const { return static_cast<bool>(exact_sampler_); }

  // Density at x; zero outside the support.
  double Pdf(std::span<const double> x) const {
    if (!support_.Contains(x)) return 0.0;
    return pdf_(x);
  }

  void SampleExact(Rng& rng, std::span<double> out) const {
    exact_sampler_(rng, out);
  }

 private:
  std::string name_;
  Box support_;
  PdfFn pdf_;
  double lipschitz_;
  double sup_bound_;
  AxisBreaks breaks_;
  SamplerFn exact_sampler_;
};

namespace internal {

inline double G0(double lipschitz, std::span<const double> x) {
  double s = 1.0;
  for (double xi : x) s = std::min(s, std::min(xi, 1.0 - xi));
  return lipschitz * s;
}

inline double Tau(int k, double x) {
  const double quarter = 1.0 / (4.0 * k);
  return x < quarter ? 4.0 * k * x : 4.0 * k * (x - quarter);
}

// g on A = [0, 1/(2k))^d; `scratch` has the dimension of x.
inline double G(double lipschitz, int k, std::span<const double> x,
                std::span<double> scratch) {
  const double quarter = 1.0 / (4.0 * k);
  int upper = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] >= quarter) ++upper;
    scratch[i] = Tau(k, x[i]);
  }
  const double magnitude = G0(lipschitz, scratch) / (4.0 * k);
  return (upper % 2 == 0) ? magnitude : -magnitude;
}

inline double F0Shape(std::span<const double> x) {
  double s = 1.0;
  for (double xi : x) s = std::min(s, std::min(xi, 1.0 - xi));
  return std::min(4.0 * s, 1.0);
}

}  // namespace internal

// g0 on the closed unit box.
inline absl::StatusOr<double> G0Eval(double lipschitz,
                                     std::span<const double> x) {
  for (double xi : x) {
    if (!(xi >= 0.0 && xi <= 1.0)) {
      return absl::InvalidArgumentError(
          absl::StrCat("g0: coordinate ", xi, " outside [0,1]"));
    }
  }
  return internal::G0(lipschitz, x);
}

// Integral of g0 over [0,1)^d, L / (2(d+1)).
inline double G0Integral(double lipschitz, int d) {
  return lipschitz / (2.0 * (d + 1));
}

inline absl::StatusOr<double> TauEval(int k, double x) {
  if (k < 1) return absl::InvalidArgumentError("tau: k must be >= 1");
  if (!(x >= 0.0 && x < 1.0 / (2.0 * k))) {
    return absl::InvalidArgumentError(
        absl::StrCat("tau: x=", x, " outside [0, 1/(2k))"));
  }
  return internal::Tau(k, x);
}

inline absl::StatusOr<double> GEval(double lipschitz, int k,
                                    std::span<const double> x) {
  if (k < 1) return absl::InvalidArgumentError("g: k must be >= 1");
  const double width = 1.0 / (2.0 * k);
  for (double xi : x) {
    if (!(xi >= 0.0 && xi < width)) {
      return absl::InvalidArgumentError(
          absl::StrCat("g: coordinate ", xi, " outside [0, 1/(2k))"));
    }
  }
  std::vector<double> scratch(x.size());
  return internal::G(lipschitz, k, x, scratch);
}

// Normalising constant of f0: 1 / integral of min(4 s(x), 1) over [0,1]^d.
// The integral is 4 * int_0^{1/4} (1 - 2t)^d dt = 2 (1 - 2^-(d+1)) / (d+1).
inline double F0Constant(int d) {
  return (d + 1) / (2.0 * (1.0 - std::ldexp(1.0, -(d + 1))));
}

namespace internal {

inline AxisBreaks RepeatBreaks(int d, std::vector<double> breaks) {
  return AxisBreaks(static_cast<std::size_t>(d), std::move(breaks));
}

}  // namespace internal

inline absl::StatusOr<DensityModel> BuildF0(double lipschitz, int d) {
  if (d < 1) return absl::InvalidArgumentError("f0: d must be >= 1");
  const double c = F0Constant(d);
  if (!(lipschitz >= 4.0 * c)) {
    return absl::FailedPreconditionError(absl::StrCat(
        "f0: L not sufficiently large: need L >= 4 c_d = ", 4.0 * c,
        ", got ", lipschitz));
  }
  return DensityModel(
      absl::StrCat("f0(L=", lipschitz, ")"), Box::Cube(d, 0.0, 1.0),
      [c](std::span<const double> x) { return c * internal::F0Shape(x); },
      4.0 * c, c, internal::RepeatBreaks(d, {0.25, 0.75}), {});
}

// Sign vector of one lower-bound hypothesis. Entries are indexed by the
// multi-index j in {0..k-1}^d flattened row-major (axis 0 most significant).
class HypothesisTheta {
 public:
  static absl::StatusOr<HypothesisTheta> Create(int k, double lipschitz, int d,
                                                std::vector<int> theta) {
    if (k < 1 || d < 1) {
      return absl::InvalidArgumentError("HypothesisTheta: need k >= 1, d >= 1");
    }
    if (!(lipschitz > 0.0)) {
      return absl::InvalidArgumentError("HypothesisTheta: need L > 0");
    }
    const std::size_t expected = BlockCount(k, d);
    if (theta.size() != expected) {
      return absl::InvalidArgumentError(absl::StrCat(
          "HypothesisTheta: |theta| = ", theta.size(), ", expected k^d = ",
          expected));
    }
    for (int t : theta) {
      if (t != 1 && t != -1) {
        return absl::InvalidArgumentError(
            "HypothesisTheta: entries must be +1 or -1");
      }
    }
    return HypothesisTheta(k, lipschitz, d, std::move(theta));
  }

  static absl::StatusOr<HypothesisTheta> AllPlus(int k, double lipschitz,
                                                 int d) {
    if (k < 1 || d < 1) {
      return absl::InvalidArgumentError("HypothesisTheta: need k >= 1, d >= 1");
    }
    return Create(k, lipschitz, d, std::vector<int>(BlockCount(k, d), 1));
  }

  static std::size_t BlockCount(int k, int d) {
    std::size_t n = 1;
    for (int i = 0; i < d; ++i) n *= static_cast<std::size_t>(k);
    return n;
  }

  int k() const { return k_; }
  double lipschitz() const { return lipschitz_; }
  int d() const { return d_; }
  const std::vector<int>& theta() const { return theta_; }
  std::size_t size() const { return theta_.size(); }

  // The neighbour with the sign of block `j` reversed.
  HypothesisTheta Flipped(std::size_t j) const {
    HypothesisTheta out = *this;
    out.theta_[j] = -out.theta_[j];
    return out;
  }

  // Multi-index of flat block index j.
  std::vector<int> BlockIndex(std::size_t j) const {
    std::vector<int> idx(d_);
    for (int i = d_ - 1; i >= 0; --i) {
      idx[i] = static_cast<int>(j % k_);
      j /= k_;
    }
    return idx;
  }

  // Lower corner y_j of block j and its side 1/(2k).
  std::vector<double> BlockCorner(std::size_t j) const {
    const auto idx = BlockIndex(j);
    std::vector<double> y(d_);
    for (int i = 0; i < d_; ++i) y[i] = BlockOffset(idx[i]);
    return y;
  }
  double BlockWidth() const { return 1.0 / (2.0 * k_); }
  double BlockOffset(int j) const { return 0.25 + j / (2.0 * k_); }

 private:
  HypothesisTheta(int k, double lipschitz, int d, std::vector<int> theta)
      : k_(k), lipschitz_(lipschitz), d_(d), theta_(std::move(theta)) {}

  int k_;
  double lipschitz_;
  int d_;
  std::vector<int> theta_;
};

// Breakpoints of f_theta on one axis: 0.25, every quadrant edge of the
// blocks, and 0.75.
inline std::vector<double> FThetaAxisBreaks(int k) {
  std::vector<double> b;
  for (int i = 0; i <= 2 * k; ++i) b.push_back(0.25 + i / (4.0 * k));
  return b;
}

inline absl::StatusOr<DensityModel> BuildFTheta(const HypothesisTheta& hyp) {
  const int d = hyp.d();
  const int k = hyp.k();
  const double lipschitz = hyp.lipschitz();
  const double c = F0Constant(d);
  if (!(lipschitz >= 4.0 * c)) {
    return absl::FailedPreconditionError(absl::StrCat(
        "f_theta: L not sufficiently large for f0: need L >= ", 4.0 * c,
        ", got ", lipschitz));
  }
  if (!(lipschitz / (8.0 * k) <= c)) {
    return absl::FailedPreconditionError(absl::StrCat(
        "f_theta: amplitude L/(8k) = ", lipschitz / (8.0 * k),
        " exceeds c_d = ", c, "; f_theta would go negative"));
  }
  auto theta = std::make_shared<const std::vector<int>>(hyp.theta());
  const double width = hyp.BlockWidth();
  auto pdf = [c, k, d, lipschitz, width,
              theta](std::span<const double> x) -> double {
    const double base = c * internal::F0Shape(x);
    absl::InlinedVector<double, 4> offset(d);
    absl::InlinedVector<double, 4> scratch(d);
    std::size_t flat = 0;
    for (int i = 0; i < d; ++i) {
      if (!(x[i] >= 0.25 && x[i] < 0.75)) return base;
      int j = static_cast<int>(std::floor((x[i] - 0.25) * 2.0 * k));
      j = std::clamp(j, 0, k - 1);
      double rel = x[i] - (0.25 + j / (2.0 * k));
      if (rel < 0.0 && j > 0) {
        --j;
        rel = x[i] - (0.25 + j / (2.0 * k));
      } else if (rel >= width && j < k - 1) {
        ++j;
        rel = x[i] - (0.25 + j / (2.0 * k));
      }
      offset[i] = std::clamp(rel, 0.0, std::nextafter(width, 0.0));
      flat = flat * static_cast<std::size_t>(k) + static_cast<std::size_t>(j);
    }
    return base + (*theta)[flat] *
                      internal::G(lipschitz, k, offset, scratch);
  };
  return DensityModel(absl::StrCat("f_theta(L=", lipschitz, ",k=", k, ")"),
                      Box::Cube(d, 0.0, 1.0), std::move(pdf), lipschitz,
                      c + lipschitz / (8.0 * k),
                      internal::RepeatBreaks(d, FThetaAxisBreaks(k)), {});
}

// Uniform density on the cube [lo, hi]^d.
inline absl::StatusOr<DensityModel> BuildUniform(int d, double lo, double hi) {
  if (d < 1 || !(hi > lo)) {
    return absl::InvalidArgumentError("uniform: need d >= 1 and hi > lo");
  }
  const double density = 1.0 / std::pow(hi - lo, d);
  return DensityModel(
      absl::StrCat("uniform[", lo, ",", hi, "]^", d), Box::Cube(d, lo, hi),
      [density](std::span<const double>) { return density; }, 0.0, density,
      AxisBreaks(d), [lo, hi](Rng& rng, std::span<double> out) {
        for (double& v : out) v = lo + (hi - lo) * UniformOpen01(rng);
      });
}

// Product of triangular densities 4 min(x, 1 - x) on [0,1].
inline absl::StatusOr<DensityModel> BuildTent(int d) {
  if (d < 1) return absl::InvalidArgumentError("tent: need d >= 1");
  // Each factor is bounded by 2 with slope 4, so the gradient norm is at most
  // 4 * 2^(d-1) * sqrt(d).
  const double lipschitz = std::ldexp(1.0, d + 1) * std::sqrt(d);
  return DensityModel(
      absl::StrCat("tent^", d), Box::Cube(d, 0.0, 1.0),
      [](std::span<const double> x) {
        double p = 1.0;
        for (double xi : x) p *= 4.0 * std::min(xi, 1.0 - xi);
        return p;
      },
      lipschitz, std::ldexp(1.0, d), internal::RepeatBreaks(d, {0.5}),
      [](Rng& rng, std::span<double> out) {
        for (double& v : out) {
          const double u = UniformOpen01(rng);
          v = u < 0.5 ? std::sqrt(u / 2.0) : 1.0 - std::sqrt((1.0 - u) / 2.0);
        }
      });
}

// g0 / int g0 = 2(d+1) s(x); independent of the g0 slope.
inline absl::StatusOr<DensityModel> BuildPyramid(int d) {
  if (d < 1) return absl::InvalidArgumentError("pyramid: need d >= 1");
  const double scale = 2.0 * (d + 1);
  return DensityModel(
      absl::StrCat("pyramid^", d), Box::Cube(d, 0.0, 1.0),
      [scale](std::span<const double> x) { return internal::G0(scale, x); },
      scale, scale / 2.0, internal::RepeatBreaks(d, {0.5}), {});
}

// Named models used by the harness. Parameters:
//   uniform: [lo, hi] (default 0, 1)      tent, pyramid: none
//   f0: [L]                               ftheta: [L, k] with theta = +1
inline absl::StatusOr<DensityModel> BuildBuiltinModel(
    const std::string& name, int d, std::span<const double> params) {
  if (name == "uniform") {
    if (params.empty()) return BuildUniform(d, 0.0, 1.0);
    if (params.size() == 2) return BuildUniform(d, params[0], params[1]);
    return absl::InvalidArgumentError("uniform takes params lo,hi");
  }
  if (name == "tent") return BuildTent(d);
  if (name == "pyramid") return BuildPyramid(d);
  if (name == "f0") {
    if (params.size() != 1) return absl::InvalidArgumentError("f0 takes L");
    return BuildF0(params[0], d);
  }
  if (name == "ftheta") {
    if (params.size() != 2) {
      return absl::InvalidArgumentError("ftheta takes L,k");
    }
    auto hyp =
        HypothesisTheta::AllPlus(static_cast<int>(params[1]), params[0], d);
    if (!hyp.ok()) return hyp.status();
    return BuildFTheta(*hyp);
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown density model '", name, "'"));
}

// Draws from a model: the exact inverse-CDF sampler where one exists,
// otherwise rejection against the uniform envelope sup_bound on the support.
class Sampler {
 public:
  static constexpr double kMinAcceptance = 1e-4;
  static constexpr int kProbeBatch = 1 << 16;

  // Fails when the envelope acceptance rate over a probe batch is below
  // kMinAcceptance.
  static absl::StatusOr<Sampler> Create(const DensityModel& model, Rng& rng) {
    if (model.has_exact_sampler()) return Sampler(model, 1.0);
    if (!std::isfinite(model.sup_bound()) || !(model.sup_bound() > 0.0)) {
      return absl::FailedPreconditionError(
          "Sampler: model needs a finite positive sup_bound");
    }
    std::vector<double> x(model.dim());
    int accepted = 0;
    for (int i = 0; i < kProbeBatch; ++i) {
      if (Propose(model, rng, x)) ++accepted;
    }
    const double rate = static_cast<double>(accepted) / kProbeBatch;
    if (rate < kMinAcceptance) {
      return absl::FailedPreconditionError(absl::StrCat(
          "Sampler: acceptance rate ", rate, " below ", kMinAcceptance,
          " for ", model.name()));
    }
    return Sampler(model, rate);
  }

  void Draw(Rng& rng, std::span<double> out) const {
    if (model_->has_exact_sampler()) {
      model_->SampleExact(rng, out);
      return;
    }
    while (!Propose(*model_, rng, out)) {
    }
  }

  double probe_acceptance() const { return probe_acceptance_; }

 private:
  Sampler(const DensityModel& model, double rate)
      : model_(std::make_shared<const DensityModel>(model)),
        probe_acceptance_(rate) {}

  static bool Propose(const DensityModel& model, Rng& rng,
                      std::span<double> x) {
    const Box& box = model.support();
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * UniformOpen01(rng);
    }
    return UniformOpen01(rng) * model.sup_bound() <= model.Pdf(x);
  }

  std::shared_ptr<const DensityModel> model_;
  double probe_acceptance_;
};

// Largest |pdf(x) - pdf(y)| / |x - y| over random pairs in the support. Half
// of the pairs are independent uniform points; the other half are local
// perturbations, which is where slopes are actually observed.
inline double LipschitzProbe(const DensityModel& model, int pairs, Rng& rng) {
  const Box& box = model.support();
  const std::size_t d = box.dim();
  std::vector<double> x(d), y(d);
  double worst = 0.0;
  for (int p = 0; p < pairs; ++p) {
    const bool local = (p % 2) == 1;
    for (std::size_t i = 0; i < d; ++i) {
      const double width = box.hi[i] - box.lo[i];
      x[i] = box.lo[i] + width * UniformOpen01(rng);
      if (local) {
        const double step = 1e-3 * width * (2.0 * UniformOpen01(rng) - 1.0);
        y[i] = std::clamp(x[i] + step, box.lo[i], box.hi[i]);
      } else {
        y[i] = box.lo[i] + width * UniformOpen01(rng);
      }
    }
    double dist_sq = 0.0;
    for (std::size_t i = 0; i < d; ++i) dist_sq += (x[i] - y[i]) * (x[i] - y[i]);
    if (dist_sq == 0.0) continue;
    const double ratio =
        std::abs(model.Pdf(x) - model.Pdf(y)) / std::sqrt(dist_sq);
    worst = std::max(worst, ratio);
  }
  return worst;
}

// Integral of the model over its support at the given quadrature setting.
inline QuadratureResult IntegrateModel(const DensityModel& model,
                                       const QuadratureSpec& spec) {
  return Integrate(
      [&model](std::span<const double> x) { return model.Pdf(x); },
      model.support(), model.breaks(), spec);
}

}  // namespace ldphist

#endif  // LDPHIST_DENSITIES_H_
