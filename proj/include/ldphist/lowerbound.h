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

// Lower-bound hypothesis family for Lipschitz densities under alpha-LDP.
//
// Hypotheses f_theta = f0 + sum_j theta_j g(. - y_j) differ between
// neighbours (one sign flipped) only on one block A_j of side 1/(2k), where
//   TV(f_theta, f_theta^(j)) = int_A |g| = 2^d (4k)^-(d+1) int g0.
// The bandwidth index k is the smallest integer with
//   n (e^alpha - 1)^2 (2k)^-(2d+2) (int g0)^2 <= 1.
// Since 4 TV^2 = (2k)^-(2d+2) (int g0)^2, this is the same as asking the
// information bound 4 n (e^alpha - 1)^2 TV^2 to be at most 1.
//
// The privatised divergence is computed for this library's own channel (the
// Laplace mechanism on a cubic partition), not for every possible channel.

#ifndef LDPHIST_LOWERBOUND_H_
#define LDPHIST_LOWERBOUND_H_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "ldphist/densities.h"
#include "ldphist/internal/status_macros.h"
#include "ldphist/mechanism.h"
#include "ldphist/metrics.h"
#include "ldphist/partition.h"
#include "ldphist/quadrature.h"
#include "ldphist/random.h"

namespace ldphist {

// n (e^alpha - 1)^2 (2k)^-(2d+2) (int g0)^2.
inline double SelectionQuantity(std::int64_t n, double alpha, int d,
                                double lipschitz, int k) {
  const double e = std::expm1(alpha);
  const double integral = G0Integral(lipschitz, d);
  return static_cast<double>(n) * e * e * integral * integral *
         std::pow(2.0 * k, -(2.0 * d + 2.0));
}

inline absl::StatusOr<int> ChooseK(std::int64_t n, double alpha, int d,
                                   double lipschitz) {
  if (n < 1) return absl::InvalidArgumentError("choose_k: n must be >= 1");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    return absl::InvalidArgumentError("choose_k: alpha must be positive");
  }
  if (d < 1) return absl::InvalidArgumentError("choose_k: d must be >= 1");
  if (!(lipschitz > 0.0)) {
    return absl::InvalidArgumentError("choose_k: L must be positive");
  }
  // Start near the continuous solution, then settle on the exact minimum.
  const double guess =
      0.5 * std::pow(SelectionQuantity(n, alpha, d, lipschitz, 1) *
                         std::pow(2.0, 2.0 * d + 2.0),
                     1.0 / (2.0 * d + 2.0));
  int k = std::max(1, static_cast<int>(std::floor(guess)) - 1);
  while (k > 1 && SelectionQuantity(n, alpha, d, lipschitz, k - 1) <= 1.0) --k;
  while (SelectionQuantity(n, alpha, d, lipschitz, k) > 1.0) ++k;
  return k;
}

class LowerBoundInstance {
 public:
  // k from the selection rule.
  static absl::StatusOr<LowerBoundInstance> Create(std::int64_t n,
                                                   double alpha, int d,
                                                   double lipschitz) {
    LDPHIST_ASSIGN_OR_RETURN(const int k, ChooseK(n, alpha, d, lipschitz));
    return LowerBoundInstance(n, alpha, d, lipschitz, k);
  }

  // Explicit k, for sweeps over the family.
  static absl::StatusOr<LowerBoundInstance> WithK(std::int64_t n, double alpha,
                                                  int d, double lipschitz,
                                                  int k) {
    if (n < 1 || !(alpha > 0.0) || d < 1 || !(lipschitz > 0.0) || k < 1) {
      return absl::InvalidArgumentError(
          "LowerBoundInstance: need n, alpha, d, L, k all positive");
    }
    return LowerBoundInstance(n, alpha, d, lipschitz, k);
  }

  std::int64_t n() const { return n_; }
  double alpha() const { return alpha_; }
  int d() const { return d_; }
  double lipschitz() const { return lipschitz_; }
  int k() const { return k_; }

  absl::StatusOr<HypothesisTheta> AllPlus() const {
    return HypothesisTheta::AllPlus(k_, lipschitz_, d_);
  }

 private:
  LowerBoundInstance(std::int64_t n, double alpha, int d, double lipschitz,
                     int k)
      : n_(n), alpha_(alpha), d_(d), lipschitz_(lipschitz), k_(k) {}

  std::int64_t n_;
  double alpha_;
  int d_;
  double lipschitz_;
  int k_;
};

// Closed form 2^d (4k)^-(d+1) int g0.
inline double TvNeighbors(double lipschitz, int k, int d) {
  return std::ldexp(1.0, d) * std::pow(4.0 * k, -(d + 1.0)) *
         G0Integral(lipschitz, d);
}

inline double TvNeighbors(const LowerBoundInstance& inst) {
  return TvNeighbors(inst.lipschitz(), inst.k(), inst.d());
}

// 4 n (e^alpha - 1)^2 tv^2.
inline double KlBound(const LowerBoundInstance& inst, double tv) {
  const double e = std::expm1(inst.alpha());
  return 4.0 * static_cast<double>(inst.n()) * e * e * tv * tv;
}

// int_A |g| by quadrature, breaking at the quadrant edges.
inline QuadratureResult AbsGIntegral(double lipschitz, int k, int d,
                                     const QuadratureSpec& quad) {
  const double width = 1.0 / (2.0 * k);
  const Box box = Box::Cube(static_cast<std::size_t>(d), 0.0, width);
  const AxisBreaks breaks(static_cast<std::size_t>(d),
                          std::vector<double>{width / 2.0});
  std::vector<double> scratch(static_cast<std::size_t>(d));
  return Integrate(
      [&](std::span<const double> x) {
        return std::abs(internal::G(lipschitz, k, x, scratch));
      },
      box, breaks, quad);
}

// Signed integral of g over A (zero by the checkerboard signs).
inline QuadratureResult GIntegral(double lipschitz, int k, int d,
                                  const QuadratureSpec& quad) {
  const double width = 1.0 / (2.0 * k);
  const Box box = Box::Cube(static_cast<std::size_t>(d), 0.0, width);
  const AxisBreaks breaks(static_cast<std::size_t>(d),
                          std::vector<double>{width / 2.0});
  std::vector<double> scratch(static_cast<std::size_t>(d));
  return Integrate(
      [&](std::span<const double> x) {
        return internal::G(lipschitz, k, x, scratch);
      },
      box, breaks, quad);
}

namespace internal {

inline Box BlockBox(const HypothesisTheta& hyp, std::size_t j) {
  const auto corner = hyp.BlockCorner(j);
  Box box{corner, corner};
  for (double& v : box.hi) v += hyp.BlockWidth();
  return box;
}

inline std::vector<std::size_t> DifferingBlocks(const HypothesisTheta& a,
                                                const HypothesisTheta& b) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a.theta()[j] != b.theta()[j]) out.push_back(j);
  }
  return out;
}

inline absl::Status CheckSameFamily(const HypothesisTheta& a,
                                    const HypothesisTheta& b) {
  if (a.k() != b.k() || a.d() != b.d() || a.lipschitz() != b.lipschitz()) {
    return absl::InvalidArgumentError(
        "hypotheses must share k, d and L");
  }
  return absl::OkStatus();
}

}  // namespace internal

// TV between two hypotheses, by quadrature of |fA - fB| / 2 over the blocks
// where their signs differ (the densities agree everywhere else).
inline absl::StatusOr<QuadratureResult> TvBetweenHypotheses(
    const HypothesisTheta& a, const HypothesisTheta& b,
    const QuadratureSpec& quad) {
  LDPHIST_RETURN_IF_ERROR(internal::CheckSameFamily(a, b));
  LDPHIST_ASSIGN_OR_RETURN(const DensityModel fa, BuildFTheta(a));
  LDPHIST_ASSIGN_OR_RETURN(const DensityModel fb, BuildFTheta(b));
  QuadratureResult total;
  total.converged = true;
  for (std::size_t j : internal::DifferingBlocks(a, b)) {
    const QuadratureResult r = Integrate(
        [&](std::span<const double> x) {
          return 0.5 * std::abs(fa.Pdf(x) - fb.Pdf(x));
        },
        internal::BlockBox(a, j), fa.breaks(), quad);
    total.value += r.value;
    total.converged = total.converged && r.converged;
    total.evaluations += r.evaluations;
    total.subdivisions = std::max(total.subdivisions, r.subdivisions);
  }
  return total;
}

// (k^d / 4) int_A |g|, by quadrature.
inline QuadratureResult RateFloor(const LowerBoundInstance& inst,
                                  const QuadratureSpec& quad) {
  QuadratureResult r =
      AbsGIntegral(inst.lipschitz(), inst.k(), inst.d(), quad);
  r.value *= std::pow(static_cast<double>(inst.k()), inst.d()) / 4.0;
  return r;
}

struct PrivatizedDivergence {
  double kl_per_record = 0.0;
  double kl_total = 0.0;  // n * kl_per_record
  // Affinity of the n-fold product law, prod_j (1 - H_j^2 / 2)^n.
  double log_affinity_total = 0.0;
  double affinity_total = 1.0;
  std::size_t cells_compared = 0;
  bool converged = true;
};

// Laplace-mixture law of one released coordinate W_j when the indicator is 1
// with probability `mass`.
struct MixtureLaw {
  double mass;
  double sigma;
  double operator()(double w) const {
    return ((1.0 - mass) * LaplacePdf(w / sigma) +
            mass * LaplacePdf((w - 1.0) / sigma)) /
           sigma;
  }
};

// KL divergence between the laws of the released vector W under hypotheses
// a and b, for the Laplace mechanism on `spec`. Each coordinate is a
// two-component mixture; coordinates and records are independent, so the
// per-record KL is a sum over cells and the total is n times that. Cells
// whose hypothesis masses agree contribute zero and are skipped.
inline absl::StatusOr<PrivatizedDivergence> KlPrivatizedExact(
    const LowerBoundInstance& inst, const PrivacyParams& params,
    const PartitionSpec& spec, const HypothesisTheta& a,
    const HypothesisTheta& b, const QuadratureSpec& mass_quad,
    const QuadratureSpec& kl_quad) {
  LDPHIST_RETURN_IF_ERROR(internal::CheckSameFamily(a, b));
  if (spec.d() != a.d()) {
    return absl::InvalidArgumentError("partition and hypotheses differ in d");
  }
  LDPHIST_ASSIGN_OR_RETURN(const DensityModel fa, BuildFTheta(a));
  LDPHIST_ASSIGN_OR_RETURN(const DensityModel fb, BuildFTheta(b));
  LDPHIST_ASSIGN_OR_RETURN(const ActiveCells cells,
                           ActiveCells::Enumerate(spec));

  const std::vector<std::size_t> blocks = internal::DifferingBlocks(a, b);
  std::vector<Box> block_boxes;
  for (std::size_t j : blocks) block_boxes.push_back(internal::BlockBox(a, j));

  const double sigma = params.sigma_w();
  const double lo = -1.0 - 24.0 * sigma;
  const double hi = 1.0 + 24.0 * sigma;
  const std::size_t d = static_cast<std::size_t>(spec.d());
  const Box support = fa.support();

  PrivatizedDivergence out;
  CompensatedSum kl;
  CompensatedSum log_affinity;
  for (std::size_t c = 0; c < cells.count(); ++c) {
    // Cell clipped to the support.
    Box box{std::vector<double>(d), std::vector<double>(d)};
    bool empty = false;
    for (std::size_t i = 0; i < d; ++i) {
      const double lower = CellLower(spec, cells[c], i);
      box.lo[i] = std::max(lower, support.lo[i]);
      box.hi[i] = std::min(lower + spec.h(), support.hi[i]);
      if (!(box.hi[i] > box.lo[i])) empty = true;
    }
    if (empty) continue;
    bool touches = false;
    for (const Box& block : block_boxes) {
      bool overlap = true;
      for (std::size_t i = 0; i < d; ++i) {
        if (!(std::min(box.hi[i], block.hi[i]) >
              std::max(box.lo[i], block.lo[i]))) {
          overlap = false;
        }
      }
      touches = touches || overlap;
    }
    if (!touches) continue;

    const QuadratureResult ma = Integrate(
        [&](std::span<const double> x) { return fa.Pdf(x); }, box,
        fa.breaks(), mass_quad);
    const QuadratureResult mb = Integrate(
        [&](std::span<const double> x) { return fb.Pdf(x); }, box,
        fb.breaks(), mass_quad);
    const MixtureLaw pa{ma.value, sigma};
    const MixtureLaw pb{mb.value, sigma};
    const QuadratureResult k_ab = Kl1d(pa, pb, lo, hi, {0.0, 1.0}, kl_quad);
    const QuadratureResult h2 =
        HellingerSquared1d(pa, pb, lo, hi, {0.0, 1.0}, kl_quad);
    kl.Add(k_ab.value);
    log_affinity.Add(std::log1p(-0.5 * h2.value));
    out.converged = out.converged && ma.converged && mb.converged &&
                    k_ab.converged && h2.converged;
    ++out.cells_compared;
  }
  const double n = static_cast<double>(inst.n());
  out.kl_per_record = kl.Value();
  out.kl_total = n * out.kl_per_record;
  out.log_affinity_total = n * log_affinity.Value();
  out.affinity_total = std::exp(out.log_affinity_total);
  return out;
}

// Channel partition used for verification: cells of side 1/(4k), one per
// block quadrant, and a ball covering the unit cube with a cell of margin.
inline absl::StatusOr<PartitionSpec> VerificationPartition(int k, int d) {
  const double h = 1.0 / (4.0 * k);
  return PartitionSpec::Create(d, h, std::sqrt(static_cast<double>(d)) + h);
}

struct VerificationCheck {
  std::string name;
  bool pass = false;
  std::vector<std::pair<std::string, double>> values;
  std::string note;
};

struct VerificationReport {
  std::int64_t n = 0;
  double alpha = 0.0;
  int d = 0;
  double lipschitz = 0.0;
  int k = 0;
  std::vector<VerificationCheck> checks;

  bool pass() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const VerificationCheck& c) { return c.pass; });
  }
};

struct VerificationOptions {
  double tv_tol = 1e-6;
  double mass_tol = 1e-6;
  int lipschitz_pairs = 200000;
  std::uint64_t seed = 0x5eed;
};

// Runs every lower-bound invariant for the instance chosen by the selection
// rule, using theta = +1 and its first single-flip neighbour.
inline absl::StatusOr<VerificationReport> VerifyLowerBound(
    std::int64_t n, double alpha, int d, double lipschitz,
    const VerificationOptions& options = {}) {
  LDPHIST_ASSIGN_OR_RETURN(const LowerBoundInstance inst,
                           LowerBoundInstance::Create(n, alpha, d, lipschitz));
  VerificationReport report;
  report.n = n;
  report.alpha = alpha;
  report.d = d;
  report.lipschitz = lipschitz;
  report.k = inst.k();
  const int k = inst.k();

  QuadratureSpec quad = QuadratureSpec::Reference(d);
  quad.tol = 1e-10;
  quad.richardson = true;
  const double selection = SelectionQuantity(n, alpha, d, lipschitz, k);
  {
    VerificationCheck c;
    c.name = "choose_k";
    const double previous =
        k > 1 ? SelectionQuantity(n, alpha, d, lipschitz, k - 1) : 0.0;
    c.pass = selection <= 1.0 && (k == 1 || previous > 1.0);
    c.values = {{"k", static_cast<double>(k)},
                {"selection_quantity", selection},
                {"selection_quantity_k_minus_1", previous}};
    report.checks.push_back(std::move(c));
  }

  const double tv = TvNeighbors(inst);
  const QuadratureResult tv_quad = AbsGIntegral(lipschitz, k, d, quad);
  {
    VerificationCheck c;
    c.name = "tv_closed_form_vs_quadrature";
    c.pass = std::abs(tv - tv_quad.value) <= options.tv_tol;
    c.values = {{"tv_closed_form", tv},
                {"tv_quadrature", tv_quad.value},
                {"converged", tv_quad.converged ? 1.0 : 0.0}};
    report.checks.push_back(std::move(c));
  }
  {
    VerificationCheck c;
    c.name = "rate_floor";
    const QuadratureResult floor = RateFloor(inst, quad);
    c.pass = floor.value > 0.0 && std::isfinite(floor.value);
    c.values = {{"rate_floor", floor.value},
                {"rate_floor_times_k", floor.value * k}};
    report.checks.push_back(std::move(c));
  }

  const double c_d = F0Constant(d);
  auto plus = inst.AllPlus();
  if (!plus.ok()) return plus.status();
  const HypothesisTheta neighbour = plus->Flipped(0);
  const bool buildable =
      lipschitz >= 4.0 * c_d && lipschitz / (8.0 * k) <= c_d;
  if (!buildable) {
    VerificationCheck c;
    c.name = "hypothesis_family";
    c.pass = false;
    c.note = absl::StrCat("f_theta needs 4 c_d <= L <= 8 k c_d; c_d=", c_d);
    report.checks.push_back(std::move(c));
    return report;
  }

  Rng rng(options.seed);
  {
    VerificationCheck normal;
    normal.name = "f_theta_normalisation";
    VerificationCheck lip;
    lip.name = "f_theta_lipschitz";
    VerificationCheck pos;
    pos.name = "f_theta_positivity";
    normal.pass = lip.pass = pos.pass = true;
    int label = 0;
    for (const HypothesisTheta* hyp :
         std::array<const HypothesisTheta*, 2>{&*plus, &neighbour}) {
      LDPHIST_ASSIGN_OR_RETURN(const DensityModel f, BuildFTheta(*hyp));
      const QuadratureResult mass = IntegrateModel(f, quad);
      const double probe = LipschitzProbe(f, options.lipschitz_pairs, rng);
      double minimum = f.Pdf(std::vector<double>(d, 0.5));
      std::vector<double> x(d);
      for (int i = 0; i < 10000; ++i) {
        for (double& xi : x) xi = UniformOpen01(rng);
        minimum = std::min(minimum, f.Pdf(x));
      }
      const std::string tag = label == 0 ? "plus" : "flipped";
      normal.pass = normal.pass && std::abs(mass.value - 1.0) <= options.mass_tol;
      normal.values.emplace_back("integral_" + tag, mass.value);
      lip.pass = lip.pass && probe <= lipschitz * (1.0 + 1e-9);
      lip.values.emplace_back("probe_" + tag, probe);
      pos.pass = pos.pass && minimum >= 0.0;
      pos.values.emplace_back("min_pdf_" + tag, minimum);
      ++label;
    }
    lip.values.emplace_back("L", lipschitz);
    pos.values.emplace_back("amplitude", lipschitz / (8.0 * k));
    pos.values.emplace_back("c_d", c_d);
    report.checks.push_back(std::move(normal));
    report.checks.push_back(std::move(lip));
    report.checks.push_back(std::move(pos));
  }
  {
    VerificationCheck c;
    c.name = "tv_hypotheses_vs_closed_form";
    LDPHIST_ASSIGN_OR_RETURN(const QuadratureResult r,
                             TvBetweenHypotheses(*plus, neighbour, quad));
    c.pass = std::abs(r.value - tv) <= options.tv_tol;
    c.values = {{"tv_hypotheses", r.value}, {"tv_closed_form", tv}};
    report.checks.push_back(std::move(c));
  }

  LDPHIST_ASSIGN_OR_RETURN(const PrivacyParams params,
                           PrivacyParams::ForAlpha(alpha));
  LDPHIST_ASSIGN_OR_RETURN(const PartitionSpec spec,
                           VerificationPartition(k, d));
  QuadratureSpec kl_quad;
  kl_quad.subdivisions = 1 << 10;
  kl_quad.tol = 0.0;
  kl_quad.rel_tol = 1e-9;
  kl_quad.richardson = true;
  kl_quad.max_evaluations = std::uint64_t{1} << 24;
  LDPHIST_ASSIGN_OR_RETURN(
      const PrivatizedDivergence div,
      KlPrivatizedExact(inst, params, spec, *plus, neighbour, quad, kl_quad));
  const double bound = KlBound(inst, tv);
  {
    VerificationCheck c;
    c.name = "lemma_bound";
    c.pass = div.kl_total <= bound;
    c.values = {{"kl_privatized_exact", div.kl_total},
                {"kl_per_record", div.kl_per_record},
                {"kl_bound", bound},
                {"cells_compared", static_cast<double>(div.cells_compared)},
                {"converged", div.converged ? 1.0 : 0.0}};
    report.checks.push_back(std::move(c));
  }
  {
    VerificationCheck c;
    c.name = "selection_consequence";
    c.pass = div.kl_total <= 1.0 && div.affinity_total >= 0.5;
    c.values = {{"n_times_kl_per_record", div.kl_total},
                {"product_affinity", div.affinity_total},
                {"selection_quantity", selection},
                {"kl_bound_at_k", bound}};
    report.checks.push_back(std::move(c));
  }
  return report;
}

}  // namespace ldphist

#endif  // LDPHIST_LOWERBOUND_H_
