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

// Acceptance gate: prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "ldphist/harness/config.h"
#include "ldphist/harness/experiment.h"
#include "ldphist/harness/output.h"
#include "ldphist/harness/tasks.h"
#include "ldphist/ldphist.h"
#include "oracles/oracles.h"

namespace ldphist {
namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void Require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      absl::StrAppend(&detail, detail.empty() ? "" : "; ", "FAILED ", what);
    }
  }
  void Note(const std::string& what) {
    absl::StrAppend(&detail, detail.empty() ? "" : "; ", what);
  }
};

std::string Fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// Criterion 1: empirical privacy certificate.
Outcome LdpCertificate() {
  Outcome o;
  for (double alpha : {0.5, 1.0, 2.0}) {
    for (int d : {1, 2}) {
      const auto r = harness::LdpCheck(alpha, d, 0.5, 1.0, 10000,
                                       SeedDerive(1, d, 0, StreamRole::kProbe));
      if (!r.ok()) {
        o.Require(false, r.status().ToString());
        continue;
      }
      const std::string tag = absl::StrCat("alpha=", alpha, ",d=", d);
      o.Require(r->within_alpha, tag + " max ratio " + Fmt(r->max_log_ratio));
      o.Require(r->reaches_alpha,
                tag + " distinct-cell sup " + Fmt(r->max_log_ratio_distinct));
    }
  }
  return o;
}

// Criterion 2: E[G_j | data] for a frozen data set.
Outcome MixtureClosure() {
  Outcome o;
  const int n = 1000;
  const std::int64_t m = 100000;
  const auto spec = PartitionSpec::Create(1, 0.25, 1.5).value();
  const auto cells = ActiveCells::Enumerate(spec).value();
  const auto params = PrivacyParams::ForAlpha(1.0).value();
  const auto tent = BuildTent(1).value();
  Rng data_rng(SeedDerive(2, n, 0, StreamRole::kData));
  PointSet data(1);
  for (int i = 0; i < n; ++i) tent.SampleExact(data_rng, data.Append());
  std::vector<double> mu(cells.count(), 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (const auto j = cells.FindPoint(spec, data[i])) mu[*j] += 1.0 / n;
  }
  Rng noise(SeedDerive(2, n, 0, StreamRole::kPrivatize));
  CellCounts counts(cells.count());
  for (std::int64_t rep = 0; rep < m; ++rep) {
    for (std::size_t i = 0; i < data.size(); ++i) {
      PrivatizeStream(data[i], spec, cells, params, noise, counts);
    }
  }
  const double h0 = LaplaceCdf(0.0);
  const double h1 = LaplaceCdf(-1.0 / params.sigma_w());
  double worst = 0.0;
  for (std::size_t j = 0; j < cells.count(); ++j) {
    const double expected = h0 + mu[j] * (h1 - h0);
    const double se = std::sqrt(expected * (1.0 - expected) /
                                static_cast<double>(counts.n()));
    const double z = std::abs(counts.G(j) - expected) / se;
    worst = std::max(worst, z);
    o.Require(z <= 4.0, absl::StrCat("cell ", j, " z=", Fmt(z)));
  }
  o.Note(absl::StrCat(cells.count(), " cells, worst |z|=", Fmt(worst)));
  return o;
}

harness::ExperimentConfig RateConfig(harness::EstimatorKind kind, double a) {
  harness::ExperimentConfig cfg;
  cfg.experiment_id = "acceptance_rate";
  cfg.d = 1;
  cfg.alpha = 1.0;
  cfg.density = "tent";
  cfg.c_h = 1.0;
  cfg.a = a;
  // Fixed radius covering the support [0, 1].
  cfg.c_r = 1.0;
  cfg.b = 0.0;
  cfg.n_grid = {1 << 8, 1 << 11, 1 << 14, 1 << 17};
  cfg.replications = 30;
  cfg.master_seed = 20260101;
  cfg.estimators = {kind};
  cfg.schedule_mode = ScheduleMode::kUpc;
  cfg.quad = QuadratureSpec::Reference(1);
  return cfg;
}

Outcome SlopeCheck(const harness::RateStudyResult& result, double target,
                   double tol, bool require_decreasing) {
  Outcome o;
  const auto& s = result.summaries.front();
  if (!s.fit) {
    o.Require(false, "no slope fit");
    return o;
  }
  o.Require(std::abs(s.fit->slope - target) <= tol,
            "slope " + Fmt(s.fit->slope));
  o.Note(absl::StrCat("slope=", Fmt(s.fit->slope), " target ", Fmt(target),
                      " +- ", Fmt(tol)));
  std::string means = "means";
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    absl::StrAppend(&means, " ", Fmt(s.points[i].mean));
    if (require_decreasing && i > 0) {
      o.Require(s.points[i].mean < s.points[i - 1].mean,
                absl::StrCat("mean not decreasing at n=", s.points[i].n));
    }
    o.Require(s.points[i].all_converged,
              absl::StrCat("quadrature not converged at n=", s.points[i].n));
  }
  o.Note(means);
  return o;
}

// Criterion 6: construction of the hypothesis family.
Outcome LowerBoundConstruction() {
  Outcome o;
  const double lipschitz = 8.0;
  Rng rng(SeedDerive(6, 0, 0, StreamRole::kProbe));
  double worst_mass = 0.0, worst_lip = 0.0, worst_tv = 0.0;
  for (int d : {1, 2}) {
    QuadratureSpec quad = QuadratureSpec::Reference(d);
    quad.tol = 1e-10;
    quad.richardson = true;
    for (int k : {1, 2, 3}) {
      std::vector<HypothesisTheta> family;
      family.push_back(HypothesisTheta::AllPlus(k, lipschitz, d).value());
      for (int rep = 0; rep < 3; ++rep) {
        std::vector<int> theta(HypothesisTheta::BlockCount(k, d));
        for (int& t : theta) t = UniformOpen01(rng) < 0.5 ? -1 : 1;
        family.push_back(
            HypothesisTheta::Create(k, lipschitz, d, theta).value());
      }
      for (const auto& hyp : family) {
        const auto f = BuildFTheta(hyp);
        if (!f.ok()) {
          o.Require(false, f.status().ToString());
          continue;
        }
        const double mass = IntegrateModel(*f, quad).value;
        worst_mass = std::max(worst_mass, std::abs(mass - 1.0));
        const double probe = LipschitzProbe(*f, 100000, rng);
        worst_lip = std::max(worst_lip, probe);
        o.Require(std::abs(mass - 1.0) <= 1e-6,
                  absl::StrCat("d=", d, " k=", k, " mass ", Fmt(mass)));
        // Difference quotients at slope exactly L carry rounding error.
        o.Require(probe <= lipschitz * (1 + 1e-9),
                  absl::StrCat("d=", d, " k=", k, " probe ", Fmt(probe)));
      }
      const auto tv =
          TvBetweenHypotheses(family[0], family[0].Flipped(0), quad).value();
      const double closed = TvNeighbors(lipschitz, k, d);
      worst_tv = std::max(worst_tv, std::abs(tv.value - closed));
      o.Require(std::abs(tv.value - closed) <= 1e-6,
                absl::StrCat("d=", d, " k=", k, " tv ", Fmt(tv.value),
                             " vs ", Fmt(closed)));
      const double g_abs = AbsGIntegral(1.0, k, d, quad).value;
      worst_tv = std::max(worst_tv, std::abs(g_abs - TvNeighbors(1.0, k, d)));
      o.Require(std::abs(g_abs - TvNeighbors(1.0, k, d)) <= 1e-6,
                absl::StrCat("L=1 d=", d, " k=", k, " tv ", Fmt(g_abs)));
    }
  }
  o.Require(std::abs(TvNeighbors(1.0, 1, 1) - 1.0 / 32.0) <= 1e-15,
            "tv(L=1,d=1,k=1)");
  const auto k = ChooseK(1024, 1.0, 1, 8.0);
  o.Require(k.ok() && *k == 6, "choose_k(1024,1,1,8)");
  o.Note(absl::StrCat("max |mass-1|=", Fmt(worst_mass), " max probe=",
                      Fmt(worst_lip), " max tv error=", Fmt(worst_tv),
                      " choose_k=", k.ok() ? *k : -1));
  return o;
}

// Criterion 7: information bound.
Outcome InformationBound() {
  Outcome o;
  const double lipschitz = 8.0;
  const std::int64_t n = 1024;
  QuadratureSpec kl_quad;
  kl_quad.subdivisions = 1 << 10;
  kl_quad.tol = 0.0;
  kl_quad.rel_tol = 1e-9;
  kl_quad.richardson = true;
  kl_quad.max_evaluations = std::uint64_t{1} << 24;
  double worst_ratio = 0.0;
  for (double alpha : {0.5, 1.0}) {
    const auto params = PrivacyParams::ForAlpha(alpha).value();
    for (int d : {1, 2}) {
      QuadratureSpec quad = QuadratureSpec::Reference(d);
      quad.tol = 1e-10;
      quad.richardson = true;
      for (int k : {1, 2, 3}) {
        const auto inst =
            LowerBoundInstance::WithK(n, alpha, d, lipschitz, k).value();
        const auto plus = inst.AllPlus().value();
        const auto div =
            KlPrivatizedExact(inst, params, VerificationPartition(k, d).value(),
                              plus, plus.Flipped(0), quad, kl_quad);
        if (!div.ok()) {
          o.Require(false, div.status().ToString());
          continue;
        }
        const double bound = KlBound(inst, TvNeighbors(inst));
        worst_ratio = std::max(worst_ratio, div->kl_total / bound);
        o.Require(div->kl_total <= bound,
                  absl::StrCat("alpha=", alpha, " d=", d, " k=", k, " kl ",
                               Fmt(div->kl_total), " > ", Fmt(bound)));
        o.Require(div->converged, absl::StrCat("alpha=", alpha, " d=", d,
                                               " k=", k, " not converged"));
      }
      const auto report = VerifyLowerBound(n, alpha, d, lipschitz);
      if (!report.ok()) {
        o.Require(false, report.status().ToString());
        continue;
      }
      for (const auto& c : report->checks) {
        if (c.name != "selection_consequence") continue;
        o.Require(c.pass, absl::StrCat("selection consequence alpha=", alpha,
                                       " d=", d));
        o.Note(absl::StrCat("alpha=", alpha, " d=", d, " k=", report->k,
                            " nKL=", Fmt(c.values[0].second),
                            " affinity=", Fmt(c.values[1].second)));
      }
    }
  }
  o.Note("max kl/bound=" + Fmt(worst_ratio));
  return o;
}

// Criterion 8: Scheffe identity on random histogram pairs.
Outcome Scheffe() {
  Outcome o;
  Rng rng(SeedDerive(8, 0, 0, StreamRole::kProbe));
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int d = 1 + i % 3;
    const double h = 0.1 + 0.4 * UniformOpen01(rng);
    const auto spec = PartitionSpec::Create(d, h, 1.0).value();
    auto cells = std::make_shared<const ActiveCells>(
        ActiveCells::Enumerate(spec).value());
    auto draw = [&]() {
      std::vector<double> v(cells->count());
      double mass = 0.0;
      for (double& x : v) {
        x = UniformOpen01(rng) < 0.2 ? 0.0 : UniformOpen01(rng);
        mass += x * CellVolume(spec);
      }
      for (double& x : v) x /= mass;
      return Histogram(spec, cells, std::move(v));
    };
    const Histogram a = draw();
    const Histogram b = draw();
    const double l1 = L1DistanceExact(a, b).value();
    const double tv = TvDistanceExact(a, b).value();
    const double rel = std::abs(tv - 0.5 * l1) / (0.5 * l1);
    worst = std::max(worst, rel);
    o.Require(rel <= 1e-12, absl::StrCat("pair ", i, " rel ", Fmt(rel)));
  }
  o.Note("max relative error " + Fmt(worst));
  return o;
}

// Criterion 9: oracle checks.
Outcome Oracles() {
  Outcome o;
  QuadratureSpec quad;
  quad.subdivisions = 16;
  quad.tol = 1e-10;
  quad.richardson = true;
  for (int d : {1, 2, 3}) {
    const double closed = G0Integral(1.0, d);
    const double survival =
        static_cast<double>(oracle::G0IntegralBySurvival(1.0, d));
    const auto q = Integrate(
        [](std::span<const double> x) { return G0Eval(1.0, x).value(); },
        Box::Cube(d, 0.0, 1.0), AxisBreaks(d, std::vector<double>{0.5}),
        quad);
    o.Require(std::abs(q.value - closed) <= 1e-6,
              absl::StrCat("g0 d=", d, " quadrature ", Fmt(q.value)));
    o.Require(std::abs(survival - closed) <= 1e-6,
              absl::StrCat("g0 d=", d, " survival ", Fmt(survival)));
  }
  const double z = -1.0 / (2.0 * std::numbers::sqrt2);
  const double cdf_err = std::abs(LaplaceCdf(z) - 0.5 * std::exp(-0.5));
  o.Require(cdf_err <= 1e-12, "laplace_cdf error " + Fmt(cdf_err));
  double worst_g = 0.0;
  for (int d : {1, 2, 3}) {
    for (int k : {1, 2, 3}) {
      const double g = std::abs(GIntegral(1.0, k, d, quad).value);
      worst_g = std::max(worst_g, g);
      o.Require(g <= 1e-9, absl::StrCat("int g d=", d, " k=", k, " ", Fmt(g)));
    }
  }
  o.Note(absl::StrCat("laplace_cdf error ", Fmt(cdf_err), ", max |int g| ",
                      Fmt(worst_g)));
  return o;
}

// CSV with the wall-time column removed.
std::string CsvWithoutWallTime(const harness::ExperimentConfig& cfg,
                               const harness::RateStudyResult& result) {
  std::ostringstream out;
  harness::WriteRowsCsv(out, cfg, result.rows);
  std::string stripped;
  for (absl::string_view line : absl::StrSplit(out.str(), '\n')) {
    std::vector<absl::string_view> fields = absl::StrSplit(line, ',');
    if (fields.size() > 11) fields.erase(fields.begin() + 11);
    absl::StrAppend(&stripped, absl::StrJoin(fields, ","), "\n");
  }
  return stripped;
}

int Report(int id, const std::string& name, const Outcome& o, double seconds) {
  std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL",
              id, name.c_str(), o.detail.c_str(), seconds);
  std::fflush(stdout);
  return o.pass ? 0 : 1;
}

double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

int Main() {
  int failures = 0;
  auto timed = [&](int id, const std::string& name,
                   const std::function<Outcome()>& fn) {
    const auto start = std::chrono::steady_clock::now();
    const Outcome o = fn();
    failures += Report(id, name, o, Seconds(start));
  };

  timed(1, "ldp certificate", [] {
    const auto start = std::chrono::steady_clock::now();
    Outcome o = LdpCertificate();
    o.Require(Seconds(start) < 30.0, "runtime");
    return o;
  });
  timed(2, "threshold mean identity", [] {
    const auto start = std::chrono::steady_clock::now();
    Outcome o = MixtureClosure();
    o.Require(Seconds(start) < 120.0, "runtime");
    return o;
  });

  const auto private_cfg = RateConfig(harness::EstimatorKind::kPrivate, 0.25);
  const auto rate_start = std::chrono::steady_clock::now();
  const auto private_run = harness::RateStudy(private_cfg, 1);
  const double rate_seconds = Seconds(rate_start);
  if (private_run.ok()) {
    Outcome o = SlopeCheck(*private_run, -0.25, 0.08, true);
    o.Require(rate_seconds < 1200.0, "runtime");
    failures += Report(3, "private rate", o, rate_seconds);
  } else {
    Outcome o;
    o.Require(false, private_run.status().ToString());
    failures += Report(3, "private rate", o, rate_seconds);
  }

  timed(4, "non-private rate", [] {
    const auto cfg = RateConfig(harness::EstimatorKind::kNonPrivate, 1.0 / 3.0);
    const auto run = harness::RateStudy(cfg, 1);
    if (!run.ok()) {
      Outcome o;
      o.Require(false, run.status().ToString());
      return o;
    }
    return SlopeCheck(*run, -1.0 / 3.0, 0.06, false);
  });

  timed(5, "total mass", [&] {
    Outcome o;
    if (!private_run.ok()) {
      o.Require(false, "no private run");
      return o;
    }
    const auto& last = private_run->summaries.front().points.back();
    o.Require(last.n == (1 << 17), "largest n");
    o.Require(last.mean_abs_mass_deviation <= 0.05,
              "mean |mass-1| " + Fmt(last.mean_abs_mass_deviation));
    o.Note("mean |mass-1| at n=2^17: " + Fmt(last.mean_abs_mass_deviation));
    return o;
  });

  timed(6, "lower-bound construction", LowerBoundConstruction);
  timed(7, "information bound", InformationBound);
  timed(8, "scheffe identity", Scheffe);
  timed(9, "oracle checks", Oracles);

  timed(10, "determinism", [&] {
    Outcome o;
    if (!private_run.ok()) {
      o.Require(false, "no private run");
      return o;
    }
    const auto parallel = harness::RateStudy(private_cfg, 8);
    if (!parallel.ok()) {
      o.Require(false, parallel.status().ToString());
      return o;
    }
    const std::string serial_csv = CsvWithoutWallTime(private_cfg, *private_run);
    const std::string parallel_csv = CsvWithoutWallTime(private_cfg, *parallel);
    o.Require(serial_csv == parallel_csv, "CSV differs between 1 and 8 workers");
    o.Note(absl::StrCat(private_run->rows.size(), " rows identical"));
    return o;
  });

  std::printf("%s: %d criteria failed\n", failures == 0 ? "PASS" : "FAIL",
              failures);
  return failures == 0 ? 0 : 1;
}

}  // namespace
}  // namespace ldphist

int main() { return ldphist::Main(); }
