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

// Command-line front end:
//   ldphist rate-study --config <path> [--workers K]
//   ldphist ldp-check --alpha A --d D --h H --r R --trials T --seed S
//   ldphist estimate --input <csv> --alpha A --h H --r R --seed S --out <csv>
//                    [--no-privacy] [--clip-normalize]
//   ldphist lowerbound-verify --n N --alpha A --d D --L L
//   ldphist validate-schedule --d D --a A --b B --mode upc|suc|rate
//
// Exit status: 0 on success (and, for checks, when every check passes),
// 1 when a check fails, 2 on invalid input.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "json.hpp"
#include "ldphist/harness/config.h"
#include "ldphist/harness/experiment.h"
#include "ldphist/harness/output.h"
#include "ldphist/harness/tasks.h"
#include "ldphist/lowerbound.h"
#include "ldphist/partition.h"

namespace {

constexpr int kExitCheckFailed = 1;
constexpr int kExitInvalid = 2;

int Fail(const absl::Status& status) {
  std::cerr << "error: " << status << "\n";
  return kExitInvalid;
}

absl::StatusOr<ldphist::PointSet> ReadPoints(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open '", path, "'"));
  std::vector<double> coords;
  int d = 0;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    absl::string_view view = absl::StripAsciiWhitespace(line);
    if (view.empty()) continue;
    std::vector<absl::string_view> fields = absl::StrSplit(view, ',');
    std::vector<double> row;
    bool numeric = true;
    for (absl::string_view f : fields) {
      double v;
      if (!absl::SimpleAtod(absl::StripAsciiWhitespace(f), &v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      // A non-numeric first line is a header.
      if (line_no == 1) continue;
      return absl::InvalidArgumentError(
          absl::StrCat(path, ":", line_no, ": non-numeric field"));
    }
    if (d == 0) d = static_cast<int>(row.size());
    if (static_cast<int>(row.size()) != d) {
      return absl::InvalidArgumentError(absl::StrCat(
          path, ":", line_no, ": expected ", d, " columns, got ", row.size()));
    }
    coords.insert(coords.end(), row.begin(), row.end());
  }
  if (d == 0) return absl::InvalidArgumentError("input has no points");
  return ldphist::PointSet(d, std::move(coords));
}

int RunRateStudy(const std::string& config_path, int workers) {
  auto cfg = ldphist::harness::LoadConfig(config_path);
  if (!cfg.ok()) return Fail(cfg.status());
  auto result = ldphist::harness::RateStudy(*cfg, workers);
  if (!result.ok()) return Fail(result.status());
  if (auto s = ldphist::harness::WriteRateStudy(*cfg, *result); !s.ok()) {
    return Fail(s);
  }
  std::cout << ldphist::harness::SummaryJson(*cfg, *result).dump(2) << "\n";
  return 0;
}

int RunLdpCheck(double alpha, int d, double h, double r, int trials,
                std::uint64_t seed) {
  auto result = ldphist::harness::LdpCheck(alpha, d, h, r, trials, seed);
  if (!result.ok()) return Fail(result.status());
  nlohmann::json j;
  j["alpha"] = result->alpha;
  j["sigma_w"] = result->sigma_w;
  j["cells"] = result->cells;
  j["trials"] = result->trials;
  j["max_log_ratio"] = result->max_log_ratio;
  j["max_log_ratio_distinct_cells"] = result->max_log_ratio_distinct;
  j["within_alpha"] = result->within_alpha;
  j["reaches_alpha"] = result->reaches_alpha;
  std::cout << j.dump(2) << "\n";
  return result->within_alpha && result->reaches_alpha ? 0 : kExitCheckFailed;
}

int RunEstimate(const std::string& input, const std::string& out_path,
                const ldphist::harness::EstimateOptions& options) {
  auto points = ReadPoints(input);
  if (!points.ok()) return Fail(points.status());
  auto hist = ldphist::harness::EstimateFromPoints(*points, options);
  if (!hist.ok()) return Fail(hist.status());
  std::ofstream out(out_path);
  if (!out) {
    return Fail(absl::PermissionDeniedError(
        absl::StrCat("cannot write '", out_path, "'")));
  }
  ldphist::harness::WriteHistogramCsv(out, *hist);
  return 0;
}

int RunLowerBoundVerify(std::int64_t n, double alpha, int d, double lipschitz) {
  auto report = ldphist::VerifyLowerBound(n, alpha, d, lipschitz);
  if (!report.ok()) return Fail(report.status());
  std::cout << ldphist::harness::VerificationJson(*report).dump(2) << "\n";
  return report->pass() ? 0 : kExitCheckFailed;
}

int RunValidateSchedule(int d, double a, double b, const std::string& mode) {
  auto parsed = ldphist::harness::ParseScheduleMode(mode);
  if (!parsed.ok()) return Fail(parsed.status());
  if (d < 1) return Fail(absl::InvalidArgumentError("d must be >= 1"));
  auto schedule = ldphist::ScheduleSpec::Create(1.0, a, 1.0, b);
  if (!schedule.ok()) return Fail(schedule.status());
  const ldphist::ScheduleReport report =
      ldphist::ValidateSchedule(d, *schedule, *parsed);
  nlohmann::json j;
  j["d"] = d;
  j["a"] = a;
  j["b"] = b;
  j["mode"] = mode;
  j["pass"] = report.pass;
  nlohmann::json violations = nlohmann::json::array();
  for (const auto& v : report.violations) {
    violations.push_back({{"row", v.row}, {"condition", v.condition}});
  }
  j["violations"] = std::move(violations);
  j["notes"] = report.notes;
  std::cout << j.dump(2) << "\n";
  return report.pass ? 0 : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Locally private histogram density estimation"};
  app.require_subcommand(1);
  // "-h" is taken by the bandwidth option.
  app.set_help_flag("--help", "Print this help message and exit");

  std::string config_path;
  int workers = static_cast<int>(
      std::max(1u, std::thread::hardware_concurrency()));
  auto* rate = app.add_subcommand("rate-study", "Monte Carlo rate study");
  rate->add_option("--config", config_path, "experiment config file")
      ->required();
  rate->add_option("--workers", workers, "worker threads")
      ->check(CLI::PositiveNumber);

  double alpha = 1.0, h = 0.1, r = 1.0;
  int d = 1, trials = 10000;
  std::uint64_t seed = 0;
  auto* ldp = app.add_subcommand("ldp-check", "empirical privacy check");
  ldp->add_option("--alpha", alpha)->required();
  ldp->add_option("--d", d)->required();
  ldp->add_option("--h", h)->required();
  ldp->add_option("--r", r)->required();
  ldp->add_option("--trials", trials)->required();
  ldp->add_option("--seed", seed)->required();

  std::string input, out;
  bool no_privacy = false, clip = false;
  auto* est = app.add_subcommand("estimate", "histogram from a point file");
  est->add_option("--input", input, "CSV with d columns")->required();
  est->add_option("--alpha", alpha);
  est->add_option("--h", h)->required();
  est->add_option("--r", r)->required();
  est->add_option("--seed", seed);
  est->add_option("--out", out)->required();
  est->add_flag("--no-privacy", no_privacy, "empirical histogram baseline");
  est->add_flag("--clip-normalize", clip,
                "post-process: clip negatives, renormalise to unit mass");

  std::int64_t n = 1;
  double lipschitz = 1.0;
  auto* lb = app.add_subcommand("lowerbound-verify",
                                "check the lower-bound construction");
  lb->add_option("--n", n)->required();
  lb->add_option("--alpha", alpha)->required();
  lb->add_option("--d", d)->required();
  lb->add_option("--L", lipschitz)->required();

  double a = 0.0, b = 0.0;
  std::string mode;
  auto* vs = app.add_subcommand("validate-schedule",
                                "check bandwidth/radius exponents");
  vs->add_option("--d", d)->required();
  vs->add_option("--a", a)->required();
  vs->add_option("--b", b)->required();
  vs->add_option("--mode", mode, "upc|suc|rate")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  if (*rate) return RunRateStudy(config_path, workers);
  if (*ldp) return RunLdpCheck(alpha, d, h, r, trials, seed);
  if (*est) {
    ldphist::harness::EstimateOptions options;
    options.alpha = alpha;
    options.h = h;
    options.r = r;
    options.seed = seed;
    options.privacy = !no_privacy;
    options.clip_normalize = clip;
    return RunEstimate(input, out, options);
  }
  if (*lb) return RunLowerBoundVerify(n, alpha, d, lipschitz);
  if (*vs) return RunValidateSchedule(d, a, b, mode);
  return kExitInvalid;
}
