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

// Experiment configuration: a flat `key = value` text format.
//
//   experiment_id    = tent_private      (default "experiment")
//   d                = 1
//   alpha            = 1.0
//   density          = tent              builtin model name
//   density_params   = 8,2               optional, comma-separated
//   c_h              = 1.0               h_n = c_h n^-a
//   a                = 0.25
//   c_r              = auto | <real>     r_n = c_r n^b; "auto" covers the
//   b                = 0                 support with one cell of margin
//   n_grid           = 256,2048,16384    strictly increasing
//   replications     = 30
//   master_seed      = 1
//   estimators       = private,nonprivate,mean_noise
//   schedule_mode    = upc | suc | rate  (default upc)
//   quad_subdivisions = 1024             power of two
//   quad_tol         = 1e-8
//   output_path      = results.csv
//
// Blank lines and lines starting with '#' are ignored. Unknown or repeated
// keys are errors.

#ifndef LDPHIST_HARNESS_CONFIG_H_
#define LDPHIST_HARNESS_CONFIG_H_

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "absl/container/flat_hash_set.h"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/string_view.h"
#include "ldphist/internal/status_macros.h"
#include "ldphist/partition.h"
#include "ldphist/quadrature.h"

namespace ldphist::harness {

enum class EstimatorKind { kPrivate, kNonPrivate, kMeanNoise };

inline const char* EstimatorName(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::kPrivate:
      return "private";
    case EstimatorKind::kNonPrivate:
      return "nonprivate";
    case EstimatorKind::kMeanNoise:
      return "mean_noise";
  }
  return "?";
}

inline absl::StatusOr<EstimatorKind> ParseEstimator(absl::string_view name) {
  if (name == "private") return EstimatorKind::kPrivate;
  if (name == "nonprivate") return EstimatorKind::kNonPrivate;
  if (name == "mean_noise") return EstimatorKind::kMeanNoise;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown estimator '", name, "'"));
}

inline absl::StatusOr<ScheduleMode> ParseScheduleMode(absl::string_view s) {
  if (s == "upc") return ScheduleMode::kUpc;
  if (s == "suc") return ScheduleMode::kSuc;
  if (s == "rate") return ScheduleMode::kRate;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown schedule mode '", s, "' (upc|suc|rate)"));
}

struct ExperimentConfig {
  std::string experiment_id = "experiment";
  int d = 1;
  double alpha = 1.0;
  std::string density = "tent";
  std::vector<double> density_params;
  double c_h = 1.0;
  double a = 0.25;
  // Unset means "auto": cover the support with one cell of margin (b = 0).
  std::optional<double> c_r;
  double b = 0.0;
  std::vector<std::int64_t> n_grid;
  int replications = 1;
  std::uint64_t master_seed = 0;
  std::vector<EstimatorKind> estimators = {EstimatorKind::kPrivate};
  ScheduleMode schedule_mode = ScheduleMode::kUpc;
  QuadratureSpec quad;
  std::string output_path = "results.csv";

  bool Wants(EstimatorKind kind) const {
    for (EstimatorKind e : estimators) {
      if (e == kind) return true;
    }
    return false;
  }
};

namespace internal {

inline absl::StatusOr<double> ParseDouble(absl::string_view key,
                                          absl::string_view v) {
  double out;
  if (!absl::SimpleAtod(v, &out) || !std::isfinite(out)) {
    return absl::InvalidArgumentError(
        absl::StrCat("config: '", key, "' expects a real, got '", v, "'"));
  }
  return out;
}

template <typename Int>
absl::StatusOr<Int> ParseInt(absl::string_view key, absl::string_view v) {
  Int out;
  if (!absl::SimpleAtoi(v, &out)) {
    return absl::InvalidArgumentError(
        absl::StrCat("config: '", key, "' expects an integer, got '", v, "'"));
  }
  return out;
}

inline std::vector<absl::string_view> SplitList(absl::string_view v) {
  std::vector<absl::string_view> out;
  for (absl::string_view item : absl::StrSplit(v, ',')) {
    item = absl::StripAsciiWhitespace(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace internal

// Cross-field checks. Schedule conditions are not checked here; a failing
// schedule is reported as a warning by the rate study.
inline absl::Status ValidateConfig(const ExperimentConfig& cfg) {
  if (cfg.d < 1) return absl::InvalidArgumentError("config: d must be >= 1");
  if (!(cfg.alpha > 0.0)) {
    return absl::InvalidArgumentError("config: alpha must be positive");
  }
  if (cfg.n_grid.empty()) {
    return absl::InvalidArgumentError("config: n_grid is empty");
  }
  for (std::size_t i = 0; i < cfg.n_grid.size(); ++i) {
    if (cfg.n_grid[i] < 1) {
      return absl::InvalidArgumentError("config: n_grid entries must be >= 1");
    }
    if (i > 0 && cfg.n_grid[i] <= cfg.n_grid[i - 1]) {
      return absl::InvalidArgumentError(
          "config: n_grid must be strictly increasing");
    }
  }
  if (cfg.replications < 1) {
    return absl::InvalidArgumentError("config: replications must be >= 1");
  }
  if (cfg.estimators.empty()) {
    return absl::InvalidArgumentError("config: no estimators requested");
  }
  const int m = cfg.quad.subdivisions;
  if (m < 1 || (m & (m - 1)) != 0) {
    return absl::InvalidArgumentError(
        "config: quad_subdivisions must be a power of two");
  }
  if (!(cfg.quad.tol > 0.0)) {
    return absl::InvalidArgumentError("config: quad_tol must be positive");
  }
  if (!cfg.c_r && cfg.b != 0.0) {
    return absl::InvalidArgumentError("config: c_r = auto requires b = 0");
  }
  return ScheduleSpec::Create(cfg.c_h, cfg.a, cfg.c_r.value_or(1.0), cfg.b)
      .status();
}

inline absl::StatusOr<ExperimentConfig> ParseConfig(absl::string_view text) {
  ExperimentConfig cfg;
  cfg.quad.subdivisions = -1;
  absl::flat_hash_set<std::string> seen;
  int line_no = 0;
  for (absl::string_view line : absl::StrSplit(text, '\n')) {
    ++line_no;
    line = absl::StripAsciiWhitespace(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == absl::string_view::npos) {
      return absl::InvalidArgumentError(
          absl::StrCat("config line ", line_no, ": expected key = value"));
    }
    const std::string key(absl::StripAsciiWhitespace(line.substr(0, eq)));
    const absl::string_view value =
        absl::StripAsciiWhitespace(line.substr(eq + 1));
    if (!seen.insert(key).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("config line ", line_no, ": repeated key '", key, "'"));
    }
    if (key == "experiment_id") {
      cfg.experiment_id = std::string(value);
    } else if (key == "d") {
      LDPHIST_ASSIGN_OR_RETURN(cfg.d, internal::ParseInt<int>(key, value));
    } else if (key == "alpha") {
      LDPHIST_ASSIGN_OR_RETURN(cfg.alpha, internal::ParseDouble(key, value));
    } else if (key == "density") {
      cfg.density = std::string(value);
    } else if (key == "density_params") {
      for (absl::string_view item : internal::SplitList(value)) {
        LDPHIST_ASSIGN_OR_RETURN(const double p,
                                 internal::ParseDouble(key, item));
        cfg.density_params.push_back(p);
      }
    } else if (key == "c_h") {
      LDPHIST_ASSIGN_OR_RETURN(cfg.c_h, internal::ParseDouble(key, value));
    } else if (key == "a") {
      LDPHIST_ASSIGN_OR_RETURN(cfg.a, internal::ParseDouble(key, value));
    } else if (key == "c_r") {
      if (value == "auto") {
        cfg.c_r.reset();
      } else {
        LDPHIST_ASSIGN_OR_RETURN(cfg.c_r, internal::ParseDouble(key, value));
      }
    } else if (key == "b") {
      LDPHIST_ASSIGN_OR_RETURN(cfg.b, internal::ParseDouble(key, value));
    } else if (key == "n_grid") {
      for (absl::string_view item : internal::SplitList(value)) {
        LDPHIST_ASSIGN_OR_RETURN(const std::int64_t n,
                                 internal::ParseInt<std::int64_t>(key, item));
        cfg.n_grid.push_back(n);
      }
    } else if (key == "replications") {
      LDPHIST_ASSIGN_OR_RETURN(cfg.replications,
                               internal::ParseInt<int>(key, value));
    } else if (key == "master_seed") {
      LDPHIST_ASSIGN_OR_RETURN(cfg.master_seed,
                               internal::ParseInt<std::uint64_t>(key, value));
    } else if (key == "estimators") {
      cfg.estimators.clear();
      for (absl::string_view item : internal::SplitList(value)) {
        LDPHIST_ASSIGN_OR_RETURN(const EstimatorKind e, ParseEstimator(item));
        cfg.estimators.push_back(e);
      }
    } else if (key == "schedule_mode") {
      LDPHIST_ASSIGN_OR_RETURN(cfg.schedule_mode, ParseScheduleMode(value));
    } else if (key == "quad_subdivisions") {
      LDPHIST_ASSIGN_OR_RETURN(cfg.quad.subdivisions,
                               internal::ParseInt<int>(key, value));
    } else if (key == "quad_tol") {
      LDPHIST_ASSIGN_OR_RETURN(cfg.quad.tol, internal::ParseDouble(key, value));
    } else if (key == "output_path") {
      cfg.output_path = std::string(value);
    } else {
      return absl::InvalidArgumentError(
          absl::StrCat("config line ", line_no, ": unknown key '", key, "'"));
    }
  }
  if (cfg.quad.subdivisions == -1) {
    cfg.quad.subdivisions = QuadratureSpec::Reference(cfg.d).subdivisions;
  }
  LDPHIST_RETURN_IF_ERROR(ValidateConfig(cfg));
  return cfg;
}

inline absl::StatusOr<ExperimentConfig> LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    return absl::NotFoundError(absl::StrCat("cannot open config '", path, "'"));
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseConfig(buffer.str());
}

}  // namespace ldphist::harness

#endif  // LDPHIST_HARNESS_CONFIG_H_
