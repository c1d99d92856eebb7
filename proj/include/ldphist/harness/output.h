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

// CSV and JSON emission for rate studies and verification reports. Reals are
// written with 17 significant digits so that files round-trip exactly.

#ifndef LDPHIST_HARNESS_OUTPUT_H_
#define LDPHIST_HARNESS_OUTPUT_H_

#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "json.hpp"
#include "ldphist/estimator.h"
#include "ldphist/harness/config.h"
#include "ldphist/harness/experiment.h"
#include "ldphist/lowerbound.h"

namespace ldphist::harness {

inline constexpr char kCsvHeader[] =
    "experiment_id,d,alpha,n,h,r,estimator,replication,l1_error,total_mass,"
    "seed,wall_time_ms,converged";

inline std::string FormatReal(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void WriteRowsCsv(std::ostream& out, const ExperimentConfig& cfg,
                         const std::vector<ReplicationRow>& rows) {
  out << kCsvHeader << "\n";
  char ms[32];
  for (const auto& row : rows) {
    std::snprintf(ms, sizeof(ms), "%.3f", row.wall_time_ms);
    out << cfg.experiment_id << "," << cfg.d << "," << FormatReal(cfg.alpha)
        << "," << row.n << "," << FormatReal(row.h) << ","
        << FormatReal(row.r) << "," << EstimatorName(row.estimator) << ","
        << row.replication << "," << FormatReal(row.l1_error) << ","
        << FormatReal(row.total_mass) << "," << row.seed << "," << ms << ","
        << (row.converged ? 1 : 0) << "\n";
  }
}

inline nlohmann::json SummaryJson(const ExperimentConfig& cfg,
                                  const RateStudyResult& result) {
  nlohmann::json j;
  j["experiment_id"] = cfg.experiment_id;
  j["d"] = cfg.d;
  j["alpha"] = cfg.alpha;
  j["replications"] = cfg.replications;
  nlohmann::json estimators = nlohmann::json::object();
  for (const auto& s : result.summaries) {
    nlohmann::json e;
    nlohmann::json points = nlohmann::json::array();
    for (const auto& p : s.points) {
      points.push_back({{"n", p.n},
                        {"mean", p.mean},
                        {"stderr", p.stderr_mean},
                        {"mean_abs_mass_deviation", p.mean_abs_mass_deviation},
                        {"converged", p.all_converged}});
    }
    e["points"] = std::move(points);
    if (s.fit) {
      e["slope"] = s.fit->slope;
      e["intercept"] = s.fit->intercept;
      e["residual"] = s.fit->residual;
    } else {
      e["slope"] = nullptr;
      e["intercept"] = nullptr;
    }
    estimators[EstimatorName(s.estimator)] = std::move(e);
  }
  j["estimators"] = std::move(estimators);
  nlohmann::json warnings = nlohmann::json::array();
  for (const auto& w : result.warnings) {
    warnings.push_back({{"row", w.row}, {"condition", w.condition}});
  }
  j["warnings"] = std::move(warnings);
  j["notes"] = result.notes;
  return j;
}

// "<output_path without .csv>.summary.json".
inline std::string SummaryPath(const std::string& csv_path) {
  std::string base = csv_path;
  if (base.size() >= 4 && base.compare(base.size() - 4, 4, ".csv") == 0) {
    base.resize(base.size() - 4);
  }
  return base + ".summary.json";
}

inline absl::Status WriteRateStudy(const ExperimentConfig& cfg,
                                   const RateStudyResult& result) {
  std::ofstream csv(cfg.output_path);
  if (!csv) {
    return absl::PermissionDeniedError(
        absl::StrCat("cannot write '", cfg.output_path, "'"));
  }
  WriteRowsCsv(csv, cfg, result.rows);
  const std::string summary_path = SummaryPath(cfg.output_path);
  std::ofstream json(summary_path);
  if (!json) {
    return absl::PermissionDeniedError(
        absl::StrCat("cannot write '", summary_path, "'"));
  }
  json << SummaryJson(cfg, result).dump(2) << "\n";
  return absl::OkStatus();
}

// `cell_coords,value` with the coordinates joined by ';'.
inline void WriteHistogramCsv(std::ostream& out, const Histogram& hist) {
  out << "cell_coords,value\n";
  for (std::size_t j = 0; j < hist.cells().count(); ++j) {
    out << absl::StrJoin(hist.cells()[j].coords, ";") << ","
        << FormatReal(hist.values()[j]) << "\n";
  }
}

inline nlohmann::json VerificationJson(const VerificationReport& report) {
  nlohmann::json j;
  j["n"] = report.n;
  j["alpha"] = report.alpha;
  j["d"] = report.d;
  j["L"] = report.lipschitz;
  j["k"] = report.k;
  j["pass"] = report.pass();
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : report.checks) {
    nlohmann::json entry;
    entry["name"] = c.name;
    entry["pass"] = c.pass;
    nlohmann::json values = nlohmann::json::object();
    for (const auto& [key, v] : c.values) values[key] = v;
    entry["values"] = std::move(values);
    if (!c.note.empty()) entry["note"] = c.note;
    checks.push_back(std::move(entry));
  }
  j["checks"] = std::move(checks);
  return j;
}

}  // namespace ldphist::harness

#endif  // LDPHIST_HARNESS_OUTPUT_H_
