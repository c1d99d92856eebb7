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

// Runs the command-line tool end to end.

#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "gtest/gtest.h"
#include "json.hpp"

namespace {

struct RunResult {
  int exit_code;
  std::string out;
};

RunResult RunCli(const std::string& args) {
  const std::string command =
      std::string(LDPHIST_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(command.c_str(), "r");
  if (pipe == nullptr) return {-1, ""};
  std::string out;
  char buf[4096];
  while (std::fgets(buf, sizeof(buf), pipe) != nullptr) out += buf;
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

TEST(CliTest, ValidateSchedule) {
  auto ok = RunCli("validate-schedule --d 1 --a 0.25 --b 0.1 --mode suc");
  ASSERT_EQ(ok.exit_code, 0) << ok.out;
  EXPECT_TRUE(nlohmann::json::parse(ok.out)["pass"].get<bool>());
  auto bad = RunCli("validate-schedule --d 1 --a 0.6 --b 0 --mode upc");
  EXPECT_EQ(bad.exit_code, 1);
  const auto j = nlohmann::json::parse(bad.out);
  EXPECT_FALSE(j["pass"].get<bool>());
  EXPECT_EQ(j["violations"][0]["row"], "UPC");
  EXPECT_EQ(RunCli("validate-schedule --d 1 --a 0.25 --b 0 --mode nope")
                .exit_code,
            2);
}

TEST(CliTest, LdpCheck) {
  auto r = RunCli("ldp-check --alpha 1 --d 2 --h 0.5 --r 1 --trials 5000 --seed 4");
  ASSERT_EQ(r.exit_code, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j["within_alpha"].get<bool>());
  EXPECT_TRUE(j["reaches_alpha"].get<bool>());
  EXPECT_EQ(RunCli("ldp-check --alpha -1 --d 1 --h 0.5 --r 1 --trials 10 "
                "--seed 1")
                .exit_code,
            2);
}

TEST(CliTest, LowerBoundVerify) {
  auto r = RunCli("lowerbound-verify --n 1024 --alpha 1 --d 1 --L 8");
  ASSERT_EQ(r.exit_code, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["k"], 6);
  EXPECT_TRUE(j["pass"].get<bool>());
}

TEST(CliTest, Estimate) {
  const std::string dir = ::testing::TempDir();
  const std::string input = dir + "/points.csv";
  const std::string output = dir + "/hist.csv";
  {
    std::ofstream out(input);
    out << "x\n";
    for (int i = 0; i < 400; ++i) out << (i + 0.5) / 400.0 << "\n";
  }
  auto r = RunCli("estimate --input " + input + " --h 0.25 --r 1 --out " +
               output + " --no-privacy");
  ASSERT_EQ(r.exit_code, 0);
  const std::string hist = ReadFile(output);
  EXPECT_EQ(hist.rfind("cell_coords,value\n", 0), 0u);
  EXPECT_NE(hist.find("\n0,1\n"), std::string::npos) << hist;

  auto p = RunCli("estimate --input " + input +
               " --alpha 1 --seed 3 --h 0.25 --r 1 --out " + output +
               " --clip-normalize");
  ASSERT_EQ(p.exit_code, 0);
  EXPECT_EQ(RunCli("estimate --input " + dir + "/missing.csv --h 0.25 --r 1 "
                "--out " + output)
                .exit_code,
            2);
}

TEST(CliTest, RateStudy) {
  const std::string dir = ::testing::TempDir();
  const std::string config = dir + "/study.cfg";
  const std::string csv = dir + "/study.csv";
  {
    std::ofstream out(config);
    out << "experiment_id = smoke\nd = 1\nalpha = 1\ndensity = tent\n"
           "c_h = 1\na = 0.25\nc_r = 2\nb = 0\nn_grid = 64,128,256\n"
           "replications = 2\nmaster_seed = 5\n"
           "estimators = private,nonprivate\noutput_path = "
        << csv << "\n";
  }
  auto r = RunCli("rate-study --config " + config + " --workers 2");
  ASSERT_EQ(r.exit_code, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j["estimators"].contains("private"));
  const std::string rows = ReadFile(csv);
  EXPECT_EQ(rows.rfind("experiment_id,d,alpha,n,h,r,estimator,replication,"
                       "l1_error,total_mass,seed,wall_time_ms,converged\n",
                       0),
            0u);
  int lines = 0;
  for (char c : rows) lines += c == '\n';
  EXPECT_EQ(lines, 1 + 2 * 3 * 2);
  EXPECT_FALSE(ReadFile(dir + "/study.summary.json").empty());
  EXPECT_EQ(RunCli("rate-study --config " + dir + "/none.cfg").exit_code, 2);
}

TEST(CliTest, UnknownSubcommandIsInvalidInput) {
  EXPECT_EQ(RunCli("frobnicate").exit_code, 2);
  EXPECT_EQ(RunCli("").exit_code, 2);
}

}  // namespace
