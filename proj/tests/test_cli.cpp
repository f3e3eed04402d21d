/* Copyright 2026 The p1echo Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Black-box tests of the p1echo executable.

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

// Runs the CLI with stderr folded into the captured output.
Run run(const std::string& args) {
  const std::string cmd = std::string(P1ECHO_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("p1echo_cli_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST(Cli, ThreadCountDoesNotChangeOutput) {
  const auto dir = scratch("threads");
  const std::string base = "echo --spins 12 --baths 4 --g 3 --tau 0:20us:21 --seed 7 --fit none";
  const auto a = run("--out " + dir.string() + " --name t1 --threads 1 " + base);
  const auto b = run("--out " + dir.string() + " --name t4 --threads 4 " + base);
  ASSERT_EQ(a.code, 0) << a.out;
  ASSERT_EQ(b.code, 0) << b.out;
  const auto s1 = slurp(dir / "t1.csv"), s4 = slurp(dir / "t4.csv");
  EXPECT_FALSE(s1.empty());
  EXPECT_EQ(s1, s4);
  fs::remove_all(dir);
}

TEST(Cli, NegativeFieldIsConfigError) {
  const auto r = run("spectrum --b -5");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("field must be ≥ 0"), std::string::npos) << r.out;
  EXPECT_EQ(run("echo --b -1 --dry-run").code, 2);
}

TEST(Cli, EmptyScanListIsConfigError) {
  const auto r = run("scan --b , --dry-run");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("empty"), std::string::npos) << r.out;
}

TEST(Cli, BadSequenceReportsPosition) {
  const auto r = run("echo --sequence 'pi(z)' --dry-run");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("unknown axis 'z' at 1:4"), std::string::npos) << r.out;
}

TEST(Cli, ParseCheckFile) {
  const auto r = run(std::string("parse --check ") + P1ECHO_TEST_DATA + "/hahn.seq --tau 2");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("pi/2(x) - tau - pi(x) - tau - pi/2(-x)"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("total 4 us"), std::string::npos) << r.out;
}

TEST(Cli, DryRunPrintsConstants) {
  const auto r = run("--dry-run echo --b 72");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j.contains("constants"));
  EXPECT_TRUE(j.contains("resolved"));
  EXPECT_TRUE(j.contains("schema_version"));
}

TEST(Cli, StatsMatchClosedForms) {
  const auto r = run("--format json stats --ppm 0.2");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["mean_kth_distance_nm"].get<double>(), 16.9, 0.2);
  EXPECT_NEAR(j["mean_dipolar_coupling_kHz"].get<double>(), 5.4, 0.3);
  EXPECT_DOUBLE_EQ(j["concentration_from_td_ppm"].get<double>(), 0.2);
}

TEST(Cli, SpectrumCsvHasAllOrientations) {
  const auto r = run("spectrum --b 72");
  ASSERT_EQ(r.code, 0) << r.out;
  for (const char* l : {"on-axis", "off-axis-1", "off-axis-2", "off-axis-3"})
    EXPECT_NE(r.out.find(l), std::string::npos) << l;
}
