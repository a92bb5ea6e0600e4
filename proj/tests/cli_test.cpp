//
// Copyright 2026 The fairci Authors
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
//

#include "cli.hpp"

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "fairci/report.hpp"

namespace fairci {
namespace {

namespace fs = std::filesystem;
using ::testing::HasSubstr;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun Cli(std::vector<std::string> args) {
  args.insert(args.begin(), "fairci");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Drops the "timestamp" line so reports from separate runs can be compared.
std::string WithoutTimestamp(const std::string& json) {
  std::istringstream in(json);
  std::string line, kept;
  while (std::getline(in, line)) {
    if (line.find("\"timestamp\"") == std::string::npos) kept += line + "\n";
  }
  return kept;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::path(::testing::TempDir()) / (std::string("fairci_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(CliTest, ParityGapIsZeroOnEqualRates) {
  const CliRun r = Cli({"audit", "--data", FAIRCI_TEST_DATA "/tiny.csv", "--schema",
                     FAIRCI_TEST_DATA "/tiny_schema.json", "--metric", "parity-gap", "--out",
                     Path("r.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const AuditReport rep = ParseAuditReportJson(Slurp(Path("r.json")));
  ASSERT_TRUE(rep.parity_gap.has_value());
  EXPECT_EQ(*rep.parity_gap, 0.0);
  EXPECT_EQ(rep.dataset.n, 20u);
}

TEST_F(CliTest, AuditAllPrintsIntervalsAndCounts) {
  const CliRun r = Cli({"audit", "--data", FAIRCI_TEST_DATA "/tiny.csv", "--out", Path("r.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_THAT(r.out, HasSubstr("95% CI ["));
  const AuditReport rep = ParseAuditReportJson(Slurp(Path("r.json")));
  EXPECT_EQ(rep.estimates.size(), 6u);
  EXPECT_EQ(rep.dataset.cells.size(), 8u);
  EXPECT_EQ(rep.tests.size(), 6u);
  EXPECT_EQ(rep.beta, 0.8);
  EXPECT_EQ(rep.alpha, 0.05);
}

TEST_F(CliTest, PredictionOnlyAuditWarnsAboutLabelMetrics) {
  std::ofstream(Path("p.csv")) << "prediction,group\n1,0\n0,0\n1,1\n0,1\n1,1\n";
  const CliRun r = Cli({"audit", "--data", Path("p.csv"), "--out", Path("r.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const AuditReport rep = ParseAuditReportJson(Slurp(Path("r.json")));
  ASSERT_EQ(rep.estimates.size(), 1u);
  EXPECT_EQ(rep.estimates[0].estimate.metric, MetricId::kDia);
  EXPECT_THAT(rep.warnings.front(), HasSubstr("LABELS_MISSING"));
}

TEST_F(CliTest, EmptyInputExitsTwoNamingTheError) {
  const CliRun r = Cli({"audit", "--data", FAIRCI_TEST_DATA "/empty.csv", "--schema",
                     FAIRCI_TEST_DATA "/tiny_schema.json"});
  EXPECT_EQ(r.code, 2);
  EXPECT_THAT(r.err, HasSubstr("EmptyInput"));
  EXPECT_EQ(Cli({"audit", "--data", FAIRCI_TEST_DATA "/header_only.csv"}).code, 2);
}

TEST_F(CliTest, ExitCodeContract) {
  EXPECT_EQ(Cli({"audit", "--bogus"}).code, 1);
  EXPECT_EQ(Cli({"audit", "--data", FAIRCI_TEST_DATA "/tiny.csv", "--metric", "xyz"}).code, 1);
  EXPECT_EQ(Cli({"audit", "--data", FAIRCI_TEST_DATA "/tiny.csv", "--alpha", "1.5"}).code, 1);
  EXPECT_EQ(Cli({"audit", "--data", FAIRCI_TEST_DATA "/one_group.csv", "--metric", "di"}).code, 2);
  EXPECT_EQ(Cli({"audit"}).code, 1);
  EXPECT_EQ(Cli({"--help"}).code, 0);
}

TEST_F(CliTest, UnknownPresetIsUsageError) {
  const CliRun r = Cli({"audit", "--preset", "nope", "--offline"});
  EXPECT_EQ(r.code, 1);
  EXPECT_THAT(r.err, HasSubstr("UnknownPreset"));
}

TEST_F(CliTest, PlotDataRowCounts) {
  ASSERT_EQ(Cli({"audit", "--data", FAIRCI_TEST_DATA "/tiny.csv", "--metric", "di", "--out",
                 Path("one.json")})
                .code,
            0);
  ASSERT_EQ(Cli({"audit", "--data", FAIRCI_TEST_DATA "/tiny.csv", "--metric", "all", "--out",
                 Path("six.json")})
                .code,
            0);
  const CliRun one = Cli({"plotdata", Path("one.json")});
  ASSERT_EQ(one.code, 0) << one.err;
  EXPECT_EQ(std::count(one.out.begin(), one.out.end(), '\n'), 2);
  EXPECT_THAT(one.out, HasSubstr("\nDIA,"));

  ASSERT_EQ(Cli({"plotdata", Path("six.json"), "--out", Path("six.csv")}).code, 0);
  const std::string csv = Slurp(Path("six.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
  EXPECT_LT(csv.find("\nDIA,"), csv.find("\nCU0,"));
}

TEST_F(CliTest, PlotDataMissingOrBadReport) {
  const CliRun r = Cli({"plotdata", Path("missing.json")});
  EXPECT_EQ(r.code, 1);
  EXPECT_THAT(r.err, HasSubstr("UnreadableReport"));
  std::ofstream(Path("bad.json")) << "{\"schema_version\": \"other\"}";
  EXPECT_EQ(Cli({"plotdata", Path("bad.json")}).code, 1);
}

TEST_F(CliTest, ValidateIsDeterministicModuloTimestamp) {
  const std::vector<std::string> base = {"validate", "adjudicate", "--metric", "ca1",
                                         "--trials", "100", "--seed", "7", "--out"};
  auto a = base, b = base;
  a.push_back(Path("a.json"));
  b.push_back(Path("b.json"));
  ASSERT_EQ(Cli(a).code, 0);
  ASSERT_EQ(Cli(b).code, 0);
  const std::string ja = Slurp(Path("a.json")), jb = Slurp(Path("b.json"));
  EXPECT_EQ(WithoutTimestamp(ja), WithoutTimestamp(jb));
  const ValidationReport v = ParseValidationReportJson(ja);
  for (const auto& [name, value] : v.results) {
    if (name == "max_deviation_corrected") {
      EXPECT_LE(value, 1e-12);
    }
  }
}

TEST_F(CliTest, ValidateCoverageSmallRunAndThreads) {
  const std::vector<std::string> base = {"validate", "coverage", "--metric", "cu1", "--n",
                                         "1000", "--reps", "200", "--seed", "3", "--out"};
  auto a = base, b = base;
  a.push_back(Path("a.json"));
  b.push_back(Path("b.json"));
  b.insert(b.end(), {"--threads", "3"});
  ASSERT_EQ(Cli(a).code, 0);
  ASSERT_EQ(Cli(b).code, 0);
  EXPECT_EQ(WithoutTimestamp(Slurp(Path("a.json"))), WithoutTimestamp(Slurp(Path("b.json"))));
  EXPECT_EQ(PlotRowsFromReport(Slurp(Path("a.json"))).size(), 1u);
}

TEST_F(CliTest, ValidateRejectsUnknownKind) {
  EXPECT_EQ(Cli({"validate", "nonsense"}).code, 1);
  EXPECT_EQ(Cli({"validate", "adjudicate", "--metric", "di"}).code, 1);
}

}  // namespace
}  // namespace fairci
