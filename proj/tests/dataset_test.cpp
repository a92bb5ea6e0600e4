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

// Checks against the pinned public extracts. The fetch_preset_* fixtures
// populate the cache first, so these run offline.

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <sstream>
#include <vector>

#include "cli.hpp"
#include "fairci/ingest.hpp"
#include "fairci/metrics.hpp"
#include "fairci/report.hpp"

namespace fairci {
namespace {

// Reference values from an independent Python computation over the same
// files: plain proportions and the two-independent-binomial variance of a
// ratio of proportions.
struct Reference {
  double point, lower, upper;
};
constexpr Reference kAdultSex{0.36222035623624405, 0.3408709946459312, 0.3835697178265569};
constexpr Reference kAdultRace{0.5998581847236637, 0.5564055134364391, 0.6433108560108883};
constexpr Reference kGerman{0.7765820195726738, 0.6835382682965391, 0.8696257708488085};
constexpr Reference kCompasDi{0.7653364784201855, 0.7207581418335521, 0.8099148150068188};
constexpr Reference kCompasCa1{0.5694460321694251, 0.5083677776279683, 0.630524286710882};
constexpr Reference kCompasCa0{1.2098967805749656, 1.1722274149198035, 1.2475661462301277};

AuditTable Load(const std::string& id) {
  const Registry r = Registry::LoadDefault();
  return FetchDataset(r.Find(id), {DefaultCacheDir(), true});
}

void ExpectMatches(const MetricEstimate& e, const Reference& ref) {
  EXPECT_NEAR(e.point, ref.point, 1e-10);
  EXPECT_NEAR(e.ci.lower, ref.lower, 1e-10);
  EXPECT_NEAR(e.ci.upper, ref.upper, 1e-10);
}

TEST(AdultTest, SexDisparateImpactOnTrueLabels) {
  const AuditTable t = Load("adult");
  EXPECT_EQ(t.records.size(), 30162u);
  EXPECT_EQ(t.records.size() + t.n_dropped, t.raw_row_count);
  const MetricEstimate e = EstimateDiTrue(CountCells(t.records));
  ExpectMatches(e, kAdultSex);
  EXPECT_NEAR(e.point, 0.36, 0.03);
  EXPECT_NEAR(e.ci.lower, 0.34, 0.03);
  EXPECT_NEAR(e.ci.upper, 0.39, 0.03);
  const TestResult test = TestDisparateImpact(e, 0.8, 0.05);
  EXPECT_FALSE(test.reject_h0);
  EXPECT_LT(e.ci.upper, 0.8);
}

TEST(AdultTest, RaceDisparateImpactOnTrueLabels) {
  const Registry r = Registry::LoadDefault();
  SchemaConfig schema = r.Find("adult").schema;
  schema.group_column = "race";
  schema.protected_group_values = {"Black", "Asian-Pac-Islander", "Amer-Indian-Eskimo", "Other"};
  schema.favored_group_values = {"White"};
  const auto path = FetchPresetFile(r.Find("adult"), {DefaultCacheDir(), true});
  const AuditTable t = ApplySchema(ParseTableFile(path, schema.format), schema);
  const MetricEstimate e = EstimateDiTrue(CountCells(t.records));
  ExpectMatches(e, kAdultRace);
  EXPECT_NEAR(e.point, 0.60, 0.03);
}

TEST(GermanTest, IntervalContainsFourFifths) {
  const AuditTable t = Load("german");
  EXPECT_EQ(t.records.size(), 1000u);
  const MetricEstimate e = EstimateDiTrue(CountCells(t.records));
  ExpectMatches(e, kGerman);
  EXPECT_LE(e.ci.lower, 0.8);
  EXPECT_GE(e.ci.upper, 0.8);
  EXPECT_FALSE(TestDisparateImpact(e, 0.8, 0.05).reject_h0);
}

TEST(GermanTest, CliAuditExample) {
  std::ostringstream out, err;
  const std::vector<const char*> argv = {"fairci", "audit", "--preset", "german", "--metric",
                                         "di-true", "--beta", "0.8", "--alpha", "0.05",
                                         "--offline"};
  ASSERT_EQ(RunCli(static_cast<int>(argv.size()), argv.data(), out, err), 0) << err.str();
  EXPECT_THAT(out.str(), ::testing::ContainsRegex("DI_true +0.7766  95% CI \\[0.6835, 0.8696\\]"));
  EXPECT_THAT(out.str(), ::testing::HasSubstr("fail to reject"));
}

TEST(CompasTest, RatiosOnPinnedExtract) {
  const AuditTable t = Load("compas");
  EXPECT_EQ(t.records.size(), 6150u);
  const CellCounts cells = CountCells(t.records);
  ExpectMatches(EstimateDiTrue(cells), kCompasDi);
  ExpectMatches(EstimateCa(cells, 1), kCompasCa1);
  ExpectMatches(EstimateCa(cells, 0), kCompasCa0);
}

}  // namespace
}  // namespace fairci
