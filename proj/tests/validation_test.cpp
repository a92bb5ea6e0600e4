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

#include "fairci/validation.hpp"

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>

#include "fairci/error.hpp"
#include "fairci/metrics.hpp"

namespace fairci {
namespace {

using ::testing::DoubleNear;
using ::testing::ElementsAre;
using ::testing::Pair;

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kInvalidArgument;
}

const SimulationOptions kOneThread{1};

TEST(CellDistributionTest, Validation) {
  EXPECT_EQ(CodeOf([] { CellDistribution::FromCells({0.5, 0.6, 0, 0, 0, 0, 0, 0}); }),
            ErrorCode::kInvalidDistribution);
  EXPECT_EQ(CodeOf([] { CellDistribution::FromCells({1.2, -0.2, 0, 0, 0, 0, 0, 0}); }),
            ErrorCode::kInvalidDistribution);
  EXPECT_NO_THROW(CellDistribution::FromCells({0.125, 0.125, 0.125, 0.125, 0.125,
                                               0.125, 0.125, 0.125}));
}

TEST(ExactMomentsTest, UniformPredictionGroupCells) {
  const auto dist = CellDistribution::FromPredictionGroupCells({{{0.25, 0.25}, {0.25, 0.25}}});
  const ExactMoments em = ComputeExactMoments(dist, MetricId::kDia);
  EXPECT_THAT(em.mean.m, ElementsAre(0.25, 0.25, 0.5, 0.5));
  EXPECT_DOUBLE_EQ(em.covariance(0, 0), 0.1875);
  EXPECT_DOUBLE_EQ(em.covariance(1, 1), 0.1875);
  EXPECT_DOUBLE_EQ(em.covariance(2, 2), 0.25);
  EXPECT_DOUBLE_EQ(em.covariance(3, 3), 0.25);
}

TEST(ExactMomentsTest, PointMassHasZeroCovariance) {
  std::array<double, 8> p{};
  p[CellCode(1, 1, 0)] = 1.0;
  const ExactMoments em = ComputeExactMoments(CellDistribution::FromCells(p), MetricId::kCa1);
  EXPECT_EQ(em.covariance.MaxAbsDifference(CovarianceMatrix::Zero()), 0.0);
}

TEST(ExactMomentsTest, CovarianceIsSymmetricPsd) {
  auto rng = Xoshiro256::ForStream(31, 0);
  for (int t = 0; t < 200; ++t) {
    const CellDistribution dist = RandomCellDistribution(rng);
    for (MetricId id : kAllMetrics) {
      const ExactMoments em = ComputeExactMoments(dist, id);
      for (double ev : em.covariance.Eigenvalues()) EXPECT_GE(ev, -1e-12);
      for (int i = 0; i < 4; ++i) {
        EXPECT_LE(em.covariance(i, i), 0.25 + 1e-15);
        for (int j = 0; j < 4; ++j) EXPECT_EQ(em.covariance(i, j), em.covariance(j, i));
      }
    }
  }
}

TEST(ExactMomentsTest, ClosedFormsMatchOracle) {
  auto rng = Xoshiro256::ForStream(32, 0);
  for (int t = 0; t < 200; ++t) {
    const CellDistribution dist = RandomCellDistribution(rng);
    for (MetricId id : kAllMetrics) {
      const ExactMoments em = ComputeExactMoments(dist, id);
      EXPECT_LE(ClosedFormCovariance(id, em.mean).MaxAbsDifference(em.covariance), 1e-12);
    }
  }
}

// Sample covariance of 10^6 draws against the oracle, within three standard
// errors per entry. The standard error of the (j, k) sample covariance is
// sqrt((E[(Zj-mj)^2 (Zk-mk)^2] - cov_jk^2) / n), computed exactly over atoms.
TEST(ExactMomentsTest, MatchesLargeSimulation) {
  auto rng = Xoshiro256::ForStream(33, 0);
  const CellDistribution dist = RandomCellDistribution(rng);
  constexpr std::uint64_t kN = 1000000;
  for (MetricId id : {MetricId::kDia, MetricId::kCa1, MetricId::kCu0}) {
    const ExactMoments em = ComputeExactMoments(dist, id);
    auto sample_rng = Xoshiro256::ForStream(34, static_cast<std::uint64_t>(id));
    const auto records = ExpandCells(SampleCells(dist, kN, sample_rng));
    const ExactMoments emp = EmpiricalIndicatorMoments(records, id);
    const MetricEvents ev = EventsFor(id);
    for (int j = 0; j < 4; ++j) {
      for (int k = 0; k < 4; ++k) {
        double fourth = 0.0;
        for (int g = 0; g < 2; ++g)
          for (int y = 0; y < 2; ++y)
            for (int s = 0; s < 2; ++s) {
              const EventSpec& ej = j < 2 ? ev.numerator : ev.base;
              const EventSpec& ek = k < 2 ? ev.numerator : ev.base;
              const double zj = ej.Contains(g, y) && s == (j % 2);
              const double zk = ek.Contains(g, y) && s == (k % 2);
              fourth += dist[CellCode(g, y, s)] * std::pow(zj - em.mean[j], 2) *
                        std::pow(zk - em.mean[k], 2);
            }
        const double c = em.covariance(j, k);
        const double se = std::sqrt(std::max(fourth - c * c, 0.0) / kN);
        EXPECT_LE(std::fabs(emp.covariance(j, k) - c), 3 * se + 1e-12)
            << MetricName(id) << " (" << j << "," << k << ")";
      }
    }
  }
}

TEST(TrueMetricValueTest, DegenerateDistribution) {
  std::array<double, 8> p{};
  p[CellCode(1, 1, 0)] = 0.5;
  p[CellCode(0, 1, 0)] = 0.5;
  EXPECT_EQ(CodeOf([&] { TrueMetricValue(CellDistribution::FromCells(p), MetricId::kDia); }),
            ErrorCode::kDegenerateDistribution);
}

TEST(ScenarioDistributionTest, HitsTarget) {
  for (MetricId id : kAllMetrics) {
    for (double target : {0.7, 0.8, 1.0, 1.1}) {
      EXPECT_NEAR(TrueMetricValue(ScenarioDistribution(id, target), id), target, 1e-12)
          << MetricName(id);
    }
  }
  EXPECT_EQ(CodeOf([] { ScenarioDistribution(MetricId::kDia, 3.0); }),
            ErrorCode::kInvalidArgument);
}

TEST(SampleCellsTest, SumsToNAndRespectsZeroCells) {
  std::array<double, 8> p{};
  p[0] = 0.5;
  p[5] = 0.5;
  auto rng = Xoshiro256::ForStream(35, 0);
  const CellCounts c = SampleCells(CellDistribution::FromCells(p), 10001, rng);
  EXPECT_EQ(c.n(), 10001u);
  EXPECT_EQ(c.cells()[0] + c.cells()[5], 10001u);
}

TEST(CoverageSimulationTest, NominalCoverageAtBalancedDesign) {
  const CoverageReport r =
      CoverageSimulation(ScenarioDistribution(MetricId::kDia, 1.0), MetricId::kDia,
                         5000, 2000, 0.05, 42);
  EXPECT_GE(r.empirical, 0.935);
  EXPECT_LE(r.empirical, 0.965);
  EXPECT_EQ(r.discarded, 0u);
  EXPECT_EQ(r.replicates, 2000u);
}

TEST(CoverageSimulationTest, HalfCoverageAtAlphaHalf) {
  const CoverageReport r =
      CoverageSimulation(ScenarioDistribution(MetricId::kDia, 1.0), MetricId::kDia,
                         5000, 2000, 0.5, 43);
  EXPECT_NEAR(r.empirical, 0.5, 0.04);
}

TEST(CoverageSimulationTest, DeterministicAndThreadIndependent) {
  const auto dist = ScenarioDistribution(MetricId::kCu1, 0.9);
  const CoverageReport a = CoverageSimulation(dist, MetricId::kCu1, 800, 100, 0.05, 9, kOneThread);
  const CoverageReport b = CoverageSimulation(dist, MetricId::kCu1, 800, 100, 0.05, 9, kOneThread);
  const CoverageReport c = CoverageSimulation(dist, MetricId::kCu1, 800, 100, 0.05, 9, {4});
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
  EXPECT_NE(a, CoverageSimulation(dist, MetricId::kCu1, 800, 100, 0.05, 10));
}

TEST(CoverageSimulationTest, SmallSamplesDiscardDegenerateReplicates) {
  std::array<double, 8> p{};
  p[CellCode(1, 0, 0)] = 0.25;
  p[CellCode(0, 0, 0)] = 0.25;
  p[CellCode(1, 0, 1)] = 0.01;
  p[CellCode(0, 0, 1)] = 0.49;
  const CoverageReport r = CoverageSimulation(CellDistribution::FromCells(p),
                                              MetricId::kDia, 20, 200, 0.05, 1);
  EXPECT_EQ(r.replicates + r.discarded, 200u);
  EXPECT_GT(r.discarded, 0u) << "an empty favored-group numerator must occur at n=20";
}

TEST(CoverageSimulationTest, RejectsTooFewReplicates) {
  EXPECT_EQ(CodeOf([] {
              CoverageSimulation(ScenarioDistribution(MetricId::kDia, 1), MetricId::kDia,
                                 100, 99, 0.05, 1);
            }),
            ErrorCode::kInvalidArgument);
}

TEST(TestSizeSimulationTest, SizeNearAlphaAtBoundary) {
  const SizeReport r = TestSizeSimulation(ScenarioDistribution(MetricId::kDia, 0.8),
                                          MetricId::kDia, 5000, 2000, 0.8, 0.05, 42);
  EXPECT_NEAR(r.true_value, 0.8, 1e-12);
  EXPECT_GE(r.rejection_rate, 0.035);
  EXPECT_LE(r.rejection_rate, 0.065);
}

TEST(StandardizedStatisticsTest, CloseToStandardNormal) {
  const auto stats = StandardizedStatistics(ScenarioDistribution(MetricId::kDia, 1.0),
                                            MetricId::kDia, 5000, 2000, 44);
  ASSERT_EQ(stats.size(), 2000u);
  EXPECT_LT(KsDistanceToNormal(stats), 0.05);
}

TEST(KsDistanceTest, KnownSamples) {
  EXPECT_NEAR(KsDistanceToNormal({0.0}), 0.5, 1e-15);
  EXPECT_GT(KsDistanceToNormal(std::vector<double>(100, 3.0)), 0.99);
}

TEST(ConsistencyTest, EstimatorConvergesAtLargeN) {
  const auto dist = ScenarioDistribution(MetricId::kDia, 0.7);
  const auto stats = StandardizedStatistics(dist, MetricId::kDia, 100000, 200, 45);
  const auto within =
      std::count_if(stats.begin(), stats.end(), [](double z) { return std::fabs(z) < 5; });
  EXPECT_GE(within, 198);
}

TEST(BootstrapTest, AgreesWithClosedFormSigma) {
  const auto dist = ScenarioDistribution(MetricId::kDia, 1.0);
  auto rng = Xoshiro256::ForStream(46, 0);
  const auto records = ExpandCells(SampleCells(dist, 10000, rng));
  const double closed = EstimateDi(CountCells(records)).sigma;
  const double boot = BootstrapSigma(records, MetricId::kDia, 500, 47);
  EXPECT_NEAR(boot / closed, 1.0, 0.15);
  EXPECT_EQ(boot, BootstrapSigma(records, MetricId::kDia, 500, 47));
}

TEST(BootstrapTest, MedianGapSmallOverTrials) {
  const auto dist = ScenarioDistribution(MetricId::kCa1, 0.9);
  std::vector<double> gaps;
  for (std::uint64_t t = 0; t < 20; ++t) {
    auto rng = Xoshiro256::ForStream(48, t);
    const auto records = ExpandCells(SampleCells(dist, 10000, rng));
    const double closed = EstimateCa(CountCells(records), 1).sigma;
    const double boot = BootstrapSigma(records, MetricId::kCa1, 300, 100 + t);
    gaps.push_back(std::fabs(boot - closed) / closed);
  }
  std::nth_element(gaps.begin(), gaps.begin() + 10, gaps.end());
  EXPECT_LE(gaps[10], 0.10);
}

TEST(BootstrapTest, ThreadIndependent) {
  auto rng = Xoshiro256::ForStream(49, 0);
  const auto records = ExpandCells(SampleCells(ScenarioDistribution(MetricId::kCu0, 1), 3000, rng));
  const auto a = BootstrapSigmaDetailed(records, MetricId::kCu0, 256, 5, kOneThread);
  const auto b = BootstrapSigmaDetailed(records, MetricId::kCu0, 256, 5, {3});
  EXPECT_EQ(a.sigma, b.sigma);
  EXPECT_EQ(a.discarded, b.discarded);
}

TEST(BootstrapTest, TooManyDegenerateResamples) {
  // One favored-group positive: about 37% of resamples lose it.
  std::vector<AuditRecord> records;
  for (int i = 0; i < 50; ++i) records.push_back({std::uint8_t(i % 2), std::nullopt, 0});
  records.push_back({1, std::nullopt, 1});
  for (int i = 0; i < 49; ++i) records.push_back({0, std::nullopt, 1});
  EXPECT_EQ(CodeOf([&] { BootstrapSigma(records, MetricId::kDia, 300, 1); }),
            ErrorCode::kTooManyDegenerateResamples);
  EXPECT_EQ(CodeOf([&] { BootstrapSigma(records, MetricId::kDia, 100, 1); }),
            ErrorCode::kInvalidArgument);
}

TEST(AdjudicateMatrixTest, CorrectedFormMatchesOraclePrintedDoesNot) {
  for (MetricId id : {MetricId::kCa1, MetricId::kCa0, MetricId::kCu1, MetricId::kCu0}) {
    const AdjudicationReport r = AdjudicateMatrix(id, 100, 7);
    EXPECT_LE(r.max_deviation_corrected, 1e-12) << MetricName(id);
    EXPECT_GT(r.max_deviation_printed, 1e-3) << MetricName(id);
    EXPECT_THAT(r.printed_deviating_entries, ElementsAre(Pair(2, 1), Pair(4, 1)))
        << MetricName(id);
  }
}

TEST(AdjudicateMatrixTest, ZeroNumeratorCollapsesFirstDiscrepancy) {
  // p0 = P(g=1, Y=1, S=0) = 0.
  std::array<double, 8> p{0.1, 0.15, 0.1, 0.15, 0.1, 0.15, 0.0, 0.25};
  const auto dist = CellDistribution::FromCells(p);
  const ExactMoments em = ComputeExactMoments(dist, MetricId::kCa1);
  ASSERT_EQ(em.mean[0], 0.0);
  const CovarianceMatrix printed = PrintedConditionalCovariance(em.mean);
  const CovarianceMatrix corrected = NestedEventCovariance(em.mean);
  EXPECT_EQ(printed(1, 0), 0.0);
  EXPECT_EQ(corrected(1, 0), 0.0);
  EXPECT_EQ(printed(3, 0), 0.0);
  EXPECT_THAT(corrected.MaxAbsDifference(em.covariance), DoubleNear(0.0, 1e-15));
}

TEST(AdjudicateMatrixTest, RejectsDisparateImpactMetrics) {
  EXPECT_EQ(CodeOf([] { AdjudicateMatrix(MetricId::kDia, 10, 1); }),
            ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace fairci
