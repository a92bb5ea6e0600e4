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

#include "fairci/delta.hpp"

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "fairci/error.hpp"
#include "fairci/metrics.hpp"
#include "fairci/normal.hpp"
#include "fairci/rng.hpp"

namespace fairci {
namespace {

using ::testing::DoubleNear;
using ::testing::ElementsAre;

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kInvalidArgument;
}

TEST(RatioPhiTest, Examples) {
  EXPECT_DOUBLE_EQ(RatioPhi({{1, 1, 1, 1}}), 1.0);
  EXPECT_DOUBLE_EQ(RatioPhi({{0.25, 0.25, 0.5, 0.5}}), 1.0);
  EXPECT_DOUBLE_EQ(RatioPhi({{0.1, 0.4, 0.5, 0.5}}), 0.25);
}

TEST(RatioPhiTest, ZeroDenominatorIsAnError) {
  EXPECT_EQ(CodeOf([] { RatioPhi({{0.1, 0.0, 0.5, 0.5}}); }),
            ErrorCode::kDegenerateDenominator);
  EXPECT_EQ(CodeOf([] { RatioGradient({{0.1, 0.2, 0.0, 0.5}}); }),
            ErrorCode::kDegenerateDenominator);
}

TEST(RatioGradientTest, Examples) {
  EXPECT_THAT(RatioGradient({{1, 1, 1, 1}}).g, ElementsAre(1, -1, -1, 1));
  EXPECT_THAT(RatioGradient({{0.25, 0.25, 0.5, 0.5}}).g,
              ElementsAre(DoubleNear(4, 1e-15), DoubleNear(-4, 1e-15),
                          DoubleNear(-2, 1e-15), DoubleNear(2, 1e-15)));
  EXPECT_THAT(RatioGradient({{0.1, 0.4, 0.5, 0.5}}).g,
              ElementsAre(DoubleNear(2.5, 1e-15), DoubleNear(-0.625, 1e-15),
                          DoubleNear(-0.5, 1e-15), DoubleNear(0.5, 1e-15)));
}

TEST(RatioGradientTest, MatchesCentralFiniteDifferences) {
  auto rng = Xoshiro256::ForStream(2024, 0);
  for (int t = 0; t < 1000; ++t) {
    MomentVector m{{rng.Uniform(), 0.01 + 0.99 * rng.Uniform(),
                    0.01 + 0.99 * rng.Uniform(), rng.Uniform()}};
    const GradientVector g = RatioGradient(m);
    for (int k = 0; k < 4; ++k) {
      const double h = 1e-6 * std::max(m.m[k], 1e-3);
      MomentVector up = m, down = m;
      up.m[k] += h;
      down.m[k] -= h;
      const double fd = (RatioPhi(up) - RatioPhi(down)) / (2 * h);
      const double scale = std::max(std::fabs(g[k]), 1e-8);
      EXPECT_LE(std::fabs(fd - g[k]) / scale, 1e-6)
          << "point " << t << " coordinate " << k;
    }
  }
}

TEST(SandwichVarianceTest, Examples) {
  CovarianceMatrix::Rows rows{};
  rows[0][0] = 2.0;
  EXPECT_DOUBLE_EQ(SandwichVariance({{1, 0, 0, 0}}, CovarianceMatrix(rows)), 2.0);
  EXPECT_DOUBLE_EQ(SandwichVariance({{1, 1, 1, 1}}, CovarianceMatrix::Zero()), 0.0);
}

// Independent oracle: for a ratio of two group rates a0 / a1 with group
// shares w0, w1, the delta method on log(a0) - log(a1) with independent
// binomial proportions gives R^2 ((1-a0)/(a0 w0) + (1-a1)/(a1 w1)).
double TwoBinomialVariance(double a0, double a1, double w0, double w1) {
  const double ratio = a0 / a1;
  return ratio * ratio * ((1 - a0) / (a0 * w0) + (1 - a1) / (a1 * w1));
}

TEST(SandwichVarianceTest, DisparateImpactAtSymmetricPointIsFour) {
  const MomentVector m{{0.25, 0.25, 0.5, 0.5}};
  const double v =
      SandwichVariance(RatioGradient(m), DisparateImpactCovariance(m));
  EXPECT_NEAR(v, 4.0, 1e-14);
  EXPECT_NEAR(v, TwoBinomialVariance(0.5, 0.5, 0.5, 0.5), 1e-14);
}

TEST(SandwichVarianceTest, DisparateImpactMatchesTwoBinomialFormula) {
  auto rng = Xoshiro256::ForStream(11, 0);
  for (int t = 0; t < 200; ++t) {
    const double w0 = 0.05 + 0.9 * rng.Uniform();
    const double a0 = 0.02 + 0.96 * rng.Uniform();
    const double a1 = 0.02 + 0.96 * rng.Uniform();
    const MomentVector m{{a0 * w0, a1 * (1 - w0), w0, 1 - w0}};
    const double v =
        SandwichVariance(RatioGradient(m), DisparateImpactCovariance(m));
    const double oracle = TwoBinomialVariance(a0, a1, w0, 1 - w0);
    EXPECT_NEAR(v / oracle, 1.0, 1e-11);
  }
}

TEST(SandwichVarianceTest, ScalesQuadratically) {
  auto rng = Xoshiro256::ForStream(12, 0);
  for (int t = 0; t < 100; ++t) {
    const MomentVector m{{0.1 + 0.1 * rng.Uniform(), 0.1 + 0.1 * rng.Uniform(),
                          0.3 + 0.2 * rng.Uniform(), 0.3 + 0.2 * rng.Uniform()}};
    const CovarianceMatrix cov = NestedEventCovariance(m);
    const GradientVector g = RatioGradient(m);
    const double c = 0.1 + 10 * rng.Uniform();
    GradientVector scaled = g;
    for (double& x : scaled.g) x *= c;
    const double base = SandwichVariance(g, cov);
    EXPECT_NEAR(SandwichVariance(scaled, cov) / (c * c * base), 1.0, 1e-12);
  }
}

TEST(SandwichVarianceTest, ClampsRoundingNoiseAndRejectsRealNegatives) {
  CovarianceMatrix::Rows rows{};
  rows[0][0] = -1e-12;
  EXPECT_EQ(SandwichVariance({{1, 0, 0, 0}}, CovarianceMatrix(rows)), 0.0);
  rows[0][0] = -1e-6;
  EXPECT_EQ(CodeOf([&] { SandwichVariance({{1, 0, 0, 0}}, CovarianceMatrix(rows)); }),
            ErrorCode::kNegativeQuadraticForm);
}

TEST(CovarianceMatrixTest, RejectsAsymmetricInput) {
  CovarianceMatrix::Rows rows{};
  rows[1][0] = 0.1;
  EXPECT_EQ(CodeOf([&] { CovarianceMatrix{rows}; }), ErrorCode::kInvalidArgument);
}

TEST(CovarianceMatrixTest, LowerTriangleFillsBothHalves) {
  const auto c = CovarianceMatrix::FromLowerTriangle({1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  EXPECT_EQ(c(1, 0), 2);
  EXPECT_EQ(c(0, 1), 2);
  EXPECT_EQ(c(3, 2), 9);
  EXPECT_EQ(c(2, 3), 9);
  EXPECT_EQ(c(3, 3), 10);
}

TEST(CovarianceMatrixTest, EigenvaluesOfDiagonalMatrix) {
  CovarianceMatrix::Rows rows{};
  rows[0][0] = 0.3;
  rows[1][1] = 0.1;
  rows[2][2] = 0.25;
  EXPECT_THAT(CovarianceMatrix(rows).Eigenvalues(),
              ElementsAre(DoubleNear(0, 1e-15), DoubleNear(0.1, 1e-15),
                          DoubleNear(0.25, 1e-15), DoubleNear(0.3, 1e-15)));
}

TEST(CltIntervalTest, Examples) {
  const RatioCI zero = CltInterval(0.5, 0.0, 100, 0.05);
  EXPECT_EQ(zero.lower, 0.5);
  EXPECT_EQ(zero.upper, 0.5);

  const RatioCI ci = CltInterval(0.5, 2.0, 400, 0.05);
  EXPECT_NEAR(ci.lower, 0.304, 1e-3);
  EXPECT_NEAR(ci.upper, 0.696, 1e-3);
  EXPECT_NEAR(ci.upper - ci.lower, 2 * (2.0 / 20.0) * 1.959963984540054, 1e-12);
}

TEST(CltIntervalTest, WidthAndContainment) {
  auto rng = Xoshiro256::ForStream(13, 0);
  for (int t = 0; t < 200; ++t) {
    const double point = 3 * rng.Uniform();
    const double sigma = 5 * rng.Uniform();
    const std::uint64_t n = 1 + rng.Below(100000);
    const double alpha = 0.001 + 0.5 * rng.Uniform();
    const RatioCI ci = CltInterval(point, sigma, n, alpha);
    EXPECT_LE(ci.lower, point);
    EXPECT_GE(ci.upper, point);
    EXPECT_NEAR(ci.upper - ci.lower,
                2 * sigma / std::sqrt(double(n)) * NormalQuantile(1 - alpha / 2),
                1e-12);
  }
}

TEST(CltIntervalTest, SmallerAlphaGivesWiderNestedInterval) {
  double previous_lower = -1e300, previous_upper = 1e300;
  for (double alpha : {0.001, 0.01, 0.05, 0.1, 0.2, 0.5}) {
    const RatioCI ci = CltInterval(0.8, 1.7, 900, alpha);
    EXPECT_GE(ci.lower, previous_lower);
    EXPECT_LE(ci.upper, previous_upper);
    previous_lower = ci.lower;
    previous_upper = ci.upper;
  }
}

TEST(CltIntervalTest, RejectsBadArguments) {
  EXPECT_EQ(CodeOf([] { CltInterval(1, 1, 10, 0.0); }), ErrorCode::kInvalidAlpha);
  EXPECT_EQ(CodeOf([] { CltInterval(1, 1, 10, 1.0); }), ErrorCode::kInvalidAlpha);
  EXPECT_EQ(CodeOf([] { CltInterval(1, -1, 10, 0.05); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([] { CltInterval(1, 1, 0, 0.05); }), ErrorCode::kInvalidArgument);
}

TEST(OneSidedTestTest, Examples) {
  const TestResult r = OneSidedTest(0.9, 1.0, 100, 0.8, 0.05);
  EXPECT_NEAR(r.statistic, 1.0, 1e-12);
  EXPECT_NEAR(r.p_value, 0.15865525393145705, 1e-12);
  EXPECT_FALSE(r.reject_h0);

  const TestResult boundary = OneSidedTest(0.8, 3.2, 57, 0.8, 0.05);
  EXPECT_EQ(boundary.statistic, 0.0);
  EXPECT_DOUBLE_EQ(boundary.p_value, 0.5);
  for (double alpha : {0.01, 0.1, 0.3, 0.49}) {
    EXPECT_FALSE(OneSidedTest(0.8, 3.2, 57, 0.8, alpha).reject_h0);
  }
}

TEST(OneSidedTestTest, AgreesWithOneSidedLowerBound) {
  auto rng = Xoshiro256::ForStream(14, 0);
  for (int t = 0; t < 2000; ++t) {
    const double point = 2 * rng.Uniform();
    const double sigma = 0.1 + 3 * rng.Uniform();
    const std::uint64_t n = 10 + rng.Below(10000);
    const double beta = 2 * rng.Uniform();
    const double alpha = 0.01 + 0.2 * rng.Uniform();
    const double bound =
        point - sigma / std::sqrt(double(n)) * NormalQuantile(1 - alpha);
    const TestResult r = OneSidedTest(point, sigma, n, beta, alpha);
    if (std::fabs(bound - beta) > 1e-12) {
      EXPECT_EQ(r.reject_h0, beta < bound);
    }
    if (std::fabs(r.p_value - alpha) > 1e-12) {
      EXPECT_EQ(r.reject_h0, r.p_value < alpha);
    }
  }
}

TEST(OneSidedTestTest, RejectsBadArguments) {
  EXPECT_EQ(CodeOf([] { OneSidedTest(1, 0, 10, 0.8, 0.05); }), ErrorCode::kZeroSigma);
  EXPECT_EQ(CodeOf([] { OneSidedTest(1, 1, 10, 0.8, 1.5); }), ErrorCode::kInvalidAlpha);
}

}  // namespace
}  // namespace fairci
