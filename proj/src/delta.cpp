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

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "fairci/error.hpp"
#include "fairci/normal.hpp"

namespace fairci {
namespace {

constexpr double kQuadraticFormTolerance = 1e-10;
constexpr double kSymmetryTolerance = 1e-12;

void CheckAlpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::kInvalidAlpha,
                "alpha must lie in (0, 1), got " + std::to_string(alpha));
  }
}

void CheckDenominator(const MomentVector& m) {
  if (m[1] * m[2] == 0.0) {
    std::ostringstream msg;
    msg << "ratio denominator is zero (m2=" << m[1] << ", m3=" << m[2]
        << "): an empty group or an empty positive-outcome cell";
    throw Error(ErrorCode::kDegenerateDenominator, msg.str());
  }
}

}  // namespace

MomentVector MomentVector::Checked(double m1, double m2, double m3, double m4) {
  MomentVector v{{m1, m2, m3, m4}};
  for (double x : v.m) {
    if (!(x >= 0.0 && x <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "moment component outside [0, 1]: " + std::to_string(x));
    }
  }
  return v;
}

CovarianceMatrix::CovarianceMatrix(const Rows& rows) {
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (std::fabs(rows[i][j] - rows[j][i]) > kSymmetryTolerance) {
        throw Error(ErrorCode::kInvalidArgument,
                    "covariance matrix is not symmetric");
      }
    }
  }
  for (std::size_t i = 0; i < 4; ++i) {
    a_[i][i] = rows[i][i];
    for (std::size_t j = 0; j < i; ++j) {
      a_[i][j] = a_[j][i] = 0.5 * (rows[i][j] + rows[j][i]);
    }
  }
}

CovarianceMatrix CovarianceMatrix::FromLowerTriangle(
    const std::array<double, 10>& lower) {
  Rows rows{};
  std::size_t k = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      rows[i][j] = rows[j][i] = lower[k++];
    }
  }
  return CovarianceMatrix(rows);
}

std::array<double, 4> CovarianceMatrix::Eigenvalues() const {
  Rows a = a_;
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = i + 1; j < 4; ++j) off += a[i][j] * a[i][j];
    if (off < 1e-300) break;
    for (std::size_t p = 0; p < 4; ++p) {
      for (std::size_t q = p + 1; q < 4; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = std::copysign(1.0, theta) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < 4; ++k) {
          const double akp = a[k][p];
          const double akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < 4; ++k) {
          const double apk = a[p][k];
          const double aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::array<double, 4> eig{a[0][0], a[1][1], a[2][2], a[3][3]};
  std::sort(eig.begin(), eig.end());
  return eig;
}

double CovarianceMatrix::MaxAbsDifference(const CovarianceMatrix& other) const {
  double worst = 0.0;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      worst = std::max(worst, std::fabs(a_[i][j] - other.a_[i][j]));
  return worst;
}

double RatioPhi(const MomentVector& m) {
  CheckDenominator(m);
  return m[0] * m[3] / (m[1] * m[2]);
}

GradientVector RatioGradient(const MomentVector& m) {
  CheckDenominator(m);
  const double den = m[1] * m[2];
  return GradientVector{{m[3] / den, -m[0] * m[3] / (m[1] * den),
                         -m[0] * m[3] / (den * m[2]), m[0] / den}};
}

double SandwichVariance(const GradientVector& g, const CovarianceMatrix& cov) {
  double q = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < 4; ++j) row += cov(i, j) * g[j];
    q += g[i] * row;
  }
  if (q < 0.0) {
    if (q < -kQuadraticFormTolerance) {
      throw Error(ErrorCode::kNegativeQuadraticForm,
                  "g'Σg = " + std::to_string(q) +
                      " is negative beyond rounding; covariance input invalid");
    }
    q = 0.0;
  }
  return q;
}

RatioCI CltInterval(double point, double sigma, std::uint64_t n, double alpha) {
  CheckAlpha(alpha);
  if (!(sigma >= 0.0) || n == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "interval needs sigma >= 0 and n >= 1");
  }
  const double half =
      sigma / std::sqrt(static_cast<double>(n)) * NormalQuantile(1.0 - alpha / 2);
  return RatioCI{point, sigma, n, alpha, point - half, point + half};
}

TestResult OneSidedTest(double point, double sigma, std::uint64_t n,
                        double beta, double alpha) {
  CheckAlpha(alpha);
  if (sigma == 0.0) {
    throw Error(ErrorCode::kZeroSigma,
                "test statistic undefined for a zero standard deviation");
  }
  if (!(sigma > 0.0) || n == 0 || !(beta > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "test needs sigma > 0, n >= 1 and beta > 0");
  }
  TestResult r;
  r.beta = beta;
  r.alpha = alpha;
  r.statistic = std::sqrt(static_cast<double>(n)) / sigma * (point - beta);
  r.p_value = NormalSurvival(r.statistic);
  r.reject_h0 = r.statistic >= NormalQuantile(1.0 - alpha);
  return r;
}

}  // namespace fairci
