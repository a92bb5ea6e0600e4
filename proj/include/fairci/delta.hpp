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

#ifndef FAIRCI_DELTA_HPP_
#define FAIRCI_DELTA_HPP_

// Delta-method engine for the ratio functional
//
//   phi(x1, x2, x3, x4) = x1 * x4 / (x2 * x3)
//
// evaluated at the mean of a 4-dimensional indicator vector. Every metric in
// this library is phi of such a mean: for disparate impact the coordinates
// are (P(g=1,S=0), P(g=1,S=1), P(S=0), P(S=1)), so phi is the ratio of the two
// group-conditional positive rates.

#include <array>
#include <cstdint>

namespace fairci {

// Mean of the indicator vector. Components are joint-event probabilities;
// they need not sum to one.
struct MomentVector {
  std::array<double, 4> m{};

  double operator[](std::size_t i) const { return m[i]; }

  // Throws Error(kInvalidArgument) unless every component is in [0, 1].
  static MomentVector Checked(double m1, double m2, double m3, double m4);
};

struct GradientVector {
  std::array<double, 4> g{};

  double operator[](std::size_t i) const { return g[i]; }
};

// Symmetric 4x4 covariance matrix of an indicator vector.
class CovarianceMatrix {
 public:
  using Rows = std::array<std::array<double, 4>, 4>;

  CovarianceMatrix() = default;

  // Takes a full matrix. Throws Error(kInvalidArgument) when it is not
  // symmetric to 1e-12 (absolute); the stored copy is exactly symmetrized.
  explicit CovarianceMatrix(const Rows& rows);

  // Builds from the lower triangle, row-major: (0,0), (1,0), (1,1), (2,0)...
  static CovarianceMatrix FromLowerTriangle(const std::array<double, 10>& lower);

  static CovarianceMatrix Zero() { return CovarianceMatrix(); }

  double operator()(std::size_t i, std::size_t j) const { return a_[i][j]; }
  const Rows& rows() const { return a_; }

  // Eigenvalues by cyclic Jacobi rotation, ascending.
  std::array<double, 4> Eigenvalues() const;

  // Largest entrywise absolute difference.
  double MaxAbsDifference(const CovarianceMatrix& other) const;

 private:
  Rows a_{};
};

struct RatioCI {
  double point = 0.0;
  double sigma = 0.0;
  std::uint64_t n = 0;
  double alpha = 0.05;
  double lower = 0.0;
  double upper = 0.0;
};

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool reject_h0 = false;
  double beta = 0.8;
  double alpha = 0.05;
};

// m1 * m4 / (m2 * m3). Throws Error(kDegenerateDenominator) when m2 * m3 == 0.
double RatioPhi(const MomentVector& m);

// Analytic gradient of RatioPhi. Same precondition.
GradientVector RatioGradient(const MomentVector& m);

// g' * cov * g. Values in [-1e-10, 0) are rounding noise and clamp to zero;
// anything lower throws Error(kNegativeQuadraticForm).
double SandwichVariance(const GradientVector& g, const CovarianceMatrix& cov);

// point -/+ (sigma / sqrt(n)) * z(1 - alpha/2).
RatioCI CltInterval(double point, double sigma, std::uint64_t n, double alpha);

// One-sided test of H0: ratio <= beta against H1: ratio > beta. Rejects when
// (sqrt(n)/sigma)(point - beta) >= z(1 - alpha); p = 1 - Phi(statistic).
TestResult OneSidedTest(double point, double sigma, std::uint64_t n,
                        double beta, double alpha);

}  // namespace fairci

#endif  // FAIRCI_DELTA_HPP_
