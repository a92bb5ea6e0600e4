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

#ifndef FAIRCI_VALIDATION_HPP_
#define FAIRCI_VALIDATION_HPP_

// Independent checks on the closed-form asymptotics: exact moments by
// enumeration over the (g, Y, S) atoms, Monte Carlo coverage of the
// intervals, a nonparametric bootstrap comparator, and a check of a
// previously published form of the conditional-metric covariance matrix.
//
// Every stochastic routine is a pure function of its inputs and seed.
// Replicate r draws from Xoshiro256::ForStream(seed, r); replicates may run
// on several threads and are aggregated with integer counters, so results do
// not depend on the thread count.

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "fairci/delta.hpp"
#include "fairci/metrics.hpp"
#include "fairci/rng.hpp"

namespace fairci {

// Probabilities over the (g, Y, S) cells, indexed by CellCode.
class CellDistribution {
 public:
  // Nonnegative, summing to one within 1e-12, else Error(kInvalidDistribution).
  static CellDistribution FromCells(const std::array<double, 8>& p);
  // probabilities[g][s]; the distribution has no label coordinate.
  static CellDistribution FromPredictionGroupCells(
      const std::array<std::array<double, 2>, 2>& probabilities);

  double operator[](std::size_t code) const { return p_[code]; }
  const std::array<double, 8>& cells() const { return p_; }
  bool has_labels() const { return has_labels_; }

 private:
  std::array<double, 8> p_{};
  bool has_labels_ = true;
};

struct ExactMoments {
  MomentVector mean;
  CovarianceMatrix covariance;
};

// E[Z] and Cov(Z) of the metric's indicator vector as finite sums over atoms.
ExactMoments ComputeExactMoments(const CellDistribution& dist, MetricId metric);

// Population value of the metric. Error(kDegenerateDistribution) when a
// denominator probability is zero.
double TrueMetricValue(const CellDistribution& dist, MetricId metric);

// Plug-in indicator covariance computed from individual records rather than
// from cell algebra: indicator bit planes, their Gram matrix (SIMD kernel),
// then E[Z_j Z_k] - E[Z_j] E[Z_k] with 1/n normalization.
ExactMoments EmpiricalIndicatorMoments(std::span<const AuditRecord> records,
                                       MetricId metric);

// Expands a cell table into one record per observation, cells in code order.
std::vector<AuditRecord> ExpandCells(const CellCounts& cells);

// One multinomial sample of size n from dist.
CellCounts SampleCells(const CellDistribution& dist, std::uint64_t n,
                       Xoshiro256& rng);

struct SimulationOptions {
  // 0 = hardware concurrency.
  unsigned threads = 0;
};

struct CoverageReport {
  MetricId metric = MetricId::kDia;
  double nominal = 0.95;
  double empirical = 0.0;
  double true_value = 0.0;
  std::uint64_t replicates = 0;  // retained
  std::uint64_t requested = 0;
  std::uint64_t discarded = 0;   // zero denominators at this sample size
  std::uint64_t covered = 0;
  std::uint64_t n_per_replicate = 0;
  std::uint64_t seed = 0;

  double discard_rate() const {
    return requested ? static_cast<double>(discarded) / requested : 0.0;
  }
  friend bool operator==(const CoverageReport&, const CoverageReport&) = default;
};

// Fraction of plug-in (1 - alpha) intervals that contain the true value.
// replicates >= 100.
CoverageReport CoverageSimulation(const CellDistribution& dist, MetricId metric,
                                  std::uint64_t n, std::uint64_t replicates,
                                  double alpha, std::uint64_t seed,
                                  SimulationOptions options = {});

struct SizeReport {
  MetricId metric = MetricId::kDia;
  double alpha = 0.05;
  double beta = 0.8;
  double true_value = 0.0;
  double rejection_rate = 0.0;
  std::uint64_t replicates = 0;
  std::uint64_t requested = 0;
  std::uint64_t discarded = 0;  // degenerate tables or zero sigma
  std::uint64_t rejections = 0;
  std::uint64_t n_per_replicate = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const SizeReport&, const SizeReport&) = default;
};

// Rejection rate of the one-sided test of H0: metric <= beta.
SizeReport TestSizeSimulation(const CellDistribution& dist, MetricId metric,
                              std::uint64_t n, std::uint64_t replicates,
                              double beta, double alpha, std::uint64_t seed,
                              SimulationOptions options = {});

// (sqrt(n)/sigma_hat)(T_n - true value) per retained replicate, in replicate
// order.
std::vector<double> StandardizedStatistics(const CellDistribution& dist,
                                           MetricId metric, std::uint64_t n,
                                           std::uint64_t replicates,
                                           std::uint64_t seed,
                                           SimulationOptions options = {});

// Kolmogorov-Smirnov distance sup |F_n(x) - Phi(x)|.
double KsDistanceToNormal(std::vector<double> sample);

struct BootstrapResult {
  double sigma = 0.0;  // bootstrap sd of the point estimate times sqrt(n)
  std::uint64_t resamples = 0;
  std::uint64_t discarded = 0;
};

// Nonparametric bootstrap over records. resamples >= 200; resamples with a
// zero denominator are discarded, more than 10% discarded throws
// Error(kTooManyDegenerateResamples).
BootstrapResult BootstrapSigmaDetailed(std::span<const AuditRecord> records,
                                       MetricId metric, std::uint64_t resamples,
                                       std::uint64_t seed,
                                       SimulationOptions options = {});

double BootstrapSigma(std::span<const AuditRecord> records, MetricId metric,
                      std::uint64_t resamples, std::uint64_t seed);

// A previously published form of the conditional-metric covariance. Only the
// adjudication uses it; no estimator does. Entries (2,1) = -p0 r1 and (4,1) =
// +p0 r1 disagree with the exact covariance.
CovarianceMatrix PrintedConditionalCovariance(const MomentVector& m);

// Group-wise parameters of a labelled scenario: P(S=0), prevalence
// q_s = P(Y=1|S=s), tpr_s = P(g=1|Y=1,S=s), fpr_s = P(g=1|Y=0,S=s).
struct ScenarioParameters {
  double protected_share = 0.3;
  std::array<double, 2> prevalence{0.4, 0.4};
  std::array<double, 2> tpr{0.7, 0.7};
  std::array<double, 2> fpr{0.2, 0.2};
};

CellDistribution ScenarioCells(const ScenarioParameters& params);

// Baseline scenario (every metric equal to 1) with the protected group's
// parameters adjusted so that `metric` equals `target`. Error
// kInvalidArgument when the target is not reachable with rates in (0, 1).
CellDistribution ScenarioDistribution(MetricId metric, double target);

// Random distribution with every cell probability positive, labels present.
CellDistribution RandomCellDistribution(Xoshiro256& rng);

struct AdjudicationReport {
  MetricId metric = MetricId::kCa1;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  double max_deviation_corrected = 0.0;
  double max_deviation_printed = 0.0;
  // Max |printed - exact| per entry over all trials.
  std::array<std::array<double, 4>, 4> printed_entry_deviation{};
  // 1-based (row, column) lower-triangle entries where the printed form
  // deviates by more than 1e-12.
  std::vector<std::pair<int, int>> printed_deviating_entries;
};

// Compares printed and corrected closed forms against ComputeExactMoments
// over `trials` random distributions. metric must be CA1, CA0, CU1 or CU0.
AdjudicationReport AdjudicateMatrix(MetricId metric, std::uint64_t trials,
                                    std::uint64_t seed);

}  // namespace fairci

#endif  // FAIRCI_VALIDATION_HPP_
