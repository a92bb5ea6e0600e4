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

#ifndef FAIRCI_METRICS_HPP_
#define FAIRCI_METRICS_HPP_

// Group-fairness ratio metrics with asymptotic confidence intervals.
//
// Every metric is a ratio of two group-conditional rates,
//
//   P(A | B, S=0) / P(A | B, S=1),
//
// for a numerator event A nested inside a base event B (B may be the sure
// event). Writing p_s = P(A, S=s) and r_s = P(B, S=s), the plug-in estimator
// is RatioPhi(p0, p1, r0, r1) and its variance comes from the Delta method on
// the indicator vector (1{A,S=0}, 1{A,S=1}, 1{B,S=0}, 1{B,S=1}).
//
//   metric   A                B
//   DIA      g=1              -        disparate impact of the predictions
//   DI_true  Y=1              -        disparate impact of the labels
//   CA1      g=1, Y=1         Y=1      true-positive-rate ratio
//   CA0      g=0, Y=0         Y=0      true-negative-rate ratio
//   CU1      g=1, Y=1         g=1      positive-predictive-value ratio
//   CU0      g=0, Y=0         g=0      negative-predictive-value ratio

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairci/delta.hpp"

namespace fairci {

enum class MetricId { kDia, kDiTrue, kCa1, kCa0, kCu1, kCu0 };

inline constexpr std::array<MetricId, 6> kAllMetrics = {
    MetricId::kDia, MetricId::kDiTrue, MetricId::kCa1,
    MetricId::kCa0, MetricId::kCu1,    MetricId::kCu0};

// "DIA", "DI_true", "CA1", "CA0", "CU1", "CU0".
std::string_view MetricName(MetricId id);

// Accepts the canonical names and lowercase CLI spellings ("di", "dia",
// "di-true", "ca1", "cu0", ...).
std::optional<MetricId> ParseMetricId(std::string_view text);

bool MetricNeedsLabels(MetricId id);

// A conjunction of conditions on prediction and label; unset means "any".
struct EventSpec {
  std::optional<int> prediction;
  std::optional<int> label;

  bool Contains(int prediction_value, int label_value) const {
    return (!prediction || *prediction == prediction_value) &&
           (!label || *label == label_value);
  }
};

struct MetricEvents {
  EventSpec numerator;  // A
  EventSpec base;       // B, with A a subset of B
};

MetricEvents EventsFor(MetricId id);

struct AuditRecord {
  std::uint8_t prediction = 0;         // g(X)
  std::optional<std::uint8_t> label;   // Y, absent for prediction-only audits
  std::uint8_t group = 0;              // S, 0 = protected

  friend bool operator==(const AuditRecord&, const AuditRecord&) = default;
};

// Cell code used by the tabulation kernels: g << 2 | y << 1 | s.
constexpr std::uint8_t CellCode(int prediction, int label, int group) {
  return static_cast<std::uint8_t>((prediction << 2) | (label << 1) | group);
}

// Joint counts over the (g, Y, S) cells. Without labels only the four (g, S)
// cells are populated and every label query throws Error(kLabelsMissing).
class CellCounts {
 public:
  CellCounts() = default;

  // cells indexed by CellCode.
  static CellCounts FromCells(const std::array<std::uint64_t, 8>& cells,
                              bool has_labels);
  // counts[g][s], labels absent.
  static CellCounts FromPredictionGroupCells(
      const std::array<std::array<std::uint64_t, 2>, 2>& counts);

  std::uint64_t n() const { return n_; }
  bool has_labels() const { return has_labels_; }

  std::uint64_t Cell(int prediction, int label, int group) const;

  // Records in group s whose (g, Y) lies in `event`.
  std::uint64_t Count(const EventSpec& event, int group) const;

  const std::array<std::uint64_t, 8>& cells() const { return cells_; }

  // Same table with S recoded 0 <-> 1.
  CellCounts SwapGroups() const;
  // Same table with both g and Y bit-flipped.
  CellCounts FlipOutcomes() const;

 private:
  std::array<std::uint64_t, 8> cells_{};
  std::uint64_t n_ = 0;
  bool has_labels_ = false;
};

struct MetricEstimate {
  MetricId metric = MetricId::kDia;
  double point = 0.0;
  double sigma = 0.0;
  std::uint64_t n = 0;
  RatioCI ci;
  MomentVector moments;
  CovarianceMatrix covariance;
  // Counts of the four indicator events (A,S=0), (A,S=1), (B,S=0), (B,S=1).
  std::array<std::uint64_t, 4> event_counts{};
  std::vector<std::string> warnings;
};

// Asymptotic intervals are still reported when an event count is below this;
// the estimate carries a SMALL_CELL warning instead.
inline constexpr std::uint64_t kSmallCellThreshold = 30;
inline constexpr std::string_view kSmallCellWarning = "SMALL_CELL";

inline constexpr double kDefaultAlpha = 0.05;
inline constexpr double kDefaultBeta = 0.8;

// Exact tabulation. Throws Error(kEmptyInput) or Error(kMixedLabelPresence).
CellCounts CountCells(std::span<const AuditRecord> records);

// Plug-in mean of the metric's indicator vector (counts divided by n).
MomentVector PluginMoments(const CellCounts& cells, MetricId metric);

// Covariance of (1{g=1,S=0}, 1{g=1,S=1}, 1{S=0}, 1{S=1}) written in terms of
// p_s = P(g=1,S=s) and pi_s = P(S=s); also serves DI_true with Y for g.
CovarianceMatrix DisparateImpactCovariance(const MomentVector& m);

// Covariance of (1{A,S=0}, 1{A,S=1}, 1{B,S=0}, 1{B,S=1}) for A inside B:
//
//   p0(1-p0)
//   -p0 p1     p1(1-p1)
//   p0(1-r0)   -p1 r0     r0(1-r0)
//   -p0 r1     p1(1-r1)   -r0 r1     r1(1-r1)
//
// The two group slices are disjoint events, hence the negative products
// off the diagonal blocks.
CovarianceMatrix NestedEventCovariance(const MomentVector& m);

// The closed form the metric uses: DisparateImpactCovariance for DIA and
// DI_true, NestedEventCovariance for the conditional metrics.
CovarianceMatrix ClosedFormCovariance(MetricId metric, const MomentVector& m);

// Shared estimator path for all six metrics.
MetricEstimate EstimateMetric(const CellCounts& cells, MetricId metric,
                              double alpha = kDefaultAlpha);

MetricEstimate EstimateDi(const CellCounts& cells, double alpha = kDefaultAlpha);
MetricEstimate EstimateDiTrue(const CellCounts& cells,
                              double alpha = kDefaultAlpha);
// outcome 1 -> CA1 (TPR ratio), outcome 0 -> CA0 (TNR ratio).
MetricEstimate EstimateCa(const CellCounts& cells, int outcome,
                          double alpha = kDefaultAlpha);
// outcome 1 -> CU1 (PPV ratio), outcome 0 -> CU0 (NPV ratio).
MetricEstimate EstimateCu(const CellCounts& cells, int outcome,
                          double alpha = kDefaultAlpha);

TestResult TestDisparateImpact(const MetricEstimate& estimate,
                               double beta = kDefaultBeta,
                               double alpha = kDefaultAlpha);

// P(g=1 | S=0) - P(g=1 | S=1).
double StatisticalParityGap(const CellCounts& cells);

// Record whose protected attribute is an arbitrary group label.
struct GroupedRecord {
  std::uint8_t prediction = 0;
  std::optional<std::uint8_t> label;
  std::string group;
};

struct PairwiseEstimate {
  std::string group;
  MetricEstimate estimate;
};

// One binary audit per non-reference group G (S=0 for G, S=1 for the
// reference), in order of first appearance.
std::vector<PairwiseEstimate> PairwiseAudits(
    std::span<const GroupedRecord> records, std::string_view reference_group,
    double alpha = kDefaultAlpha, MetricId metric = MetricId::kDia);

}  // namespace fairci

#endif  // FAIRCI_METRICS_HPP_
