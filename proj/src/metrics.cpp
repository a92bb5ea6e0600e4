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

#include "fairci/metrics.hpp"

#include <cmath>
#include <sstream>
#include <unordered_map>

#include "fairci/error.hpp"
#include "fairci/kernels.hpp"

namespace fairci {
namespace {

[[noreturn]] void ThrowLabelsMissing(std::string_view what) {
  throw Error(ErrorCode::kLabelsMissing,
              std::string(what) + " needs labels but the table has none");
}

}  // namespace

std::string_view MetricName(MetricId id) {
  switch (id) {
    case MetricId::kDia: return "DIA";
    case MetricId::kDiTrue: return "DI_true";
    case MetricId::kCa1: return "CA1";
    case MetricId::kCa0: return "CA0";
    case MetricId::kCu1: return "CU1";
    case MetricId::kCu0: return "CU0";
  }
  return "?";
}

std::optional<MetricId> ParseMetricId(std::string_view text) {
  static const std::unordered_map<std::string_view, MetricId> kNames = {
      {"DIA", MetricId::kDia},       {"dia", MetricId::kDia},
      {"di", MetricId::kDia},        {"DI_true", MetricId::kDiTrue},
      {"di-true", MetricId::kDiTrue}, {"di_true", MetricId::kDiTrue},
      {"CA1", MetricId::kCa1},       {"ca1", MetricId::kCa1},
      {"CA0", MetricId::kCa0},       {"ca0", MetricId::kCa0},
      {"CU1", MetricId::kCu1},       {"cu1", MetricId::kCu1},
      {"CU0", MetricId::kCu0},       {"cu0", MetricId::kCu0},
  };
  const auto it = kNames.find(text);
  if (it == kNames.end()) return std::nullopt;
  return it->second;
}

bool MetricNeedsLabels(MetricId id) { return id != MetricId::kDia; }

MetricEvents EventsFor(MetricId id) {
  switch (id) {
    case MetricId::kDia: return {{1, std::nullopt}, {}};
    case MetricId::kDiTrue: return {{std::nullopt, 1}, {}};
    case MetricId::kCa1: return {{1, 1}, {std::nullopt, 1}};
    case MetricId::kCa0: return {{0, 0}, {std::nullopt, 0}};
    case MetricId::kCu1: return {{1, 1}, {1, std::nullopt}};
    case MetricId::kCu0: return {{0, 0}, {0, std::nullopt}};
  }
  return {};
}

CellCounts CellCounts::FromCells(const std::array<std::uint64_t, 8>& cells,
                                 bool has_labels) {
  CellCounts c;
  c.cells_ = cells;
  c.has_labels_ = has_labels;
  for (int g = 0; g < 2; ++g) {
    for (int s = 0; s < 2; ++s) {
      if (!has_labels && cells[CellCode(g, 1, s)] != 0) {
        throw Error(ErrorCode::kInvalidArgument,
                    "label-free cell table has counts in label cells");
      }
    }
  }
  for (auto v : cells) c.n_ += v;
  return c;
}

CellCounts CellCounts::FromPredictionGroupCells(
    const std::array<std::array<std::uint64_t, 2>, 2>& counts) {
  std::array<std::uint64_t, 8> cells{};
  for (int g = 0; g < 2; ++g)
    for (int s = 0; s < 2; ++s) cells[CellCode(g, 0, s)] = counts[g][s];
  return FromCells(cells, false);
}

std::uint64_t CellCounts::Cell(int prediction, int label, int group) const {
  if (!has_labels_) ThrowLabelsMissing("a (g, Y, S) cell");
  return cells_[CellCode(prediction, label, group)];
}

std::uint64_t CellCounts::Count(const EventSpec& event, int group) const {
  if (event.label && !has_labels_) ThrowLabelsMissing("a label event");
  std::uint64_t total = 0;
  for (int g = 0; g < 2; ++g) {
    for (int y = 0; y < (has_labels_ ? 2 : 1); ++y) {
      // Without labels every record sits in the y = 0 slot.
      if (event.Contains(g, y)) {
        total += cells_[CellCode(g, y, group)];
      }
    }
  }
  return total;
}

CellCounts CellCounts::SwapGroups() const {
  std::array<std::uint64_t, 8> swapped{};
  for (int g = 0; g < 2; ++g)
    for (int y = 0; y < 2; ++y)
      for (int s = 0; s < 2; ++s)
        swapped[CellCode(g, y, 1 - s)] = cells_[CellCode(g, y, s)];
  return FromCells(swapped, has_labels_);
}

CellCounts CellCounts::FlipOutcomes() const {
  if (!has_labels_) ThrowLabelsMissing("flipping outcomes");
  std::array<std::uint64_t, 8> flipped{};
  for (int g = 0; g < 2; ++g)
    for (int y = 0; y < 2; ++y)
      for (int s = 0; s < 2; ++s)
        flipped[CellCode(1 - g, 1 - y, s)] = cells_[CellCode(g, y, s)];
  return FromCells(flipped, true);
}

CellCounts CountCells(std::span<const AuditRecord> records) {
  if (records.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no audit records to tabulate");
  }
  const bool has_labels = records.front().label.has_value();
  std::vector<std::uint8_t> codes;
  codes.reserve(records.size());
  for (const auto& r : records) {
    if (r.label.has_value() != has_labels) {
      throw Error(ErrorCode::kMixedLabelPresence,
                  "some records carry a label and others do not");
    }
    codes.push_back(CellCode(r.prediction != 0, r.label.value_or(0) != 0,
                             r.group != 0));
  }
  kernels::Histogram8 counts{};
  kernels::Tabulate(codes, counts);
  return CellCounts::FromCells(counts, has_labels);
}

MomentVector PluginMoments(const CellCounts& cells, MetricId metric) {
  if (MetricNeedsLabels(metric) && !cells.has_labels()) {
    ThrowLabelsMissing(MetricName(metric));
  }
  if (cells.n() == 0) {
    throw Error(ErrorCode::kEmptyInput, "empty cell table");
  }
  const MetricEvents ev = EventsFor(metric);
  const double n = static_cast<double>(cells.n());
  return MomentVector{{cells.Count(ev.numerator, 0) / n,
                       cells.Count(ev.numerator, 1) / n,
                       cells.Count(ev.base, 0) / n,
                       cells.Count(ev.base, 1) / n}};
}

CovarianceMatrix DisparateImpactCovariance(const MomentVector& m) {
  const double p0 = m[0], p1 = m[1], pi0 = m[2], pi1 = m[3];
  return CovarianceMatrix::FromLowerTriangle({
      p0 * (1 - p0),
      -p0 * p1, p1 * (1 - p1),
      pi1 * p0, -pi0 * p1, pi0 * pi1,
      -pi1 * p0, pi0 * p1, -pi0 * pi1, pi0 * pi1,
  });
}

CovarianceMatrix NestedEventCovariance(const MomentVector& m) {
  const double p0 = m[0], p1 = m[1], r0 = m[2], r1 = m[3];
  return CovarianceMatrix::FromLowerTriangle({
      p0 * (1 - p0),
      -p0 * p1, p1 * (1 - p1),
      p0 * (1 - r0), -p1 * r0, r0 * (1 - r0),
      -p0 * r1, p1 * (1 - r1), -r0 * r1, r1 * (1 - r1),
  });
}

CovarianceMatrix ClosedFormCovariance(MetricId metric, const MomentVector& m) {
  switch (metric) {
    case MetricId::kDia:
    case MetricId::kDiTrue:
      return DisparateImpactCovariance(m);
    default:
      return NestedEventCovariance(m);
  }
}

MetricEstimate EstimateMetric(const CellCounts& cells, MetricId metric,
                              double alpha) {
  if (MetricNeedsLabels(metric) && !cells.has_labels()) {
    ThrowLabelsMissing(MetricName(metric));
  }
  const MetricEvents ev = EventsFor(metric);
  MetricEstimate est;
  est.metric = metric;
  est.n = cells.n();
  est.event_counts = {cells.Count(ev.numerator, 0), cells.Count(ev.numerator, 1),
                      cells.Count(ev.base, 0), cells.Count(ev.base, 1)};
  const auto& c = est.event_counts;
  if (c[2] == 0 || c[3] == 0 || c[1] == 0) {
    std::ostringstream msg;
    msg << MetricName(metric) << " undefined: ";
    if (c[2] == 0 || c[3] == 0) {
      msg << "conditioning event empty in group S=" << (c[2] == 0 ? 0 : 1);
    } else {
      msg << "no numerator events in the favored group S=1";
    }
    throw Error(ErrorCode::kDegenerateDenominator, msg.str());
  }

  est.moments = PluginMoments(cells, metric);
  est.point = RatioPhi(est.moments);
  est.covariance = ClosedFormCovariance(metric, est.moments);
  est.sigma =
      std::sqrt(SandwichVariance(RatioGradient(est.moments), est.covariance));
  est.ci = CltInterval(est.point, est.sigma, est.n, alpha);
  for (auto count : c) {
    if (count < kSmallCellThreshold) {
      est.warnings.emplace_back(kSmallCellWarning);
      break;
    }
  }
  return est;
}

MetricEstimate EstimateDi(const CellCounts& cells, double alpha) {
  return EstimateMetric(cells, MetricId::kDia, alpha);
}

MetricEstimate EstimateDiTrue(const CellCounts& cells, double alpha) {
  return EstimateMetric(cells, MetricId::kDiTrue, alpha);
}

MetricEstimate EstimateCa(const CellCounts& cells, int outcome, double alpha) {
  return EstimateMetric(cells, outcome ? MetricId::kCa1 : MetricId::kCa0,
                        alpha);
}

MetricEstimate EstimateCu(const CellCounts& cells, int outcome, double alpha) {
  return EstimateMetric(cells, outcome ? MetricId::kCu1 : MetricId::kCu0,
                        alpha);
}

TestResult TestDisparateImpact(const MetricEstimate& estimate, double beta,
                               double alpha) {
  return OneSidedTest(estimate.point, estimate.sigma, estimate.n, beta, alpha);
}

double StatisticalParityGap(const CellCounts& cells) {
  const EventSpec positive{1, std::nullopt};
  const EventSpec any{};
  const auto n0 = cells.Count(any, 0);
  const auto n1 = cells.Count(any, 1);
  if (n0 == 0 || n1 == 0) {
    throw Error(ErrorCode::kDegenerateDenominator,
                "parity gap needs both groups to be nonempty");
  }
  return static_cast<double>(cells.Count(positive, 0)) / n0 -
         static_cast<double>(cells.Count(positive, 1)) / n1;
}

std::vector<PairwiseEstimate> PairwiseAudits(
    std::span<const GroupedRecord> records, std::string_view reference_group,
    double alpha, MetricId metric) {
  std::vector<std::string> order;
  std::unordered_map<std::string, std::size_t> seen;
  for (const auto& r : records) {
    if (seen.emplace(r.group, order.size()).second) order.push_back(r.group);
  }
  if (!seen.contains(std::string(reference_group))) {
    throw Error(ErrorCode::kUnknownReferenceGroup,
                "reference group '" + std::string(reference_group) +
                    "' does not occur in the data");
  }
  if (order.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "pairwise audits need at least two distinct groups");
  }
  std::vector<PairwiseEstimate> out;
  std::vector<AuditRecord> binary;
  for (const auto& group : order) {
    if (group == reference_group) continue;
    binary.clear();
    for (const auto& r : records) {
      if (r.group == group || r.group == reference_group) {
        binary.push_back(AuditRecord{
            r.prediction, r.label,
            static_cast<std::uint8_t>(r.group == reference_group ? 1 : 0)});
      }
    }
    out.push_back({group, EstimateMetric(CountCells(binary), metric, alpha)});
  }
  return out;
}

}  // namespace fairci
