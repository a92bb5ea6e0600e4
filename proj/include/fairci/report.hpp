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

#ifndef FAIRCI_REPORT_HPP_
#define FAIRCI_REPORT_HPP_

// Versioned JSON audit and validation reports, their strict readers, the
// plain-text summary and the plot-data CSV.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fairci/delta.hpp"
#include "fairci/metrics.hpp"

namespace fairci {

inline constexpr std::string_view kReportSchemaVersion = "fairci.report.v1";
inline constexpr std::string_view kToolVersion = "0.1.0";

struct DatasetDescriptor {
  std::string source;
  std::optional<std::string> checksum;
  std::uint64_t n = 0;
  std::uint64_t raw_row_count = 0;
  std::uint64_t n_dropped = 0;
  bool has_labels = false;
  // Indexed by CellCode; empty for pairwise audits.
  std::vector<std::uint64_t> cells;

  friend bool operator==(const DatasetDescriptor&,
                         const DatasetDescriptor&) = default;
};

// One estimate row. `group` names the compared group in pairwise audits.
struct ReportedEstimate {
  std::optional<std::string> group;
  MetricEstimate estimate;
};

struct ReportedTest {
  MetricId metric = MetricId::kDia;
  std::optional<std::string> group;
  TestResult result;
};

struct AuditReport {
  std::string tool_version{kToolVersion};
  std::string timestamp;
  std::optional<std::uint64_t> seed;
  double alpha = kDefaultAlpha;
  double beta = kDefaultBeta;
  DatasetDescriptor dataset;
  std::optional<std::string> reference_group;
  std::vector<ReportedEstimate> estimates;
  std::vector<ReportedTest> tests;
  std::optional<double> parity_gap;
  std::vector<std::string> warnings;
};

std::string AuditReportToJson(const AuditReport& report);
// Strict: unknown or missing fields and a foreign schema_version raise
// Error(kUnreadableReport).
AuditReport ParseAuditReportJson(std::string_view text);

// Human-readable summary; every estimate line carries its interval.
std::string AuditSummaryText(const AuditReport& report);

struct PlotRow {
  std::string metric;
  double point = 0.0;
  double lower = 0.0;
  double upper = 0.0;

  friend bool operator==(const PlotRow&, const PlotRow&) = default;
};

// Validation results in report form. `parameters` and `results` are flat
// name/value lists whose names depend on the kind (see README).
struct ValidationReport {
  std::string tool_version{kToolVersion};
  std::string timestamp;
  std::string kind;  // coverage, size, adjudicate, bootstrap, ks
  MetricId metric = MetricId::kDia;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, double>> parameters;
  std::vector<std::pair<std::string, double>> results;
  std::vector<PlotRow> series;
  std::vector<std::string> notes;
};

std::string ValidationReportToJson(const ValidationReport& report);
ValidationReport ParseValidationReportJson(std::string_view text);
std::string ValidationSummaryText(const ValidationReport& report);

// Series of an audit (one row per estimate, report order) or validation
// report, detected from the document. Error(kUnreadableReport).
std::vector<PlotRow> PlotRowsFromReport(std::string_view json_text);
std::string PlotDataCsv(const std::vector<PlotRow>& rows);

// UTC, ISO 8601, second resolution.
std::string CurrentTimestamp();

}  // namespace fairci

#endif  // FAIRCI_REPORT_HPP_
