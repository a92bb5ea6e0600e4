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

#include "fairci/report.hpp"

#include <charconv>
#include <cstdio>
#include <ctime>
#include <initializer_list>
#include <map>
#include <set>

#include "fairci/error.hpp"
#include "json.hpp"

namespace fairci {
namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void Unreadable(const std::string& message) {
  throw Error(ErrorCode::kUnreadableReport, message);
}

// Every listed key present, nothing else.
void ExpectKeys(const json& j, std::initializer_list<std::string_view> keys,
                std::string_view what) {
  if (!j.is_object()) Unreadable(std::string(what) + " must be an object");
  for (const auto key : keys) {
    if (!j.contains(key)) {
      Unreadable(std::string(what) + " lacks field '" + std::string(key) + "'");
    }
  }
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const auto k : keys) known = known || k == key;
    if (!known) Unreadable(std::string(what) + " has unknown field '" + key + "'");
  }
}

double Number(const json& j, std::string_view what) {
  if (!j.is_number()) Unreadable(std::string(what) + " must be a number");
  return j.get<double>();
}

std::uint64_t Count(const json& j, std::string_view what) {
  if (!j.is_number_unsigned()) {
    Unreadable(std::string(what) + " must be a nonnegative integer");
  }
  return j.get<std::uint64_t>();
}

std::string Text(const json& j, std::string_view what) {
  if (!j.is_string()) Unreadable(std::string(what) + " must be a string");
  return j.get<std::string>();
}

std::optional<std::string> OptText(const json& j, std::string_view what) {
  if (j.is_null()) return std::nullopt;
  return Text(j, what);
}

std::vector<std::string> TextList(const json& j, std::string_view what) {
  if (!j.is_array()) Unreadable(std::string(what) + " must be an array");
  std::vector<std::string> out;
  for (const auto& v : j) out.push_back(Text(v, what));
  return out;
}

MetricId Metric(const json& j) {
  const auto id = ParseMetricId(Text(j, "metric"));
  if (!id) Unreadable("unknown metric " + j.dump());
  return *id;
}

void CheckHeader(const json& j, std::string_view kind) {
  if (!j.is_object()) Unreadable("report must be a JSON object");
  if (!j.contains("schema_version") || j["schema_version"] != kReportSchemaVersion) {
    Unreadable("unsupported schema_version (expected " +
               std::string(kReportSchemaVersion) + ")");
  }
  if (!j.contains("kind") || j["kind"] != kind) {
    Unreadable("report kind is not '" + std::string(kind) + "'");
  }
}

json Parse(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    Unreadable(std::string("not valid JSON: ") + e.what());
  }
}

json EstimateJson(const ReportedEstimate& r) {
  const MetricEstimate& e = r.estimate;
  json cov = json::array();
  for (const auto& row : e.covariance.rows()) cov.push_back(row);
  return json{{"metric", MetricName(e.metric)},
              {"group", r.group ? json(*r.group) : json(nullptr)},
              {"point", e.point},
              {"sigma", e.sigma},
              {"n", e.n},
              {"alpha", e.ci.alpha},
              {"lower", e.ci.lower},
              {"upper", e.ci.upper},
              {"moments", e.moments.m},
              {"covariance", cov},
              {"event_counts", e.event_counts},
              {"warnings", e.warnings}};
}

template <std::size_t N>
std::array<double, N> NumberArray(const json& j, std::string_view what) {
  if (!j.is_array() || j.size() != N) {
    Unreadable(std::string(what) + " must have " + std::to_string(N) + " entries");
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = Number(j[i], what);
  return out;
}

ReportedEstimate EstimateFrom(const json& j) {
  ExpectKeys(j,
             {"metric", "group", "point", "sigma", "n", "alpha", "lower",
              "upper", "moments", "covariance", "event_counts", "warnings"},
             "estimate");
  ReportedEstimate r;
  r.group = OptText(j["group"], "group");
  MetricEstimate& e = r.estimate;
  e.metric = Metric(j["metric"]);
  e.point = Number(j["point"], "point");
  e.sigma = Number(j["sigma"], "sigma");
  e.n = Count(j["n"], "n");
  e.ci = RatioCI{e.point, e.sigma, e.n, Number(j["alpha"], "alpha"),
                 Number(j["lower"], "lower"), Number(j["upper"], "upper")};
  if (!(e.ci.lower <= e.point && e.point <= e.ci.upper)) {
    Unreadable("estimate interval does not contain its point");
  }
  e.moments.m = NumberArray<4>(j["moments"], "moments");
  if (!j["covariance"].is_array() || j["covariance"].size() != 4) {
    Unreadable("covariance must be 4x4");
  }
  CovarianceMatrix::Rows rows{};
  for (std::size_t i = 0; i < 4; ++i) {
    rows[i] = NumberArray<4>(j["covariance"][i], "covariance row");
  }
  try {
    e.covariance = CovarianceMatrix(rows);
  } catch (const Error& err) {
    Unreadable(std::string("covariance: ") + err.what());
  }
  if (!j["event_counts"].is_array() || j["event_counts"].size() != 4) {
    Unreadable("event_counts must have 4 entries");
  }
  for (std::size_t i = 0; i < 4; ++i) {
    e.event_counts[i] = Count(j["event_counts"][i], "event_counts");
  }
  e.warnings = TextList(j["warnings"], "warnings");
  return r;
}

std::string FormatNumber(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string Fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  return out + "\"";
}

std::string RowLabel(const ReportedEstimate& r) {
  std::string label(MetricName(r.estimate.metric));
  if (r.group) label += "[" + *r.group + "]";
  return label;
}

const std::set<std::string>& AllowedParameters(const std::string& kind) {
  static const std::map<std::string, std::set<std::string>> kTable = {
      {"coverage", {"n", "replicates", "alpha", "target"}},
      {"size", {"n", "replicates", "alpha", "beta"}},
      {"adjudicate", {"trials"}},
      {"bootstrap", {"n", "resamples", "trials", "alpha", "target"}},
      {"ks", {"n", "replicates", "target"}}};
  const auto it = kTable.find(kind);
  if (it == kTable.end()) Unreadable("unknown validation kind '" + kind + "'");
  return it->second;
}

const std::set<std::string>& AllowedResults(const std::string& kind) {
  static const std::map<std::string, std::set<std::string>> kTable = {
      {"coverage",
       {"nominal", "empirical", "true_value", "retained", "discarded",
        "covered", "discard_rate"}},
      {"size",
       {"true_value", "rejection_rate", "retained", "discarded", "rejections"}},
      {"adjudicate",
       {"max_deviation_corrected", "max_deviation_printed",
        "printed_deviating_entries"}},
      {"bootstrap",
       {"point", "sigma_closed_form", "sigma_bootstrap", "relative_gap",
        "median_relative_gap", "discarded"}},
      {"ks", {"ks_distance", "retained", "discarded"}}};
  const auto it = kTable.find(kind);
  if (it == kTable.end()) Unreadable("unknown validation kind '" + kind + "'");
  return it->second;
}

std::vector<std::pair<std::string, double>> NamedNumbers(
    const json& j, const std::set<std::string>& allowed, std::string_view what) {
  if (!j.is_object()) Unreadable(std::string(what) + " must be an object");
  std::vector<std::pair<std::string, double>> out;
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) {
      Unreadable(std::string(what) + " has unknown field '" + key + "'");
    }
    out.emplace_back(key, Number(value, key));
  }
  return out;
}

json PlotRowJson(const PlotRow& r) {
  return json{{"metric", r.metric},
              {"point", r.point},
              {"lower", r.lower},
              {"upper", r.upper}};
}

PlotRow PlotRowFrom(const json& j) {
  ExpectKeys(j, {"metric", "point", "lower", "upper"}, "series row");
  return PlotRow{Text(j["metric"], "metric"), Number(j["point"], "point"),
                 Number(j["lower"], "lower"), Number(j["upper"], "upper")};
}

}  // namespace

std::string AuditReportToJson(const AuditReport& report) {
  json estimates = json::array();
  for (const auto& e : report.estimates) estimates.push_back(EstimateJson(e));
  json tests = json::array();
  for (const auto& t : report.tests) {
    tests.push_back(json{{"metric", MetricName(t.metric)},
                         {"group", t.group ? json(*t.group) : json(nullptr)},
                         {"beta", t.result.beta},
                         {"alpha", t.result.alpha},
                         {"statistic", t.result.statistic},
                         {"p_value", t.result.p_value},
                         {"reject_h0", t.result.reject_h0}});
  }
  const DatasetDescriptor& d = report.dataset;
  json j{
      {"schema_version", kReportSchemaVersion},
      {"kind", "audit"},
      {"tool_version", report.tool_version},
      {"timestamp", report.timestamp},
      {"seed", report.seed ? json(*report.seed) : json(nullptr)},
      {"alpha", report.alpha},
      {"beta", report.beta},
      {"dataset",
       {{"source", d.source},
        {"checksum", d.checksum ? json(*d.checksum) : json(nullptr)},
        {"n", d.n},
        {"raw_row_count", d.raw_row_count},
        {"n_dropped", d.n_dropped},
        {"has_labels", d.has_labels},
        {"cells", d.cells}}},
      {"reference_group",
       report.reference_group ? json(*report.reference_group) : json(nullptr)},
      {"estimates", estimates},
      {"tests", tests},
      {"parity_gap", report.parity_gap ? json(*report.parity_gap) : json(nullptr)},
      {"warnings", report.warnings}};
  return j.dump(2) + "\n";
}

AuditReport ParseAuditReportJson(std::string_view text) {
  const json j = Parse(text);
  CheckHeader(j, "audit");
  ExpectKeys(j,
             {"schema_version", "kind", "tool_version", "timestamp", "seed",
              "alpha", "beta", "dataset", "reference_group", "estimates",
              "tests", "parity_gap", "warnings"},
             "audit report");
  AuditReport r;
  r.tool_version = Text(j["tool_version"], "tool_version");
  r.timestamp = Text(j["timestamp"], "timestamp");
  if (!j["seed"].is_null()) r.seed = Count(j["seed"], "seed");
  r.alpha = Number(j["alpha"], "alpha");
  r.beta = Number(j["beta"], "beta");

  const json& d = j["dataset"];
  ExpectKeys(d,
             {"source", "checksum", "n", "raw_row_count", "n_dropped",
              "has_labels", "cells"},
             "dataset");
  r.dataset.source = Text(d["source"], "source");
  r.dataset.checksum = OptText(d["checksum"], "checksum");
  r.dataset.n = Count(d["n"], "n");
  r.dataset.raw_row_count = Count(d["raw_row_count"], "raw_row_count");
  r.dataset.n_dropped = Count(d["n_dropped"], "n_dropped");
  if (!d["has_labels"].is_boolean()) Unreadable("has_labels must be boolean");
  r.dataset.has_labels = d["has_labels"].get<bool>();
  if (!d["cells"].is_array() || (!d["cells"].empty() && d["cells"].size() != 8)) {
    Unreadable("cells must hold 8 counts or none");
  }
  for (const auto& c : d["cells"]) r.dataset.cells.push_back(Count(c, "cells"));

  r.reference_group = OptText(j["reference_group"], "reference_group");
  if (!j["estimates"].is_array()) Unreadable("estimates must be an array");
  for (const auto& e : j["estimates"]) r.estimates.push_back(EstimateFrom(e));
  if (!j["tests"].is_array()) Unreadable("tests must be an array");
  for (const auto& t : j["tests"]) {
    ExpectKeys(t,
               {"metric", "group", "beta", "alpha", "statistic", "p_value",
                "reject_h0"},
               "test");
    ReportedTest rt;
    rt.metric = Metric(t["metric"]);
    rt.group = OptText(t["group"], "group");
    rt.result.beta = Number(t["beta"], "beta");
    rt.result.alpha = Number(t["alpha"], "alpha");
    rt.result.statistic = Number(t["statistic"], "statistic");
    rt.result.p_value = Number(t["p_value"], "p_value");
    if (!t["reject_h0"].is_boolean()) Unreadable("reject_h0 must be boolean");
    rt.result.reject_h0 = t["reject_h0"].get<bool>();
    r.tests.push_back(rt);
  }
  if (!j["parity_gap"].is_null()) r.parity_gap = Number(j["parity_gap"], "parity_gap");
  r.warnings = TextList(j["warnings"], "warnings");
  return r;
}

std::string AuditSummaryText(const AuditReport& report) {
  const DatasetDescriptor& d = report.dataset;
  std::string out = "fairci audit of " + d.source + "\n";
  out += "  n = " + std::to_string(d.n) + " records (" +
         std::to_string(d.n_dropped) + " of " + std::to_string(d.raw_row_count) +
         " rows dropped)\n";
  if (report.reference_group) {
    out += "  reference group: " + *report.reference_group + "\n";
  }
  const std::string level = Fixed(100.0 * (1.0 - report.alpha), 0) + "% CI";
  for (const auto& r : report.estimates) {
    const MetricEstimate& e = r.estimate;
    std::string label = RowLabel(r);
    label.resize(std::max<std::size_t>(label.size(), 10), ' ');
    out += "  " + label + " " + Fixed(e.point) + "  " + level + " [" +
           Fixed(e.ci.lower) + ", " + Fixed(e.ci.upper) + "]  sigma " +
           Fixed(e.sigma);
    for (const auto& w : e.warnings) out += "  " + w;
    out += "\n";
  }
  for (const auto& t : report.tests) {
    std::string label(MetricName(t.metric));
    if (t.group) label += "[" + *t.group + "]";
    out += "  test H0: " + label + " <= " + Fixed(t.result.beta, 2) +
           " at alpha " + Fixed(t.result.alpha, 3) + ": statistic " +
           Fixed(t.result.statistic, 3) + ", p " + Fixed(t.result.p_value) +
           (t.result.reject_h0 ? ", reject" : ", fail to reject") + "\n";
  }
  if (report.parity_gap) {
    out += "  statistical parity gap P(g=1|S=0) - P(g=1|S=1) = " +
           Fixed(*report.parity_gap) + "\n";
  }
  for (const auto& w : report.warnings) out += "  warning: " + w + "\n";
  return out;
}

std::string ValidationReportToJson(const ValidationReport& report) {
  json params = json::object();
  for (const auto& [k, v] : report.parameters) params[k] = v;
  json results = json::object();
  for (const auto& [k, v] : report.results) results[k] = v;
  json series = json::array();
  for (const auto& r : report.series) series.push_back(PlotRowJson(r));
  json j{{"schema_version", kReportSchemaVersion},
         {"kind", "validation"},
         {"validation", report.kind},
         {"tool_version", report.tool_version},
         {"timestamp", report.timestamp},
         {"metric", MetricName(report.metric)},
         {"seed", report.seed},
         {"parameters", params},
         {"results", results},
         {"series", series},
         {"notes", report.notes}};
  return j.dump(2) + "\n";
}

ValidationReport ParseValidationReportJson(std::string_view text) {
  const json j = Parse(text);
  CheckHeader(j, "validation");
  ExpectKeys(j,
             {"schema_version", "kind", "validation", "tool_version",
              "timestamp", "metric", "seed", "parameters", "results", "series",
              "notes"},
             "validation report");
  ValidationReport r;
  r.kind = Text(j["validation"], "validation");
  r.tool_version = Text(j["tool_version"], "tool_version");
  r.timestamp = Text(j["timestamp"], "timestamp");
  r.metric = Metric(j["metric"]);
  r.seed = Count(j["seed"], "seed");
  r.parameters = NamedNumbers(j["parameters"], AllowedParameters(r.kind), "parameters");
  r.results = NamedNumbers(j["results"], AllowedResults(r.kind), "results");
  if (!j["series"].is_array()) Unreadable("series must be an array");
  for (const auto& row : j["series"]) r.series.push_back(PlotRowFrom(row));
  r.notes = TextList(j["notes"], "notes");
  return r;
}

std::string ValidationSummaryText(const ValidationReport& report) {
  std::string out = "fairci validate " + report.kind + " (" +
                    std::string(MetricName(report.metric)) + ", seed " +
                    std::to_string(report.seed) + ")\n";
  for (const auto& [k, v] : report.parameters) {
    out += "  " + k + " = " + FormatNumber(v) + "\n";
  }
  for (const auto& [k, v] : report.results) {
    out += "  " + k + ": " + FormatNumber(v) + "\n";
  }
  for (const auto& r : report.series) {
    out += "  " + r.metric + " " + Fixed(r.point) + " [" + Fixed(r.lower) +
           ", " + Fixed(r.upper) + "]\n";
  }
  for (const auto& n : report.notes) out += "  " + n + "\n";
  return out;
}

std::vector<PlotRow> PlotRowsFromReport(std::string_view json_text) {
  const json j = Parse(json_text);
  if (!j.is_object() || !j.contains("kind")) Unreadable("report has no kind");
  if (j["kind"] == "validation") {
    return ParseValidationReportJson(json_text).series;
  }
  const AuditReport report = ParseAuditReportJson(json_text);
  std::vector<PlotRow> rows;
  for (const auto& r : report.estimates) {
    rows.push_back(PlotRow{RowLabel(r), r.estimate.point, r.estimate.ci.lower,
                           r.estimate.ci.upper});
  }
  return rows;
}

std::string PlotDataCsv(const std::vector<PlotRow>& rows) {
  std::string out = "metric,point,lower,upper\n";
  for (const auto& r : rows) {
    out += CsvField(r.metric) + "," + FormatNumber(r.point) + "," +
           FormatNumber(r.lower) + "," + FormatNumber(r.upper) + "\n";
  }
  return out;
}

std::string CurrentTimestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace fairci
