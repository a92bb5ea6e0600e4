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

#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fairci/error.hpp"
#include "fairci/ingest.hpp"
#include "fairci/metrics.hpp"
#include "fairci/normal.hpp"
#include "fairci/report.hpp"
#include "fairci/validation.hpp"

namespace fairci {
namespace {

struct AuditArgs {
  std::string data;
  std::string schema;
  std::string preset;
  std::vector<std::string> metrics{"all"};
  double alpha = kDefaultAlpha;
  double beta = kDefaultBeta;
  std::string group_col;
  std::string reference_group;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool offline = false;
  std::string registry;
  std::string cache_dir;
};

struct ValidateArgs {
  std::string kind;
  std::string metric = "di";
  std::uint64_t n = 5000;
  std::uint64_t reps = 2000;
  double alpha = kDefaultAlpha;
  double beta = kDefaultBeta;
  double target = 1.0;
  std::uint64_t seed = 42;
  std::uint64_t trials = 0;  // 0 = kind default
  std::uint64_t resamples = 500;
  unsigned threads = 0;
  std::string out;
};

struct MetricSelection {
  std::vector<MetricId> metrics;
  bool parity_gap = false;
  bool all = false;
};

MetricSelection SelectMetrics(const std::vector<std::string>& names) {
  MetricSelection sel;
  auto add = [&](MetricId id) {
    if (std::find(sel.metrics.begin(), sel.metrics.end(), id) == sel.metrics.end()) {
      sel.metrics.push_back(id);
    }
  };
  for (const auto& name : names) {
    if (name == "all") {
      sel.all = true;
      sel.parity_gap = true;
      for (MetricId id : kAllMetrics) add(id);
    } else if (name == "ca") {
      add(MetricId::kCa1);
      add(MetricId::kCa0);
    } else if (name == "cu") {
      add(MetricId::kCu1);
      add(MetricId::kCu0);
    } else if (name == "parity-gap") {
      sel.parity_gap = true;
    } else if (const auto id = ParseMetricId(name)) {
      add(*id);
    } else {
      throw Error(ErrorCode::kInvalidArgument,
                  "unknown metric '" + name +
                      "' (di, di-true, ca, cu, ca1, ca0, cu1, cu0, "
                      "parity-gap, all)");
    }
  }
  return sel;
}

std::string ReadWholeFile(const std::string& path, ErrorCode code) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(code, "cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::move(buffer).str();
}

void WriteFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
}

Registry LoadRegistry(const std::string& path) {
  return path.empty() ? Registry::LoadDefault() : Registry::Load(path);
}

FetchOptions MakeFetchOptions(bool offline, const std::string& cache_dir) {
  FetchOptions opt;
  opt.cache_dir =
      cache_dir.empty() ? DefaultCacheDir() : std::filesystem::path(cache_dir);
  opt.offline = offline;
  return opt;
}

struct LoadedInput {
  RawTable raw;
  SchemaConfig schema;
};

LoadedInput LoadInput(const AuditArgs& a) {
  LoadedInput in;
  if (!a.preset.empty()) {
    if (!a.data.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "--preset and --data are exclusive");
    }
    const Registry registry = LoadRegistry(a.registry);
    const RegistryEntry& entry = registry.Find(a.preset);
    in.schema = a.schema.empty() ? entry.schema : LoadSchemaFile(a.schema);
    const auto path = FetchPresetFile(entry, MakeFetchOptions(a.offline, a.cache_dir));
    in.raw = ParseTableFile(path, in.schema.format);
    in.raw.source = "preset:" + entry.id;
  } else if (!a.data.empty()) {
    if (a.schema.empty()) {
      // Canonical 0/1 table; labels when the header has a label column.
      in.raw = ParseTableFile(a.data, ParseOptions{});
      in.schema = CanonicalSchema(in.raw.ColumnIndex("label").has_value());
    } else {
      in.schema = LoadSchemaFile(a.schema);
      in.raw = ParseTableFile(a.data, in.schema.format);
    }
  } else {
    throw Error(ErrorCode::kInvalidArgument, "audit needs --data or --preset");
  }
  if (!a.group_col.empty()) in.schema.group_column = a.group_col;
  return in;
}

void AddTest(AuditReport& report, const MetricEstimate& e,
             const std::optional<std::string>& group) {
  try {
    report.tests.push_back(
        ReportedTest{e.metric, group, TestDisparateImpact(e, report.beta, report.alpha)});
  } catch (const Error& err) {
    if (err.code() != ErrorCode::kZeroSigma) throw;
    std::string label(MetricName(e.metric));
    if (group) label += "[" + *group + "]";
    report.warnings.push_back("TEST_UNDEFINED: " + label +
                              " has zero estimated variance");
  }
}

AuditReport BinaryAudit(const LoadedInput& in, const MetricSelection& sel,
                        AuditReport report) {
  const AuditTable table = ApplySchema(in.raw, in.schema);
  const CellCounts cells = CountCells(table.records);
  report.dataset = DatasetDescriptor{table.source,
                                     table.checksum,
                                     cells.n(),
                                     table.raw_row_count,
                                     table.n_dropped,
                                     cells.has_labels(),
                                     {cells.cells().begin(), cells.cells().end()}};
  for (MetricId id : sel.metrics) {
    if (MetricNeedsLabels(id) && !cells.has_labels() && sel.all) {
      report.warnings.push_back("LABELS_MISSING: " + std::string(MetricName(id)) +
                                " skipped, the schema has no label column");
      continue;
    }
    try {
      MetricEstimate e = EstimateMetric(cells, id, report.alpha);
      AddTest(report, e, std::nullopt);
      report.estimates.push_back(ReportedEstimate{std::nullopt, std::move(e)});
    } catch (const Error& err) {
      if (!sel.all || err.code() != ErrorCode::kDegenerateDenominator) throw;
      report.warnings.push_back("DEGENERATE: " + std::string(MetricName(id)) +
                                " skipped (" + err.what() + ")");
    }
  }
  if (sel.parity_gap) report.parity_gap = StatisticalParityGap(cells);
  return report;
}

AuditReport PairwiseAudit(const LoadedInput& in, const MetricSelection& sel,
                          const std::string& reference, AuditReport report) {
  const MultiGroupTable table = ApplyMultiGroupSchema(in.raw, in.schema);
  const bool labels = table.records.front().label.has_value();
  report.reference_group = reference;
  report.dataset = DatasetDescriptor{table.source,     in.raw.checksum,
                                     table.records.size(), table.raw_row_count,
                                     table.n_dropped,  labels,
                                     {}};
  if (sel.parity_gap && !sel.all) {
    report.warnings.push_back("parity-gap is not reported for pairwise audits");
  }
  for (MetricId id : sel.metrics) {
    if (MetricNeedsLabels(id) && !labels && sel.all) continue;
    for (auto& pw : PairwiseAudits(table.records, reference, report.alpha, id)) {
      AddTest(report, pw.estimate, pw.group);
      report.estimates.push_back(ReportedEstimate{pw.group, std::move(pw.estimate)});
    }
  }
  return report;
}

int RunAudit(const AuditArgs& a, std::ostream& out) {
  const MetricSelection sel = SelectMetrics(a.metrics);
  LoadedInput in;
  try {
    in = LoadInput(a);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kEmptyFile) throw;
    throw Error(ErrorCode::kEmptyInput, std::string("no records (") + e.what() + ")");
  }
  AuditReport report;
  report.timestamp = CurrentTimestamp();
  report.seed = a.seed;
  report.alpha = a.alpha;
  report.beta = a.beta;
  if (!(a.alpha > 0.0 && a.alpha < 1.0)) {
    throw Error(ErrorCode::kInvalidAlpha, "alpha must lie in (0, 1)");
  }
  report = a.reference_group.empty()
               ? BinaryAudit(in, sel, std::move(report))
               : PairwiseAudit(in, sel, a.reference_group, std::move(report));
  if (!a.out.empty()) WriteFile(a.out, AuditReportToJson(report));
  out << AuditSummaryText(report);
  return 0;
}

// Wilson score interval for a binomial proportion.
PlotRow ProportionRow(const std::string& label, std::uint64_t hits,
                      std::uint64_t trials) {
  const double z = NormalQuantile(0.975);
  const double n = static_cast<double>(trials);
  const double p = n > 0 ? hits / n : 0.0;
  const double denom = 1.0 + z * z / n;
  const double centre = (p + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
  return PlotRow{label, p, centre - half, centre + half};
}

MetricId RequireMetric(const std::string& name) {
  const auto id = ParseMetricId(name);
  if (!id) throw Error(ErrorCode::kInvalidArgument, "unknown metric '" + name + "'");
  return *id;
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

ValidationReport RunValidation(const ValidateArgs& a) {
  ValidationReport r;
  r.kind = a.kind;
  r.metric = RequireMetric(a.metric);
  r.seed = a.seed;
  const SimulationOptions sim{a.threads};
  const auto d = [](std::uint64_t v) { return static_cast<double>(v); };

  if (a.kind == "coverage") {
    const CoverageReport c = CoverageSimulation(ScenarioDistribution(r.metric, a.target),
                                                r.metric, a.n, a.reps, a.alpha,
                                                a.seed, sim);
    r.parameters = {{"n", d(a.n)}, {"replicates", d(a.reps)},
                    {"alpha", a.alpha}, {"target", a.target}};
    r.results = {{"nominal", c.nominal},        {"empirical", c.empirical},
                 {"true_value", c.true_value},  {"retained", d(c.replicates)},
                 {"discarded", d(c.discarded)}, {"covered", d(c.covered)},
                 {"discard_rate", c.discard_rate()}};
    r.series.push_back(ProportionRow(std::string(MetricName(r.metric)) + " coverage",
                                     c.covered, c.replicates));
  } else if (a.kind == "size") {
    const SizeReport s = TestSizeSimulation(ScenarioDistribution(r.metric, a.beta),
                                            r.metric, a.n, a.reps, a.beta,
                                            a.alpha, a.seed, sim);
    r.parameters = {{"n", d(a.n)}, {"replicates", d(a.reps)},
                    {"alpha", a.alpha}, {"beta", a.beta}};
    r.results = {{"true_value", s.true_value},
                 {"rejection_rate", s.rejection_rate},
                 {"retained", d(s.replicates)},
                 {"discarded", d(s.discarded)},
                 {"rejections", d(s.rejections)}};
    r.series.push_back(ProportionRow(std::string(MetricName(r.metric)) + " size",
                                     s.rejections, s.replicates));
  } else if (a.kind == "adjudicate") {
    const std::uint64_t trials = a.trials ? a.trials : 100;
    const AdjudicationReport adj = AdjudicateMatrix(r.metric, trials, a.seed);
    r.parameters = {{"trials", d(trials)}};
    r.results = {{"max_deviation_corrected", adj.max_deviation_corrected},
                 {"max_deviation_printed", adj.max_deviation_printed},
                 {"printed_deviating_entries", d(adj.printed_deviating_entries.size())}};
    for (const auto& [row, col] : adj.printed_deviating_entries) {
      r.notes.push_back("printed form deviates at (" + std::to_string(row) + "," +
                        std::to_string(col) + ") by up to " +
                        std::to_string(adj.printed_entry_deviation[row - 1][col - 1]));
    }
  } else if (a.kind == "bootstrap") {
    const std::uint64_t trials = a.trials ? a.trials : 1;
    const CellDistribution dist = ScenarioDistribution(r.metric, a.target);
    std::vector<double> gaps;
    std::uint64_t discarded = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
      auto rng = Xoshiro256::ForStream(a.seed, t);
      const auto records = ExpandCells(SampleCells(dist, a.n, rng));
      const MetricEstimate e = EstimateMetric(CountCells(records), r.metric, a.alpha);
      const BootstrapResult b = BootstrapSigmaDetailed(
          records, r.metric, a.resamples, Mix64(a.seed) + t, sim);
      discarded += b.discarded;
      gaps.push_back(std::fabs(b.sigma - e.sigma) / e.sigma);
      if (t == 0) {
        const double z = NormalQuantile(1.0 - a.alpha / 2.0);
        const double half = z * b.sigma / std::sqrt(d(a.n));
        r.results = {{"point", e.point},
                     {"sigma_closed_form", e.sigma},
                     {"sigma_bootstrap", b.sigma},
                     {"relative_gap", gaps.back()}};
        const std::string name(MetricName(r.metric));
        r.series.push_back(PlotRow{name + " delta", e.point, e.ci.lower, e.ci.upper});
        r.series.push_back(
            PlotRow{name + " bootstrap", e.point, e.point - half, e.point + half});
      }
    }
    r.results.emplace_back("median_relative_gap", Median(gaps));
    r.results.emplace_back("discarded", d(discarded));
    r.parameters = {{"n", d(a.n)}, {"resamples", d(a.resamples)},
                    {"trials", d(trials)}, {"alpha", a.alpha}, {"target", a.target}};
  } else if (a.kind == "ks") {
    const auto stats = StandardizedStatistics(ScenarioDistribution(r.metric, a.target),
                                              r.metric, a.n, a.reps, a.seed, sim);
    r.parameters = {{"n", d(a.n)}, {"replicates", d(a.reps)}, {"target", a.target}};
    r.results = {{"ks_distance", KsDistanceToNormal(stats)},
                 {"retained", d(stats.size())},
                 {"discarded", d(a.reps - stats.size())}};
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown validation '" + a.kind + "'");
  }
  return r;
}

int RunValidate(const ValidateArgs& a, std::ostream& out) {
  ValidationReport r = RunValidation(a);
  r.timestamp = CurrentTimestamp();
  if (!a.out.empty()) WriteFile(a.out, ValidationReportToJson(r));
  out << ValidationSummaryText(r);
  return 0;
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"fairci: fairness ratio metrics with asymptotic confidence intervals"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  AuditArgs audit;
  auto* audit_cmd = app.add_subcommand("audit", "Estimate metrics on an audit table");
  audit_cmd->add_option("--data", audit.data, "Delimited table to audit");
  audit_cmd->add_option("--schema", audit.schema, "JSON schema mapping the table");
  audit_cmd->add_option("--preset", audit.preset, "Registered dataset preset");
  audit_cmd->add_option("--metric", audit.metrics,
                        "di, di-true, ca, cu, ca1, ca0, cu1, cu0, parity-gap, all")
      ->capture_default_str();
  audit_cmd->add_option("--alpha", audit.alpha, "Interval and test level")
      ->capture_default_str();
  audit_cmd->add_option("--beta", audit.beta, "Threshold of H0: metric <= beta")
      ->capture_default_str();
  audit_cmd->add_option("--group-col", audit.group_col, "Override the group column");
  audit_cmd->add_option("--reference-group", audit.reference_group,
                        "Pairwise audits of every group against this one");
  audit_cmd->add_option("--out", audit.out, "Write the JSON report here");
  audit_cmd->add_option("--seed", audit.seed, "Recorded in the report");
  audit_cmd->add_flag("--offline", audit.offline, "Use the dataset cache only");
  audit_cmd->add_option("--registry", audit.registry, "Preset registry file");
  audit_cmd->add_option("--cache-dir", audit.cache_dir, "Dataset cache directory");

  ValidateArgs validate;
  auto* validate_cmd = app.add_subcommand("validate", "Run a validation suite");
  validate_cmd->add_option("kind", validate.kind, "coverage, size, adjudicate, bootstrap, ks")
      ->required()
      ->check(CLI::IsMember({"coverage", "size", "adjudicate", "bootstrap", "ks"}));
  validate_cmd->add_option("--metric", validate.metric)->capture_default_str();
  validate_cmd->add_option("--n", validate.n, "Sample size per replicate")
      ->capture_default_str();
  validate_cmd->add_option("--reps", validate.reps, "Replicates")->capture_default_str();
  validate_cmd->add_option("--alpha", validate.alpha)->capture_default_str();
  validate_cmd->add_option("--beta", validate.beta, "Null boundary for size runs")
      ->capture_default_str();
  validate_cmd->add_option("--target", validate.target,
                           "True metric value of the simulated scenario")
      ->capture_default_str();
  validate_cmd->add_option("--seed", validate.seed)->capture_default_str();
  validate_cmd->add_option("--trials", validate.trials,
                           "Adjudication distributions or bootstrap datasets");
  validate_cmd->add_option("--resamples", validate.resamples)->capture_default_str();
  validate_cmd->add_option("--threads", validate.threads, "0 = all cores");
  validate_cmd->add_option("--out", validate.out, "Write the JSON report here");

  std::string plot_in, plot_out;
  auto* plot_cmd = app.add_subcommand("plotdata", "CSV series from a JSON report");
  plot_cmd->add_option("report", plot_in, "Audit or validation report")->required();
  plot_cmd->add_option("--out", plot_out, "Write the CSV here instead of stdout");

  std::string fetch_id, fetch_registry, fetch_cache, fetch_digest;
  bool fetch_offline = false;
  auto* fetch_cmd = app.add_subcommand("fetch", "Download and verify a dataset preset");
  fetch_cmd->add_option("preset", fetch_id, "Preset id; omit to list presets");
  fetch_cmd->add_option("--registry", fetch_registry);
  fetch_cmd->add_option("--cache-dir", fetch_cache);
  fetch_cmd->add_option("--digest", fetch_digest, "Expected SHA-256 override");
  fetch_cmd->add_flag("--offline", fetch_offline);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*audit_cmd) return RunAudit(audit, out);
    if (*validate_cmd) return RunValidate(validate, out);
    if (*plot_cmd) {
      const auto rows =
          PlotRowsFromReport(ReadWholeFile(plot_in, ErrorCode::kUnreadableReport));
      const std::string csv = PlotDataCsv(rows);
      if (plot_out.empty()) {
        out << csv;
      } else {
        WriteFile(plot_out, csv);
      }
      return 0;
    }
    const Registry registry = LoadRegistry(fetch_registry);
    if (fetch_id.empty()) {
      for (const auto& e : registry.entries()) out << e.id << "  " << e.description << "\n";
      return 0;
    }
    const RegistryEntry& entry = registry.Find(fetch_id);
    const FetchOptions opt = MakeFetchOptions(fetch_offline, fetch_cache);
    if (fetch_digest.empty()) {
      out << FetchPresetFile(entry, opt).string() << "\n";
    } else {
      const AuditTable t = FetchDataset(entry, opt, fetch_digest);
      out << entry.id << ": " << t.records.size() << " records\n";
    }
    return 0;
  } catch (const Error& e) {
    err << "fairci: " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    err << "fairci: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace fairci
