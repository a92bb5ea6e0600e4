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

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <thread>

#include "fairci/error.hpp"
#include "fairci/kernels.hpp"
#include "fairci/normal.hpp"

namespace fairci {
namespace {

constexpr std::size_t kUniformBatch = 4096;
constexpr double kDeviationTolerance = 1e-12;

// Runs body(i) for i in [0, count) on up to `threads` workers with a static
// interleaved split. Exceptions other than the ones the body handles abort
// the whole run.
void ParallelFor(std::uint64_t count, unsigned threads,
                 const std::function<void(std::uint64_t)>& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(
      std::min<std::uint64_t>(threads, std::max<std::uint64_t>(count, 1)));
  if (threads <= 1) {
    for (std::uint64_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::uint64_t i = t; i < count; i += threads) body(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::array<bool, 4> IndicatorsFor(const MetricEvents& ev, int g, int y, int s) {
  const bool a = ev.numerator.Contains(g, y);
  const bool b = ev.base.Contains(g, y);
  return {a && s == 0, a && s == 1, b && s == 0, b && s == 1};
}

void CheckReplicates(std::uint64_t replicates, std::uint64_t minimum) {
  if (replicates < minimum) {
    throw Error(ErrorCode::kInvalidArgument,
                "need at least " + std::to_string(minimum) + " replicates");
  }
}

// Replicate outcome codes.
constexpr std::int8_t kDiscarded = -1;

}  // namespace

CellDistribution CellDistribution::FromCells(const std::array<double, 8>& p) {
  double total = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidDistribution,
                  "cell probability negative or not finite");
    }
    total += v;
  }
  if (std::fabs(total - 1.0) > 1e-12) {
    throw Error(ErrorCode::kInvalidDistribution,
                "cell probabilities sum to " + std::to_string(total));
  }
  CellDistribution d;
  d.p_ = p;
  d.has_labels_ = true;
  return d;
}

CellDistribution CellDistribution::FromPredictionGroupCells(
    const std::array<std::array<double, 2>, 2>& probabilities) {
  std::array<double, 8> p{};
  for (int g = 0; g < 2; ++g)
    for (int s = 0; s < 2; ++s) p[CellCode(g, 0, s)] = probabilities[g][s];
  CellDistribution d = FromCells(p);
  d.has_labels_ = false;
  return d;
}

ExactMoments ComputeExactMoments(const CellDistribution& dist,
                                 MetricId metric) {
  if (MetricNeedsLabels(metric) && !dist.has_labels()) {
    throw Error(ErrorCode::kInvalidDistribution,
                std::string(MetricName(metric)) +
                    " needs a distribution over labels");
  }
  const MetricEvents ev = EventsFor(metric);
  std::array<double, 4> mean{};
  std::array<std::array<double, 4>, 4> second{};
  for (int g = 0; g < 2; ++g) {
    for (int y = 0; y < 2; ++y) {
      for (int s = 0; s < 2; ++s) {
        const double prob = dist[CellCode(g, y, s)];
        if (prob == 0.0) continue;
        const auto z = IndicatorsFor(ev, g, y, s);
        for (int j = 0; j < 4; ++j) {
          if (!z[j]) continue;
          mean[j] += prob;
          for (int k = 0; k < 4; ++k)
            if (z[k]) second[j][k] += prob;
        }
      }
    }
  }
  CovarianceMatrix::Rows cov{};
  for (int j = 0; j < 4; ++j)
    for (int k = 0; k < 4; ++k) cov[j][k] = second[j][k] - mean[j] * mean[k];
  return {MomentVector{mean}, CovarianceMatrix(cov)};
}

double TrueMetricValue(const CellDistribution& dist, MetricId metric) {
  const auto moments = ComputeExactMoments(dist, metric);
  if (moments.mean[1] <= 0.0 || moments.mean[2] <= 0.0 ||
      moments.mean[3] <= 0.0) {
    throw Error(ErrorCode::kDegenerateDistribution,
                std::string(MetricName(metric)) +
                    " has a zero denominator under this distribution");
  }
  return RatioPhi(moments.mean);
}

ExactMoments EmpiricalIndicatorMoments(std::span<const AuditRecord> records,
                                       MetricId metric) {
  if (records.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no records");
  }
  const MetricEvents ev = EventsFor(metric);
  const std::size_t words = (records.size() + 63) / 64;
  std::array<std::vector<std::uint64_t>, 4> planes;
  for (auto& p : planes) p.assign(words, 0);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (MetricNeedsLabels(metric) && !r.label) {
      throw Error(ErrorCode::kLabelsMissing,
                  std::string(MetricName(metric)) + " needs labels");
    }
    const auto z = IndicatorsFor(ev, r.prediction != 0,
                                 r.label.value_or(0) != 0, r.group != 0);
    for (int j = 0; j < 4; ++j) {
      if (z[j]) planes[j][i / 64] |= std::uint64_t{1} << (i % 64);
    }
  }
  const kernels::Gram4 gram = kernels::IndicatorGram(
      {planes[0], planes[1], planes[2], planes[3]});
  const double n = static_cast<double>(records.size());
  std::array<double, 4> mean{};
  for (int j = 0; j < 4; ++j) mean[j] = gram[j][j] / n;
  CovarianceMatrix::Rows cov{};
  for (int j = 0; j < 4; ++j)
    for (int k = 0; k < 4; ++k) cov[j][k] = gram[j][k] / n - mean[j] * mean[k];
  return {MomentVector{mean}, CovarianceMatrix(cov)};
}

std::vector<AuditRecord> ExpandCells(const CellCounts& cells) {
  std::vector<AuditRecord> out;
  out.reserve(cells.n());
  for (int g = 0; g < 2; ++g) {
    for (int y = 0; y < 2; ++y) {
      for (int s = 0; s < 2; ++s) {
        const auto count = cells.cells()[CellCode(g, y, s)];
        AuditRecord r{static_cast<std::uint8_t>(g), std::nullopt,
                      static_cast<std::uint8_t>(s)};
        if (cells.has_labels()) r.label = static_cast<std::uint8_t>(y);
        out.insert(out.end(), count, r);
      }
    }
  }
  return out;
}

CellCounts SampleCells(const CellDistribution& dist, std::uint64_t n,
                       Xoshiro256& rng) {
  kernels::Cuts7 cuts{};
  double cumulative = 0.0;
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    cumulative += dist[k];
    cuts[k] = cumulative;
  }
  // Guard the top cell against rounding in the running sum.
  if (dist[7] == 0.0) {
    for (std::size_t k = cuts.size(); k-- > 0 && dist[k + 1] == 0.0;) {
      cuts[k] = std::numeric_limits<double>::infinity();
    }
  }
  kernels::Histogram8 counts{};
  std::vector<double> batch(std::min<std::uint64_t>(n, kUniformBatch));
  for (std::uint64_t done = 0; done < n;) {
    const std::size_t take =
        static_cast<std::size_t>(std::min<std::uint64_t>(n - done, batch.size()));
    for (std::size_t i = 0; i < take; ++i) batch[i] = rng.Uniform();
    kernels::BinUniforms({batch.data(), take}, cuts, counts);
    done += take;
  }
  return CellCounts::FromCells(counts, dist.has_labels());
}

CoverageReport CoverageSimulation(const CellDistribution& dist, MetricId metric,
                                  std::uint64_t n, std::uint64_t replicates,
                                  double alpha, std::uint64_t seed,
                                  SimulationOptions options) {
  CheckReplicates(replicates, 100);
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::kInvalidAlpha, "alpha must lie in (0, 1)");
  }
  const double truth = TrueMetricValue(dist, metric);
  std::vector<std::int8_t> outcome(replicates, kDiscarded);
  ParallelFor(replicates, options.threads, [&](std::uint64_t r) {
    Xoshiro256 rng = Xoshiro256::ForStream(seed, r);
    const CellCounts cells = SampleCells(dist, n, rng);
    try {
      const MetricEstimate est = EstimateMetric(cells, metric, alpha);
      outcome[r] = (est.ci.lower <= truth && truth <= est.ci.upper) ? 1 : 0;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateDenominator) throw;
    }
  });
  CoverageReport rep;
  rep.metric = metric;
  rep.nominal = 1.0 - alpha;
  rep.true_value = truth;
  rep.requested = replicates;
  rep.n_per_replicate = n;
  rep.seed = seed;
  for (auto o : outcome) {
    if (o == kDiscarded) {
      ++rep.discarded;
    } else {
      ++rep.replicates;
      rep.covered += static_cast<std::uint64_t>(o);
    }
  }
  if (rep.replicates == 0) {
    throw Error(ErrorCode::kDegenerateDistribution,
                "every replicate had a zero denominator at n=" +
                    std::to_string(n));
  }
  rep.empirical = static_cast<double>(rep.covered) / rep.replicates;
  return rep;
}

SizeReport TestSizeSimulation(const CellDistribution& dist, MetricId metric,
                              std::uint64_t n, std::uint64_t replicates,
                              double beta, double alpha, std::uint64_t seed,
                              SimulationOptions options) {
  CheckReplicates(replicates, 100);
  const double truth = TrueMetricValue(dist, metric);
  std::vector<std::int8_t> outcome(replicates, kDiscarded);
  ParallelFor(replicates, options.threads, [&](std::uint64_t r) {
    Xoshiro256 rng = Xoshiro256::ForStream(seed, r);
    const CellCounts cells = SampleCells(dist, n, rng);
    try {
      const MetricEstimate est = EstimateMetric(cells, metric, alpha);
      outcome[r] = TestDisparateImpact(est, beta, alpha).reject_h0 ? 1 : 0;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateDenominator &&
          e.code() != ErrorCode::kZeroSigma) {
        throw;
      }
    }
  });
  SizeReport rep;
  rep.metric = metric;
  rep.alpha = alpha;
  rep.beta = beta;
  rep.true_value = truth;
  rep.requested = replicates;
  rep.n_per_replicate = n;
  rep.seed = seed;
  for (auto o : outcome) {
    if (o == kDiscarded) {
      ++rep.discarded;
    } else {
      ++rep.replicates;
      rep.rejections += static_cast<std::uint64_t>(o);
    }
  }
  if (rep.replicates == 0) {
    throw Error(ErrorCode::kDegenerateDistribution,
                "no replicate produced a usable test");
  }
  rep.rejection_rate = static_cast<double>(rep.rejections) / rep.replicates;
  return rep;
}

std::vector<double> StandardizedStatistics(const CellDistribution& dist,
                                           MetricId metric, std::uint64_t n,
                                           std::uint64_t replicates,
                                           std::uint64_t seed,
                                           SimulationOptions options) {
  const double truth = TrueMetricValue(dist, metric);
  std::vector<double> stat(replicates, std::numeric_limits<double>::quiet_NaN());
  ParallelFor(replicates, options.threads, [&](std::uint64_t r) {
    Xoshiro256 rng = Xoshiro256::ForStream(seed, r);
    const CellCounts cells = SampleCells(dist, n, rng);
    try {
      const MetricEstimate est = EstimateMetric(cells, metric);
      if (est.sigma > 0.0) {
        stat[r] = std::sqrt(static_cast<double>(n)) / est.sigma *
                  (est.point - truth);
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateDenominator) throw;
    }
  });
  std::erase_if(stat, [](double v) { return std::isnan(v); });
  return stat;
}

double KsDistanceToNormal(std::vector<double> sample) {
  if (sample.empty()) {
    throw Error(ErrorCode::kEmptyInput, "KS distance of an empty sample");
  }
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = NormalCdf(sample[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

BootstrapResult BootstrapSigmaDetailed(std::span<const AuditRecord> records,
                                       MetricId metric, std::uint64_t resamples,
                                       std::uint64_t seed,
                                       SimulationOptions options) {
  if (resamples < 200) {
    throw Error(ErrorCode::kInvalidArgument, "bootstrap needs >= 200 resamples");
  }
  // Fails early when the metric is not computable on the full sample.
  const CellCounts full = CountCells(records);
  EstimateMetric(full, metric);

  const bool has_labels = full.has_labels();
  std::vector<std::uint8_t> codes;
  codes.reserve(records.size());
  for (const auto& r : records) {
    codes.push_back(CellCode(r.prediction != 0, r.label.value_or(0) != 0,
                             r.group != 0));
  }
  const std::uint64_t n = records.size();
  std::vector<double> points(resamples, std::numeric_limits<double>::quiet_NaN());
  ParallelFor(resamples, options.threads, [&](std::uint64_t b) {
    Xoshiro256 rng = Xoshiro256::ForStream(seed, b);
    std::vector<std::uint8_t> drawn(n);
    for (auto& c : drawn) c = codes[rng.Below(n)];
    kernels::Histogram8 counts{};
    kernels::Tabulate(drawn, counts);
    const CellCounts cells = CellCounts::FromCells(counts, has_labels);
    const MetricEvents ev = EventsFor(metric);
    if (cells.Count(ev.numerator, 1) == 0 || cells.Count(ev.base, 0) == 0 ||
        cells.Count(ev.base, 1) == 0) {
      return;
    }
    points[b] = RatioPhi(PluginMoments(cells, metric));
  });

  BootstrapResult res;
  double sum = 0.0;
  for (double p : points) {
    if (std::isnan(p)) {
      ++res.discarded;
    } else {
      ++res.resamples;
      sum += p;
    }
  }
  if (res.discarded * 10 > resamples) {
    throw Error(ErrorCode::kTooManyDegenerateResamples,
                std::to_string(res.discarded) + " of " +
                    std::to_string(resamples) +
                    " resamples had a zero denominator");
  }
  const double mean = sum / res.resamples;
  double ss = 0.0;
  for (double p : points)
    if (!std::isnan(p)) ss += (p - mean) * (p - mean);
  res.sigma = std::sqrt(ss / (res.resamples - 1)) *
              std::sqrt(static_cast<double>(n));
  return res;
}

double BootstrapSigma(std::span<const AuditRecord> records, MetricId metric,
                      std::uint64_t resamples, std::uint64_t seed) {
  return BootstrapSigmaDetailed(records, metric, resamples, seed).sigma;
}

CovarianceMatrix PrintedConditionalCovariance(const MomentVector& m) {
  const double p0 = m[0], p1 = m[1], r0 = m[2], r1 = m[3];
  return CovarianceMatrix::FromLowerTriangle({
      p0 * (1 - p0),
      -p0 * r1, p1 * (1 - p1),
      p0 * (1 - r0), -p1 * r0, r0 * (1 - r0),
      p0 * r1, p1 * (1 - r1), -r0 * r1, r1 * (1 - r1),
  });
}

CellDistribution ScenarioCells(const ScenarioParameters& params) {
  std::array<double, 8> p{};
  for (int s = 0; s < 2; ++s) {
    const double pi = s == 0 ? params.protected_share : 1.0 - params.protected_share;
    for (int y = 0; y < 2; ++y) {
      const double py = y ? params.prevalence[s] : 1.0 - params.prevalence[s];
      const double rate = y ? params.tpr[s] : params.fpr[s];
      for (int g = 0; g < 2; ++g) {
        p[CellCode(g, y, s)] = pi * py * (g ? rate : 1.0 - rate);
      }
    }
  }
  return CellDistribution::FromCells(p);
}

CellDistribution ScenarioDistribution(MetricId metric, double target) {
  if (!(target > 0.0) || !std::isfinite(target)) {
    throw Error(ErrorCode::kInvalidArgument, "target ratio must be positive");
  }
  ScenarioParameters sp;
  const double q = sp.prevalence[1], tpr = sp.tpr[1], fpr = sp.fpr[1];
  switch (metric) {
    case MetricId::kDia:
      sp.tpr[0] = target * tpr;
      sp.fpr[0] = target * fpr;
      break;
    case MetricId::kDiTrue:
      sp.prevalence[0] = target * q;
      break;
    case MetricId::kCa1:
      sp.tpr[0] = target * tpr;
      break;
    case MetricId::kCa0:
      sp.fpr[0] = 1.0 - target * (1.0 - fpr);
      break;
    case MetricId::kCu1: {
      // Solve q tpr / (q tpr + (1-q) fpr0) = target * ppv1 for fpr0.
      const double ppv0 = target * q * tpr / (q * tpr + (1.0 - q) * fpr);
      sp.fpr[0] = q * tpr * (1.0 - ppv0) / ((1.0 - q) * ppv0);
      break;
    }
    case MetricId::kCu0: {
      const double npv1 =
          (1.0 - q) * (1.0 - fpr) / ((1.0 - q) * (1.0 - fpr) + q * (1.0 - tpr));
      const double npv0 = target * npv1;
      sp.tpr[0] = 1.0 - (1.0 - q) * (1.0 - fpr) * (1.0 - npv0) / (q * npv0);
      break;
    }
  }
  for (int s = 0; s < 2; ++s) {
    for (double r : {sp.prevalence[s], sp.tpr[s], sp.fpr[s]}) {
      if (!(r > 0.0 && r < 1.0)) {
        throw Error(ErrorCode::kInvalidArgument,
                    "target " + std::to_string(target) + " unreachable for " +
                        std::string(MetricName(metric)));
      }
    }
  }
  return ScenarioCells(sp);
}

CellDistribution RandomCellDistribution(Xoshiro256& rng) {
  std::array<double, 8> w{};
  double total = 0.0;
  for (auto& v : w) {
    v = 0.02 + rng.Uniform();
    total += v;
  }
  for (auto& v : w) v /= total;
  // Put the rounding residue on the largest cell so the sum is 1 to 1 ulp.
  double sum = 0.0;
  for (double v : w) sum += v;
  *std::max_element(w.begin(), w.end()) += 1.0 - sum;
  return CellDistribution::FromCells(w);
}

AdjudicationReport AdjudicateMatrix(MetricId metric, std::uint64_t trials,
                                    std::uint64_t seed) {
  if (metric == MetricId::kDia || metric == MetricId::kDiTrue) {
    throw Error(ErrorCode::kInvalidArgument,
                "adjudication covers CA1, CA0, CU1 and CU0 only");
  }
  AdjudicationReport rep;
  rep.metric = metric;
  rep.trials = trials;
  rep.seed = seed;
  for (std::uint64_t t = 0; t < trials; ++t) {
    Xoshiro256 rng = Xoshiro256::ForStream(seed, t);
    const ExactMoments exact =
        ComputeExactMoments(RandomCellDistribution(rng), metric);
    const CovarianceMatrix corrected = NestedEventCovariance(exact.mean);
    const CovarianceMatrix printed = PrintedConditionalCovariance(exact.mean);
    rep.max_deviation_corrected = std::max(
        rep.max_deviation_corrected, corrected.MaxAbsDifference(exact.covariance));
    rep.max_deviation_printed = std::max(
        rep.max_deviation_printed, printed.MaxAbsDifference(exact.covariance));
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        rep.printed_entry_deviation[i][j] =
            std::max(rep.printed_entry_deviation[i][j],
                     std::fabs(printed(i, j) - exact.covariance(i, j)));
      }
    }
  }
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j <= i; ++j) {
      if (rep.printed_entry_deviation[i][j] > kDeviationTolerance) {
        rep.printed_deviating_entries.emplace_back(i + 1, j + 1);
      }
    }
  }
  return rep;
}

}  // namespace fairci
