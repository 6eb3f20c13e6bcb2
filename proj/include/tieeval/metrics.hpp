#pragma once

// Tie-oblivious and tie-aware ranking metrics with binary relevance.
//
// For every metric M at cutoff k a report carries the value under the fixed
// (index-preserving) tie order, the exact expectation over all orderings
// within tie groups, the best and worst achievable values, their range, and
// the bias of the fixed order against the expectation.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tieeval/ties.hpp"

namespace tieeval {

enum class MetricKind { kHits, kPrecision, kRecall, kF1, kNDCG, kRR, kAP };

inline constexpr MetricKind kAllMetrics[] = {MetricKind::kHits, MetricKind::kPrecision,
                                             MetricKind::kRecall, MetricKind::kF1,
                                             MetricKind::kNDCG, MetricKind::kRR,
                                             MetricKind::kAP};

std::string_view to_string(MetricKind metric);
/// Accepts the canonical names plus "mrr" and "map".
MetricKind parse_metric(std::string_view text);

/// Discount of rank r (1-based): 1 / log2(r + 1).
double rank_weight(std::size_t rank);

/// Deterministic metric of a ranking given as relevance flags in rank order.
/// `total_relevant` (N+) may exceed the number of flags set.
double metric_at(std::span<const std::uint8_t> ranked_relevance, MetricKind metric, std::size_t k,
                 std::size_t total_relevant);

/// Metric under the stable order: descending score, ascending original_index.
double oblivious_metric(std::span<const ScoredCandidate> candidates, MetricKind metric,
                        std::size_t k, std::size_t missing_relevant = 0);

/// Hits, Precision, Recall or F1 in expectation over tie orderings.
double expected_count_metric(const TieProfile& profile, std::size_t k, MetricKind kind);
double expected_ndcg(const TieProfile& profile, std::size_t k);
double expected_rr(const TieProfile& profile, std::size_t k);
double expected_ap(const TieProfile& profile, std::size_t k);
double expected_metric(const TieProfile& profile, MetricKind metric, std::size_t k);

struct Extrema {
  double minimum = 0.0;
  double maximum = 0.0;
};

/// Relevant-last / relevant-first ordering inside every tie group.
Extrema extrema(const TieProfile& profile, MetricKind metric, std::size_t k);

struct MetricReport {
  MetricKind metric = MetricKind::kNDCG;
  std::size_t k = 1;
  double oblivious = 0.0;
  double expected = 0.0;
  double maximum = 0.0;
  double minimum = 0.0;
  double range = 0.0;
  double bias = 0.0;

  friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

MetricReport report(std::span<const ScoredCandidate> candidates, MetricKind metric, std::size_t k,
                    std::size_t missing_relevant = 0);

/// Reports for every (metric, k) pair, metric-major. The candidate list is
/// sorted and scanned once. With `presorted` the input must already be in
/// oblivious order (descending score, ascending original_index); this is
/// checked in the same scan.
std::vector<MetricReport> report_all(std::span<const ScoredCandidate> candidates,
                                     std::span<const MetricKind> metrics,
                                     std::span<const std::size_t> cutoffs,
                                     std::size_t missing_relevant = 0, bool presorted = false);

struct QueryReport {
  std::string query_id;
  MetricReport report;

  friend bool operator==(const QueryReport&, const QueryReport&) = default;
};

/// Per-query reports for one (metric, k) and their means. `mean.range` is the
/// mean of per-query ranges; `range_of_means` is mean.maximum - mean.minimum.
struct AggregateReport {
  MetricKind metric = MetricKind::kNDCG;
  std::size_t k = 1;
  std::vector<QueryReport> per_query;  // sorted by query_id
  MetricReport mean;
  double range_of_means = 0.0;

  friend bool operator==(const AggregateReport&, const AggregateReport&) = default;
};

/// Throws ConstraintError on empty input or mixed (metric, k).
AggregateReport aggregate(std::vector<QueryReport> reports);

/// Pairwise summation; the result depends only on the order of `values`.
double pairwise_sum(std::span<const double> values);

}  // namespace tieeval
