#pragma once

// Exhaustive reference for tie-aware metrics. Items inside a tie group are
// exchangeable given their binary labels, so enumerating the distinct
// placements of relevant items per group (Π C(|G_n|, r_n) configurations,
// uniformly weighted) yields the same distribution as enumerating every
// within-group permutation.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tieeval/metrics.hpp"
#include "tieeval/ties.hpp"

namespace tieeval {

struct EnumerationBudget {
  std::uint64_t max_configurations = 1'000'000;
};

struct EnumerationResult {
  double mean = 0.0;
  double minimum = 0.0;
  double maximum = 0.0;
  std::uint64_t count = 0;
};

/// Π C(|G_n|, r_n), saturating at UINT64_MAX.
std::uint64_t configuration_count(const TieProfile& profile);

/// Throws BudgetExceeded when configuration_count exceeds the budget.
EnumerationResult enumerate_metric(const TieProfile& profile, MetricKind metric, std::size_t k,
                                   EnumerationBudget budget = {});

/// One pass over the configurations for several (metric, k) pairs;
/// results are metric-major like report_all.
std::vector<EnumerationResult> enumerate_metrics(const TieProfile& profile,
                                                 std::span<const MetricKind> metrics,
                                                 std::span<const std::size_t> cutoffs,
                                                 EnumerationBudget budget = {});

}  // namespace tieeval
