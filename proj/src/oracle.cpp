#include "tieeval/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tieeval/errors.hpp"

namespace tieeval {
namespace {

// Straight from the textbook definitions; kept separate from metric_at.
double reference_metric(const std::vector<std::uint8_t>& ranking, MetricKind metric, std::size_t k,
                        std::size_t total_relevant) {
  const std::size_t depth = std::min(k, ranking.size());
  const auto n_rel = static_cast<double>(total_relevant);
  switch (metric) {
    case MetricKind::kHits:
    case MetricKind::kPrecision:
    case MetricKind::kRecall:
    case MetricKind::kF1: {
      const auto hits = static_cast<double>(
          std::count(ranking.begin(), ranking.begin() + static_cast<std::ptrdiff_t>(depth), 1));
      if (metric == MetricKind::kHits) return hits;
      if (metric == MetricKind::kPrecision) return hits / static_cast<double>(k);
      if (metric == MetricKind::kRecall) return hits / n_rel;
      return 2.0 * hits / (static_cast<double>(k) + n_rel);
    }
    case MetricKind::kNDCG: {
      double dcg = 0.0;
      for (std::size_t pos = 0; pos < depth; ++pos) {
        if (ranking[pos]) dcg += 1.0 / std::log2(static_cast<double>(pos + 2));
      }
      double ideal = 0.0;
      for (std::size_t pos = 0; pos < std::min(k, total_relevant); ++pos) {
        ideal += 1.0 / std::log2(static_cast<double>(pos + 2));
      }
      return dcg / ideal;
    }
    case MetricKind::kRR:
      for (std::size_t pos = 0; pos < depth; ++pos) {
        if (ranking[pos]) return 1.0 / static_cast<double>(pos + 1);
      }
      return 0.0;
    case MetricKind::kAP: {
      double sum = 0.0;
      std::size_t seen = 0;
      for (std::size_t pos = 0; pos < depth; ++pos) {
        if (!ranking[pos]) continue;
        ++seen;
        sum += static_cast<double>(seen) / static_cast<double>(pos + 1);
      }
      return sum / n_rel;
    }
  }
  return 0.0;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t r) {
  r = std::min(r, n - r);
  std::uint64_t result = 1;
  for (std::uint64_t i = 1; i <= r; ++i) {
    const std::uint64_t numerator = n - r + i;
    if (result > std::numeric_limits<std::uint64_t>::max() / numerator) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    result = result * numerator / i;
  }
  return result;
}

// Neumaier-compensated running sum.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double v) {
    const double t = sum + v;
    if (std::fabs(sum) >= std::fabs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + carry; }
};

}  // namespace

std::uint64_t configuration_count(const TieProfile& profile) {
  std::uint64_t total = 1;
  for (const TieGroup& g : profile.groups) {
    const std::uint64_t c = binomial(g.size, g.relevant_count);
    if (c != 0 && total > std::numeric_limits<std::uint64_t>::max() / c) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    total *= c;
  }
  return total;
}

EnumerationResult enumerate_metric(const TieProfile& profile, MetricKind metric, std::size_t k,
                                   EnumerationBudget budget) {
  const MetricKind metrics[] = {metric};
  const std::size_t cutoffs[] = {k};
  return enumerate_metrics(profile, metrics, cutoffs, budget).front();
}

std::vector<EnumerationResult> enumerate_metrics(const TieProfile& profile,
                                                 std::span<const MetricKind> metrics,
                                                 std::span<const std::size_t> cutoffs,
                                                 EnumerationBudget budget) {
  if (budget.max_configurations < 1) throw ConstraintError("enumeration budget must be >= 1");
  for (std::size_t k : cutoffs) {
    if (k < 1) throw ConstraintError("cutoff k must be >= 1");
  }
  const std::uint64_t total = configuration_count(profile);
  if (total > budget.max_configurations) {
    throw BudgetExceeded("instance has " + std::to_string(total) +
                         " relevance placements, budget is " +
                         std::to_string(budget.max_configurations));
  }

  // One label pattern per group, starting from the lexicographically
  // smallest arrangement (non-relevant first).
  std::vector<std::vector<std::uint8_t>> patterns;
  patterns.reserve(profile.groups.size());
  for (const TieGroup& g : profile.groups) {
    std::vector<std::uint8_t> p(g.size, 0);
    std::fill(p.end() - static_cast<std::ptrdiff_t>(g.relevant_count), p.end(), 1);
    patterns.push_back(std::move(p));
  }

  const std::size_t slots = metrics.size() * cutoffs.size();
  std::vector<CompensatedSum> sums(slots);
  std::vector<double> lo(slots, std::numeric_limits<double>::infinity());
  std::vector<double> hi(slots, -std::numeric_limits<double>::infinity());
  std::vector<std::uint8_t> ranking;
  ranking.reserve(profile.total_items);
  std::uint64_t count = 0;

  while (true) {
    ranking.clear();
    for (const auto& p : patterns) ranking.insert(ranking.end(), p.begin(), p.end());
    std::size_t slot = 0;
    for (MetricKind metric : metrics) {
      for (std::size_t k : cutoffs) {
        const double v = reference_metric(ranking, metric, k, profile.total_relevant);
        sums[slot].add(v);
        lo[slot] = std::min(lo[slot], v);
        hi[slot] = std::max(hi[slot], v);
        ++slot;
      }
    }
    ++count;

    // Odometer over groups; next_permutation wraps to the first arrangement
    // when it returns false.
    std::size_t g = 0;
    while (g < patterns.size() && !std::next_permutation(patterns[g].begin(), patterns[g].end())) {
      ++g;
    }
    if (g == patterns.size()) break;
  }

  std::vector<EnumerationResult> out(slots);
  for (std::size_t s = 0; s < slots; ++s) {
    out[s] = {sums[s].value() / static_cast<double>(count), lo[s], hi[s], count};
  }
  return out;
}

}  // namespace tieeval
