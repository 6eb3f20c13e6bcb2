#pragma once

// Shared test helpers: seeded instance generators and reference
// implementations written independently of the library code.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "tieeval/metrics.hpp"
#include "tieeval/ties.hpp"

namespace tieeval::testing {

/// Candidates whose scores form tie groups of the given sizes, in a random
/// file order. Labels are random unless every group would be unlabelled.
inline std::vector<ScoredCandidate> random_tied_list(std::mt19937_64& rng, std::size_t max_len,
                                                     std::size_t max_group) {
  std::uniform_int_distribution<std::size_t> len_dist(1, max_len);
  const std::size_t len = len_dist(rng);
  std::vector<std::size_t> sizes;
  for (std::size_t used = 0; used < len;) {
    std::uniform_int_distribution<std::size_t> g(1, std::min(max_group, len - used));
    sizes.push_back(g(rng));
    used += sizes.back();
  }
  std::vector<ScoredCandidate> out;
  std::bernoulli_distribution coin(0.4);
  for (std::size_t n = 0; n < sizes.size(); ++n) {
    const double score = 1.0 - 0.01 * static_cast<double>(n);
    for (std::size_t j = 0; j < sizes[n]; ++j) {
      out.push_back({"d" + std::to_string(out.size()), score, coin(rng), 0});
    }
  }
  std::shuffle(out.begin(), out.end(), rng);
  for (std::size_t i = 0; i < out.size(); ++i) out[i].original_index = i;
  return out;
}

/// All-distinct scores in random order.
inline std::vector<ScoredCandidate> random_distinct_list(std::mt19937_64& rng, std::size_t len) {
  std::vector<ScoredCandidate> out;
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::bernoulli_distribution coin(0.3);
  std::vector<double> used;
  while (out.size() < len) {
    const double s = u(rng);
    if (std::find(used.begin(), used.end(), s) != used.end()) continue;
    used.push_back(s);
    out.push_back({"d" + std::to_string(out.size()), s, coin(rng), out.size()});
  }
  if (std::none_of(out.begin(), out.end(), [](const auto& c) { return c.relevant; })) {
    out.front().relevant = true;
  }
  return out;
}

/// Textbook metric definitions on a ranked 0/1 list.
inline double naive_metric(const std::vector<int>& rel, MetricKind m, std::size_t k,
                           std::size_t n_plus) {
  const std::size_t depth = std::min(k, rel.size());
  double hits = 0, dcg = 0, rr = 0, ap = 0;
  for (std::size_t i = 0; i < depth; ++i) {
    if (!rel[i]) continue;
    hits += 1;
    dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    if (rr == 0) rr = 1.0 / static_cast<double>(i + 1);
    ap += hits / static_cast<double>(i + 1);
  }
  double idcg = 0;
  for (std::size_t i = 0; i < std::min(k, n_plus); ++i) idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  const double kd = static_cast<double>(k);
  const double np = static_cast<double>(n_plus);
  switch (m) {
    case MetricKind::kHits: return hits;
    case MetricKind::kPrecision: return hits / kd;
    case MetricKind::kRecall: return hits / np;
    case MetricKind::kF1: return 2.0 * hits / (kd + np);
    case MetricKind::kNDCG: return dcg / idcg;
    case MetricKind::kRR: return rr;
    case MetricKind::kAP: return ap / np;
  }
  return 0;
}

struct BruteForce {
  double mean = 0, minimum = 0, maximum = 0;
  std::size_t orderings = 0;
};

/// Every within-group permutation of a candidate list (not just label
/// placements), scored with naive_metric. Only for tiny groups.
inline BruteForce brute_force(std::vector<ScoredCandidate> items, MetricKind m, std::size_t k,
                              std::size_t missing = 0) {
  std::stable_sort(items.begin(), items.end(),
                   [](const auto& a, const auto& b) { return a.score > b.score; });
  std::vector<std::pair<std::size_t, std::size_t>> groups;  // [begin, end)
  for (std::size_t i = 0; i < items.size();) {
    std::size_t j = i;
    while (j < items.size() && items[j].score == items[i].score) ++j;
    groups.emplace_back(i, j);
    i = j;
  }
  std::size_t n_plus = missing;
  for (const auto& c : items) n_plus += c.relevant ? 1 : 0;

  std::vector<std::size_t> perm(items.size());
  std::iota(perm.begin(), perm.end(), 0);
  BruteForce out;
  out.minimum = INFINITY;
  out.maximum = -INFINITY;
  long double total = 0;
  while (true) {
    std::vector<int> rel;
    for (std::size_t p : perm) rel.push_back(items[p].relevant ? 1 : 0);
    const double v = naive_metric(rel, m, k, n_plus);
    total += v;
    out.minimum = std::min(out.minimum, v);
    out.maximum = std::max(out.maximum, v);
    ++out.orderings;
    // Odometer over the groups' permutations.
    std::size_t g = 0;
    for (; g < groups.size(); ++g) {
      auto b = perm.begin() + static_cast<std::ptrdiff_t>(groups[g].first);
      auto e = perm.begin() + static_cast<std::ptrdiff_t>(groups[g].second);
      if (std::next_permutation(b, e)) break;
    }
    if (g == groups.size()) break;
  }
  out.mean = static_cast<double>(total / static_cast<long double>(out.orderings));
  return out;
}

inline std::size_t relevant_count(const std::vector<ScoredCandidate>& items) {
  return static_cast<std::size_t>(
      std::count_if(items.begin(), items.end(), [](const auto& c) { return c.relevant; }));
}

}  // namespace tieeval::testing
