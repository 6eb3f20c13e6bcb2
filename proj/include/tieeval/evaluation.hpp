#pragma once

// Corpus-level evaluation: per-query reports for every (metric, k),
// aggregated in canonical query order.

#include <cstddef>
#include <string>
#include <vector>

#include "tieeval/metrics.hpp"
#include "tieeval/oracle.hpp"
#include "tieeval/ties.hpp"

namespace tieeval {

struct Query {
  std::string id;
  std::vector<ScoredCandidate> candidates;
  std::size_t missing_relevant = 0;  // judged relevant, not among the candidates

  std::size_t total_relevant() const;
};

struct Diagnostics {
  std::size_t queries_evaluated = 0;
  std::size_t queries_skipped_no_relevant = 0;
  std::size_t missing_relevant = 0;
  std::size_t oracle_checked = 0;
  std::size_t oracle_skipped = 0;

  friend bool operator==(const Diagnostics&, const Diagnostics&) = default;
};

struct EvaluationOptions {
  std::vector<MetricKind> metrics;
  std::vector<std::size_t> cutoffs;
  unsigned workers = 1;
  bool oracle_check = false;
  EnumerationBudget budget;
  double oracle_tolerance = 1e-9;
};

struct EvaluationReport {
  std::string label;
  std::vector<AggregateReport> results;  // metric-major, cutoffs ascending
  Diagnostics diagnostics;

  friend bool operator==(const EvaluationReport&, const EvaluationReport&) = default;
};

/// Throws ConstraintError for bad options or when no query has a relevant
/// item, OracleMismatch when the oracle check fails. Queries without
/// relevant items are skipped and counted.
EvaluationReport evaluate(const std::vector<Query>& queries, const EvaluationOptions& options,
                          std::string label);

/// Cutoffs must be >= 1 and strictly increasing.
void validate_cutoffs(const std::vector<std::size_t>& cutoffs);

}  // namespace tieeval
