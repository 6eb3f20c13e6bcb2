#include "tieeval/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "tieeval/errors.hpp"
#include "tieeval/parallel.hpp"

namespace tieeval {

std::size_t Query::total_relevant() const {
  std::size_t n = missing_relevant;
  for (const ScoredCandidate& c : candidates) n += c.relevant ? 1 : 0;
  return n;
}

void validate_cutoffs(const std::vector<std::size_t>& cutoffs) {
  if (cutoffs.empty()) throw ConstraintError("at least one cutoff is required");
  for (std::size_t i = 0; i < cutoffs.size(); ++i) {
    if (cutoffs[i] < 1) throw ConstraintError("cutoffs must be >= 1");
    if (i > 0 && cutoffs[i] <= cutoffs[i - 1]) {
      throw ConstraintError("cutoffs must be strictly increasing");
    }
  }
}

EvaluationReport evaluate(const std::vector<Query>& queries, const EvaluationOptions& options,
                          std::string label) {
  if (options.metrics.empty()) throw ConstraintError("at least one metric is required");
  validate_cutoffs(options.cutoffs);

  std::vector<const Query*> kept;
  std::set<std::string> seen;
  EvaluationReport out;
  out.label = std::move(label);
  for (const Query& q : queries) {
    if (!seen.insert(q.id).second) throw ConstraintError("duplicate query id '" + q.id + "'");
    if (q.candidates.empty() || q.total_relevant() == 0) {
      ++out.diagnostics.queries_skipped_no_relevant;
      continue;
    }
    kept.push_back(&q);
    out.diagnostics.missing_relevant += q.missing_relevant;
  }
  if (kept.empty()) {
    throw ConstraintError("no query has a relevant document (" +
                          std::to_string(out.diagnostics.queries_skipped_no_relevant) +
                          " skipped)");
  }
  out.diagnostics.queries_evaluated = kept.size();

  struct Outcome {
    std::vector<MetricReport> reports;
    bool oracle_checked = false;
  };
  std::vector<Outcome> outcomes(kept.size());

  parallel_for(kept.size(), options.workers, [&](std::size_t i) {
    const Query& q = *kept[i];
    Outcome& o = outcomes[i];
    o.reports = report_all(q.candidates, options.metrics, options.cutoffs, q.missing_relevant);
    if (!options.oracle_check) return;

    const TieProfile profile = group_ties(q.candidates, q.missing_relevant);
    if (configuration_count(profile) > options.budget.max_configurations) return;
    const auto truth = enumerate_metrics(profile, options.metrics, options.cutoffs, options.budget);
    for (std::size_t s = 0; s < truth.size(); ++s) {
      const MetricReport& r = o.reports[s];
      const EnumerationResult& t = truth[s];
      const double worst = std::max({std::fabs(r.expected - t.mean),
                                     std::fabs(r.minimum - t.minimum),
                                     std::fabs(r.maximum - t.maximum)});
      if (!(worst <= options.oracle_tolerance)) {
        throw OracleMismatch("query " + q.id + ": " + std::string(to_string(r.metric)) + "@" +
                             std::to_string(r.k) + " closed form (" + std::to_string(r.expected) +
                             ") disagrees with enumeration (" + std::to_string(t.mean) + ")");
      }
    }
    o.oracle_checked = true;
  });

  for (const Outcome& o : outcomes) {
    if (options.oracle_check) {
      ++(o.oracle_checked ? out.diagnostics.oracle_checked : out.diagnostics.oracle_skipped);
    }
  }

  const std::size_t slots = options.metrics.size() * options.cutoffs.size();
  out.results.reserve(slots);
  for (std::size_t s = 0; s < slots; ++s) {
    std::vector<QueryReport> per_query;
    per_query.reserve(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) {
      per_query.push_back({kept[i]->id, outcomes[i].reports[s]});
    }
    out.results.push_back(aggregate(std::move(per_query)));
  }
  return out;
}

}  // namespace tieeval
