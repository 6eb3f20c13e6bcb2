#include "tieeval/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "tieeval/errors.hpp"

namespace tieeval {
namespace {

void require_cutoff(std::size_t k) {
  if (k < 1) throw ConstraintError("cutoff k must be >= 1");
}

void require_relevant(std::size_t total_relevant, MetricKind metric) {
  if (total_relevant == 0) {
    throw ConstraintError(std::string(to_string(metric)) + " needs at least one relevant item");
  }
}

bool needs_relevant(MetricKind metric) {
  return metric == MetricKind::kRecall || metric == MetricKind::kF1 ||
         metric == MetricKind::kNDCG || metric == MetricKind::kAP;
}

double ideal_dcg(std::size_t total_relevant, std::size_t k) {
  double idcg = 0.0;
  const std::size_t depth = std::min(total_relevant, k);
  for (std::size_t r = 1; r <= depth; ++r) idcg += rank_weight(r);
  return idcg;
}

// Σ_n r_n t_n / |G_n| over the groups that reach into the top k.
// Expected hits as the exact fraction numerator / denominator. At most one
// group straddles k, so the denominator is that group's size (or 1).
struct HitsFraction {
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 1;
  std::size_t full = 0;  // relevant items in groups entirely inside the top k
  const TieGroup* straddling = nullptr;
  std::size_t taken = 0;
};

HitsFraction expected_hits(const TieProfile& profile, std::size_t k) {
  HitsFraction f;
  for (std::size_t n = 0; n < profile.groups.size(); ++n) {
    const std::size_t before = profile.cumulative[n];
    if (k <= before) break;
    const TieGroup& g = profile.groups[n];
    if (k - before >= g.size) {
      f.full += g.relevant_count;
      continue;
    }
    f.straddling = &g;
    f.taken = k - before;
    break;
  }
  if (f.straddling == nullptr) {
    f.numerator = f.full;
    return f;
  }
  f.denominator = f.straddling->size;
  f.numerator = f.full * f.denominator + f.straddling->relevant_count * f.taken;
  return f;
}

// Hits under relevant-last and relevant-first placement.
std::pair<std::size_t, std::size_t> hit_extrema(const HitsFraction& f) {
  if (f.straddling == nullptr) return {f.full, f.full};
  const TieGroup& g = *f.straddling;
  const std::size_t others = g.size - g.relevant_count;
  const std::size_t low = f.taken > others ? f.taken - others : 0;
  return {f.full + low, f.full + std::min(g.relevant_count, f.taken)};
}

bool is_count_metric(MetricKind m) {
  return m == MetricKind::kHits || m == MetricKind::kPrecision || m == MetricKind::kRecall ||
         m == MetricKind::kF1;
}

// numerator / (denominator * D) with D the metric's normaliser, in one division.
double count_metric_value(std::uint64_t numerator, std::uint64_t denominator, MetricKind kind,
                          std::size_t k, std::size_t total_relevant) {
  switch (kind) {
    case MetricKind::kHits:
      return static_cast<double>(numerator) / static_cast<double>(denominator);
    case MetricKind::kPrecision:
      return static_cast<double>(numerator) / static_cast<double>(denominator * k);
    case MetricKind::kRecall:
      return static_cast<double>(numerator) / static_cast<double>(denominator * total_relevant);
    case MetricKind::kF1:
      return static_cast<double>(2 * numerator) /
             static_cast<double>(denominator * (k + total_relevant));
    default:
      throw ConstraintError(std::string(to_string(kind)) + " is not a count-based metric");
  }
}

// Relevance flags of the top-k under relevant-first (or relevant-last)
// placement inside every group.
std::vector<std::uint8_t> extreme_ranking(const TieProfile& profile, std::size_t k,
                                          bool relevant_first) {
  const std::size_t depth = std::min(k, profile.total_items);
  std::vector<std::uint8_t> flags;
  flags.reserve(depth);
  for (const TieGroup& g : profile.groups) {
    if (flags.size() >= depth) break;
    const std::size_t relevant = g.relevant_count;
    const std::size_t other = g.size - relevant;
    const std::size_t first_run = relevant_first ? relevant : other;
    for (std::size_t i = 0; i < g.size && flags.size() < depth; ++i) {
      const bool in_first = i < first_run;
      flags.push_back(static_cast<std::uint8_t>(in_first == relevant_first));
    }
  }
  return flags;
}

std::string lowercase(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string_view to_string(MetricKind metric) {
  switch (metric) {
    case MetricKind::kHits:
      return "hits";
    case MetricKind::kPrecision:
      return "precision";
    case MetricKind::kRecall:
      return "recall";
    case MetricKind::kF1:
      return "f1";
    case MetricKind::kNDCG:
      return "ndcg";
    case MetricKind::kRR:
      return "rr";
    case MetricKind::kAP:
      return "ap";
  }
  return "unknown";
}

MetricKind parse_metric(std::string_view text) {
  const std::string name = lowercase(text);
  if (name == "hits") return MetricKind::kHits;
  if (name == "precision" || name == "p") return MetricKind::kPrecision;
  if (name == "recall" || name == "r") return MetricKind::kRecall;
  if (name == "f1") return MetricKind::kF1;
  if (name == "ndcg") return MetricKind::kNDCG;
  if (name == "rr" || name == "mrr") return MetricKind::kRR;
  if (name == "ap" || name == "map") return MetricKind::kAP;
  throw ConstraintError("unknown metric '" + std::string(text) + "'");
}

double rank_weight(std::size_t rank) { return 1.0 / std::log2(static_cast<double>(rank) + 1.0); }

double metric_at(std::span<const std::uint8_t> ranked_relevance, MetricKind metric, std::size_t k,
                 std::size_t total_relevant) {
  require_cutoff(k);
  if (needs_relevant(metric)) require_relevant(total_relevant, metric);

  const std::size_t depth = std::min(k, ranked_relevance.size());
  std::size_t hits = 0;
  double dcg = 0.0;
  double reciprocal_rank = 0.0;
  double precision_sum = 0.0;
  for (std::size_t i = 0; i < depth; ++i) {
    if (!ranked_relevance[i]) continue;
    const std::size_t rank = i + 1;
    ++hits;
    dcg += rank_weight(rank);
    if (reciprocal_rank == 0.0) reciprocal_rank = 1.0 / static_cast<double>(rank);
    precision_sum += static_cast<double>(hits) / static_cast<double>(rank);
  }

  const auto h = static_cast<double>(hits);
  const auto n_rel = static_cast<double>(total_relevant);
  switch (metric) {
    case MetricKind::kHits:
      return h;
    case MetricKind::kPrecision:
      return h / static_cast<double>(k);
    case MetricKind::kRecall:
      return h / n_rel;
    case MetricKind::kF1:
      return 2.0 * h / (static_cast<double>(k) + n_rel);
    case MetricKind::kNDCG:
      return dcg / ideal_dcg(total_relevant, k);
    case MetricKind::kRR:
      return reciprocal_rank;
    case MetricKind::kAP:
      return precision_sum / n_rel;
  }
  return 0.0;
}

double oblivious_metric(std::span<const ScoredCandidate> candidates, MetricKind metric,
                        std::size_t k, std::size_t missing_relevant) {
  require_cutoff(k);
  if (candidates.empty()) throw ConstraintError("empty candidate list");
  std::vector<ScoredCandidate> ordered(candidates.begin(), candidates.end());
  sort_candidates(ordered);
  std::vector<std::uint8_t> flags;
  flags.reserve(ordered.size());
  std::size_t total_relevant = missing_relevant;
  for (const ScoredCandidate& c : ordered) {
    if (!std::isfinite(c.score)) throw ConstraintError("candidate score must be finite");
    flags.push_back(c.relevant ? 1 : 0);
    total_relevant += c.relevant ? 1 : 0;
  }
  require_relevant(total_relevant, metric);
  return metric_at(flags, metric, k, total_relevant);
}

double expected_count_metric(const TieProfile& profile, std::size_t k, MetricKind kind) {
  require_cutoff(k);
  if (kind == MetricKind::kRecall || kind == MetricKind::kF1) {
    require_relevant(profile.total_relevant, kind);
  }
  const HitsFraction f = expected_hits(profile, k);
  return count_metric_value(f.numerator, f.denominator, kind, k, profile.total_relevant);
}

double expected_ndcg(const TieProfile& profile, std::size_t k) {
  require_cutoff(k);
  require_relevant(profile.total_relevant, MetricKind::kNDCG);
  // Σ_n p_n W(c_{n-1}+1, c_{n-1}+t_n), accumulated rank by rank.
  double dcg = 0.0;
  for (std::size_t n = 0; n < profile.groups.size(); ++n) {
    const std::size_t before = profile.cumulative[n];
    if (k <= before) break;
    const TieGroup& g = profile.groups[n];
    if (g.relevant_count == 0) continue;
    const double p = g.relevance_probability();
    const std::size_t taken = std::min(g.size, k - before);
    for (std::size_t rank = before + 1; rank <= before + taken; ++rank) dcg += p * rank_weight(rank);
  }
  return dcg / ideal_dcg(profile.total_relevant, k);
}

double expected_rr(const TieProfile& profile, std::size_t k) {
  require_cutoff(k);
  std::size_t first = profile.groups.size();
  for (std::size_t n = 0; n < profile.groups.size(); ++n) {
    if (profile.groups[n].relevant_count > 0) {
      first = n;
      break;
    }
  }
  if (first == profile.groups.size()) return 0.0;
  const std::size_t before = profile.cumulative[first];
  if (k <= before) return 0.0;

  const TieGroup& g = profile.groups[first];
  const std::size_t last_t = std::min(g.size - 1, k - before - 1);
  const auto size = static_cast<double>(g.size);
  const auto relevant = static_cast<double>(g.relevant_count);
  // all_irrelevant = C(|G|-r, t) / C(|G|, t): the first t slots hold no relevant item.
  double all_irrelevant = 1.0;
  double expected = 0.0;
  for (std::size_t t = 0; t <= last_t; ++t) {
    const auto td = static_cast<double>(t);
    const double next_relevant = relevant / (size - td);
    expected += (1.0 / static_cast<double>(before + t + 1)) * all_irrelevant * next_relevant;
    all_irrelevant *= (size - relevant - td) / (size - td);
    if (all_irrelevant <= 0.0) break;
  }
  return expected;
}

double expected_ap(const TieProfile& profile, std::size_t k) {
  require_cutoff(k);
  require_relevant(profile.total_relevant, MetricKind::kAP);
  double sum = 0.0;
  std::size_t relevant_before = 0;
  for (std::size_t n = 0; n < profile.groups.size(); ++n) {
    const std::size_t before = profile.cumulative[n];
    if (k <= before) break;
    const TieGroup& g = profile.groups[n];
    if (g.relevant_count > 0) {
      const double p = g.relevance_probability();
      // Expected relevant items among the t earlier slots of the group, per slot.
      const double others =
          g.size > 1 ? static_cast<double>(g.relevant_count - 1) / static_cast<double>(g.size - 1)
                     : 0.0;
      const std::size_t taken = std::min(g.size, k - before);
      for (std::size_t t = 0; t < taken; ++t) {
        const double hits_so_far =
            static_cast<double>(relevant_before) + 1.0 + static_cast<double>(t) * others;
        const auto rank = static_cast<double>(before + t + 1);
        sum += p * (hits_so_far / rank);
      }
    }
    relevant_before += g.relevant_count;
  }
  return sum / static_cast<double>(profile.total_relevant);
}

double expected_metric(const TieProfile& profile, MetricKind metric, std::size_t k) {
  switch (metric) {
    case MetricKind::kHits:
    case MetricKind::kPrecision:
    case MetricKind::kRecall:
    case MetricKind::kF1:
      return expected_count_metric(profile, k, metric);
    case MetricKind::kNDCG:
      return expected_ndcg(profile, k);
    case MetricKind::kRR:
      return expected_rr(profile, k);
    case MetricKind::kAP:
      return expected_ap(profile, k);
  }
  return 0.0;
}

Extrema extrema(const TieProfile& profile, MetricKind metric, std::size_t k) {
  require_cutoff(k);
  const auto best = extreme_ranking(profile, k, true);
  const auto worst = extreme_ranking(profile, k, false);
  return {metric_at(worst, metric, k, profile.total_relevant),
          metric_at(best, metric, k, profile.total_relevant)};
}

MetricReport report(std::span<const ScoredCandidate> candidates, MetricKind metric, std::size_t k,
                    std::size_t missing_relevant) {
  const MetricKind metrics[] = {metric};
  const std::size_t cutoffs[] = {k};
  return report_all(candidates, metrics, cutoffs, missing_relevant).front();
}

std::vector<MetricReport> report_all(std::span<const ScoredCandidate> candidates,
                                     std::span<const MetricKind> metrics,
                                     std::span<const std::size_t> cutoffs,
                                     std::size_t missing_relevant, bool presorted) {
  if (candidates.empty()) throw ConstraintError("empty candidate list");
  for (std::size_t k : cutoffs) require_cutoff(k);

  std::vector<ScoredCandidate> sorted_copy;
  std::span<const ScoredCandidate> ordered = candidates;
  if (!presorted) {
    sorted_copy.assign(candidates.begin(), candidates.end());
    sort_candidates(sorted_copy);
    ordered = sorted_copy;
  }

  const TieProfile profile = group_sorted(ordered, missing_relevant);
  if (profile.total_relevant == 0) {
    throw ConstraintError("query has no relevant items");
  }

  std::size_t max_k = 0;
  for (std::size_t k : cutoffs) max_k = std::max(max_k, k);
  const std::size_t depth = std::min(max_k, ordered.size());
  std::vector<std::uint8_t> flags(depth);
  for (std::size_t i = 0; i < depth; ++i) flags[i] = ordered[i].relevant ? 1 : 0;
  if (presorted) {
    for (std::size_t i = 1; i < ordered.size(); ++i) {
      if (ordered[i - 1].original_index >= ordered[i].original_index &&
          same_score(ordered[i - 1].score, ordered[i].score)) {
        throw ConstraintError("presorted candidates must break ties by ascending original_index");
      }
    }
  }

  std::vector<MetricReport> out;
  out.reserve(metrics.size() * cutoffs.size());
  for (MetricKind metric : metrics) {
    for (std::size_t k : cutoffs) {
      MetricReport r;
      r.metric = metric;
      r.k = k;
      r.oblivious = metric_at(flags, metric, k, profile.total_relevant);
      r.expected = expected_metric(profile, metric, k);
      const Extrema ext = extrema(profile, metric, k);
      r.minimum = ext.minimum;
      r.maximum = ext.maximum;
      if (is_count_metric(metric)) {
        const auto [low, high] = hit_extrema(expected_hits(profile, k));
        r.range = count_metric_value(high - low, 1, metric, k, profile.total_relevant);
      } else {
        r.range = r.maximum - r.minimum;
      }
      r.bias = r.oblivious - r.expected;
      out.push_back(r);
    }
  }
  return out;
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

AggregateReport aggregate(std::vector<QueryReport> reports) {
  if (reports.empty()) throw ConstraintError("cannot aggregate zero queries");
  const MetricKind metric = reports.front().report.metric;
  const std::size_t k = reports.front().report.k;
  for (const QueryReport& q : reports) {
    if (q.report.metric != metric || q.report.k != k) {
      throw ConstraintError("aggregate expects a single (metric, k) pair");
    }
  }
  std::sort(reports.begin(), reports.end(),
            [](const QueryReport& a, const QueryReport& b) { return a.query_id < b.query_id; });

  const std::size_t n = reports.size();
  auto mean_of = [&](double MetricReport::*field) {
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = reports[i].report.*field;
    return pairwise_sum(values) / static_cast<double>(n);
  };

  AggregateReport agg;
  agg.metric = metric;
  agg.k = k;
  agg.mean.metric = metric;
  agg.mean.k = k;
  agg.mean.oblivious = mean_of(&MetricReport::oblivious);
  agg.mean.expected = mean_of(&MetricReport::expected);
  agg.mean.maximum = mean_of(&MetricReport::maximum);
  agg.mean.minimum = mean_of(&MetricReport::minimum);
  agg.mean.range = mean_of(&MetricReport::range);
  agg.mean.bias = mean_of(&MetricReport::bias);
  agg.range_of_means = agg.mean.maximum - agg.mean.minimum;
  agg.per_query = std::move(reports);
  return agg;
}

}  // namespace tieeval
