#pragma once

// Tie-group extraction. Candidates are sorted by descending score and
// maximal runs of identical score values (bit equality, with -0 == +0)
// become one group.

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace tieeval {

struct ScoredCandidate {
  std::string doc_id;
  double score = 0.0;
  bool relevant = false;
  std::size_t original_index = 0;
};

struct TieGroup {
  double value = 0.0;
  std::size_t size = 0;
  std::size_t relevant_count = 0;

  /// Probability that a uniformly chosen member of the group is relevant.
  double relevance_probability() const {
    return static_cast<double>(relevant_count) / static_cast<double>(size);
  }
};

struct TieProfile {
  std::vector<TieGroup> groups;      // strictly descending by value
  std::vector<std::size_t> cumulative;  // cumulative[n] = sizes of groups [0, n); cumulative[0] = 0
  std::size_t total_relevant = 0;    // N+, including relevant items absent from the list
  std::size_t total_items = 0;       // L

  /// Relevant items judged for the query but not among the candidates.
  std::size_t missing_relevant() const;

  /// Items in the groups before group `n` (zero-based).
  std::size_t items_before(std::size_t n) const { return cumulative[n]; }
};

/// True iff the two scores fall in the same tie group.
bool same_score(double a, double b) noexcept;

/// Orders candidates by descending score, then ascending original_index.
/// This is the tie-oblivious order.
void sort_candidates(std::vector<ScoredCandidate>& candidates);

/// Throws ConstraintError on an empty list or a non-finite score.
/// `missing_relevant` adds judged-relevant items that were never retrieved.
TieProfile group_ties(std::span<const ScoredCandidate> candidates,
                      std::size_t missing_relevant = 0);

/// Single left-to-right scan over candidates already in descending score
/// order. Throws ConstraintError if the order is violated.
TieProfile group_sorted(std::span<const ScoredCandidate> sorted,
                        std::size_t missing_relevant = 0);

/// Builds a profile directly from (size, relevant_count) pairs; values are
/// synthesized as a strictly decreasing sequence.
TieProfile profile_from_groups(std::span<const std::pair<std::size_t, std::size_t>> groups,
                               std::size_t missing_relevant = 0);

/// Items each group contributes to the top-k list:
/// t_n = max(0, min(|G_n|, k - c_{n-1})).
std::vector<std::size_t> truncation_counts(const TieProfile& profile, std::size_t k);

struct TieStats {
  std::size_t group_count = 0;
  std::size_t largest_group = 0;
  std::size_t singleton_groups = 0;
  double nonsingleton_fraction = 0.0;  // fraction of items in groups of size >= 2
  bool cutoff_splits_tie = false;      // a group of size >= 2 straddles rank k
};

TieStats tie_stats(const TieProfile& profile, std::size_t k);

}  // namespace tieeval
