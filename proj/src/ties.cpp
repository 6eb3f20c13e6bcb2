#include "tieeval/ties.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>

#include "tieeval/errors.hpp"

namespace tieeval {
namespace {

std::uint64_t score_bits(double v) noexcept {
  return std::bit_cast<std::uint64_t>(v == 0.0 ? 0.0 : v);
}

void check_score(double v) {
  if (!std::isfinite(v)) throw ConstraintError("candidate score must be finite");
}

void finalize(TieProfile& profile, std::size_t missing_relevant) {
  profile.cumulative.assign(1, 0);
  profile.cumulative.reserve(profile.groups.size() + 1);
  std::size_t relevant = 0;
  for (const TieGroup& g : profile.groups) {
    profile.cumulative.push_back(profile.cumulative.back() + g.size);
    relevant += g.relevant_count;
  }
  profile.total_items = profile.cumulative.back();
  profile.total_relevant = relevant + missing_relevant;
}

}  // namespace

std::size_t TieProfile::missing_relevant() const {
  std::size_t in_list = 0;
  for (const TieGroup& g : groups) in_list += g.relevant_count;
  return total_relevant - in_list;
}

bool same_score(double a, double b) noexcept { return score_bits(a) == score_bits(b); }

void sort_candidates(std::vector<ScoredCandidate>& candidates) {
  std::sort(candidates.begin(), candidates.end(),
            [](const ScoredCandidate& a, const ScoredCandidate& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.original_index < b.original_index;
            });
}

TieProfile group_ties(std::span<const ScoredCandidate> candidates, std::size_t missing_relevant) {
  if (candidates.empty()) throw ConstraintError("cannot group ties of an empty candidate list");
  struct Entry {
    double score;
    bool relevant;
  };
  std::vector<Entry> entries;
  entries.reserve(candidates.size());
  for (const ScoredCandidate& c : candidates) {
    check_score(c.score);
    entries.push_back({c.score, c.relevant});
  }
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.score > b.score; });

  TieProfile profile;
  for (const Entry& e : entries) {
    if (profile.groups.empty() || !same_score(profile.groups.back().value, e.score)) {
      profile.groups.push_back({e.score == 0.0 ? 0.0 : e.score, 0, 0});
    }
    TieGroup& g = profile.groups.back();
    ++g.size;
    g.relevant_count += e.relevant ? 1 : 0;
  }
  finalize(profile, missing_relevant);
  return profile;
}

TieProfile group_sorted(std::span<const ScoredCandidate> sorted, std::size_t missing_relevant) {
  if (sorted.empty()) throw ConstraintError("cannot group ties of an empty candidate list");
  TieProfile profile;
  double previous = 0.0;
  for (const ScoredCandidate& c : sorted) {
    check_score(c.score);
    if (profile.groups.empty() || !same_score(previous, c.score)) {
      if (!profile.groups.empty() && !(c.score < previous)) {
        throw ConstraintError("candidates are not sorted by descending score");
      }
      profile.groups.push_back({c.score == 0.0 ? 0.0 : c.score, 0, 0});
      previous = c.score;
    }
    TieGroup& g = profile.groups.back();
    ++g.size;
    g.relevant_count += c.relevant ? 1 : 0;
  }
  finalize(profile, missing_relevant);
  return profile;
}

TieProfile profile_from_groups(std::span<const std::pair<std::size_t, std::size_t>> groups,
                               std::size_t missing_relevant) {
  if (groups.empty()) throw ConstraintError("profile needs at least one group");
  TieProfile profile;
  double value = static_cast<double>(groups.size());
  for (const auto& [size, relevant] : groups) {
    if (size == 0 || relevant > size) {
      throw ConstraintError("tie group needs size >= 1 and relevant_count <= size");
    }
    profile.groups.push_back({value, size, relevant});
    value -= 1.0;
  }
  finalize(profile, missing_relevant);
  return profile;
}

std::vector<std::size_t> truncation_counts(const TieProfile& profile, std::size_t k) {
  if (k < 1) throw ConstraintError("cutoff k must be >= 1");
  std::vector<std::size_t> t(profile.groups.size(), 0);
  for (std::size_t n = 0; n < profile.groups.size(); ++n) {
    const std::size_t before = profile.cumulative[n];
    if (k <= before) break;
    t[n] = std::min(profile.groups[n].size, k - before);
  }
  return t;
}

TieStats tie_stats(const TieProfile& profile, std::size_t k) {
  TieStats stats;
  stats.group_count = profile.groups.size();
  std::size_t tied_items = 0;
  for (std::size_t n = 0; n < profile.groups.size(); ++n) {
    const std::size_t size = profile.groups[n].size;
    stats.largest_group = std::max(stats.largest_group, size);
    if (size == 1) {
      ++stats.singleton_groups;
    } else {
      tied_items += size;
    }
    if (profile.cumulative[n] < k && k < profile.cumulative[n + 1]) stats.cutoff_splits_tie = true;
  }
  if (profile.total_items > 0) {
    stats.nonsingleton_fraction =
        static_cast<double>(tied_items) / static_cast<double>(profile.total_items);
  }
  return stats;
}

}  // namespace tieeval
