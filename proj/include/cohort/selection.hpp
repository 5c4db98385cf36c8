#pragma once

#include <string>
#include <vector>

#include "cohort/validity.hpp"

namespace cohort {

struct RankVector {
  std::string index_name;
  std::vector<double> ranks;  // aligned with the candidate k values, 1 = best
};

/// Ranks candidate k within each index by its decision rule. Ties receive the
/// average of the tied rank positions, so each index's ranks always sum to
/// m(m+1)/2. For difference-rule indices the successive differences are
/// ranked and the first candidate lands in the worst position. Candidates the
/// rule cannot score (degenerate markers, non-finite differences) tie at the
/// bottom.
std::vector<RankVector> rank_candidates(const IndexTable& t);
std::vector<RankVector> rank_candidates(const IndexTable& t, int k_min, int k_max);

/// Rank-aggregated optimal-k curve: per-k mean rank over the included
/// indices, scored as the reciprocal of the mean rank.
struct KSelection {
  std::vector<int> k_values;
  std::vector<double> mean_rank;
  std::vector<double> score;  // 1 / mean_rank, in (0, 1]
  int chosen_k = 0;
  std::vector<std::string> excluded;
};

/// Mean rank per candidate over the indices not named in `exclude`;
/// chosen k maximizes the reciprocal score, ties toward smaller k.
/// Errors when exclusion removes every index.
KSelection aggregate(const std::vector<RankVector>& ranks,
                     const std::vector<int>& k_values,
                     const std::vector<std::string>& exclude);

struct SelectionResult {
  IndexTable table;
  std::map<std::string, int> per_index_k;  // lenient: undecidable rules omitted
  KSelection with_friedman;
  KSelection without_friedman;
};

/// Full optimal-k workflow: sweep k over [sweep_min, sweep_max], rank the
/// aggregation sub-range [agg_min, agg_max], and aggregate twice (all six
/// indices, and all but the Friedman index).
SelectionResult select_k(const Matrix& x, int sweep_min, int sweep_max, int agg_min,
                         int agg_max, EngineKind engine, std::uint64_t seed,
                         const EngineParams& params = {});

inline constexpr const char* kFriedmanIndexName = "friedman";

}  // namespace cohort
