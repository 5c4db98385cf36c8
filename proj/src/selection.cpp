#include "cohort/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cohort {

namespace {

/// Sort key for one candidate under one index: lower class is better, value
/// orders within the finite class. Class 0 holds maximize-rule infinities,
/// class 2 minimize-rule infinities, class 3 candidates the rule cannot
/// score at all, so "degenerate ranks worst" holds strictly.
struct SortKey {
  int cls = 0;      // 0 best-class .. 3 worst-class
  double value = 0; // ascending = better within cls 1
};

SortKey extremum_key(const IndexScore& s, DecisionRule rule) {
  if (s.kind == IndexScore::Kind::Degenerate) return {3, 0.0};
  if (s.kind == IndexScore::Kind::PositiveInfinity)
    return rule == DecisionRule::Minimize ? SortKey{2, 0.0} : SortKey{0, 0.0};
  return {1, rule == DecisionRule::Minimize ? s.value : -s.value};
}

bool key_less(const SortKey& a, const SortKey& b) {
  if (a.cls != b.cls) return a.cls < b.cls;
  if (a.cls != 1) return false;  // equal non-finite classes tie
  return a.value < b.value;
}

bool key_equal(const SortKey& a, const SortKey& b) {
  return !key_less(a, b) && !key_less(b, a);
}

/// Average-tie ranks (1 = best) for the given keys.
std::vector<double> average_ranks(const std::vector<SortKey>& keys) {
  const std::size_t m = keys.size();
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return key_less(keys[a], keys[b]); });

  std::vector<double> ranks(m, 0.0);
  std::size_t i = 0;
  while (i < m) {
    std::size_t j = i;
    while (j + 1 < m && key_equal(keys[order[j + 1]], keys[order[i]])) ++j;
    const double avg = 0.5 * static_cast<double>(i + 1 + j + 1);  // ranks are 1-based
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

std::vector<RankVector> rank_candidates(const IndexTable& t) {
  if (t.k_values.empty()) throw Error("rank_candidates: empty candidate list");
  return rank_candidates(t, t.k_values.front(), t.k_values.back());
}

std::vector<RankVector> rank_candidates(const IndexTable& t, int k_min, int k_max) {
  std::vector<std::size_t> cols;
  for (std::size_t i = 0; i < t.k_values.size(); ++i)
    if (t.k_values[i] >= k_min && t.k_values[i] <= k_max) cols.push_back(i);
  if (cols.empty())
    throw Error("rank_candidates: no candidates inside [" + std::to_string(k_min) + ", " +
                std::to_string(k_max) + "]");

  std::vector<RankVector> out;
  out.reserve(t.indices.size());
  for (std::size_t idx = 0; idx < t.indices.size(); ++idx) {
    const auto& def = t.indices[idx];
    const auto& row = t.scores[idx];
    std::vector<SortKey> keys(cols.size());

    if (def.rule == DecisionRule::MaxSuccessiveDifference) {
      // A candidate's key is its difference from the previous candidate in
      // the selected range; the first candidate has no predecessor and lands
      // in the worst class.
      for (std::size_t c = 0; c < cols.size(); ++c) {
        if (c == 0) {
          keys[c] = {3, 0.0};
          continue;
        }
        const IndexScore& cur = row[cols[c]];
        const IndexScore& prev = row[cols[c - 1]];
        if (!cur.is_finite() || !prev.is_finite()) {
          keys[c] = {3, 0.0};
          continue;
        }
        keys[c] = {1, -(cur.value - prev.value)};
      }
    } else {
      for (std::size_t c = 0; c < cols.size(); ++c)
        keys[c] = extremum_key(row[cols[c]], def.rule);
    }

    out.push_back({def.name, average_ranks(keys)});
  }
  return out;
}

KSelection aggregate(const std::vector<RankVector>& ranks,
                     const std::vector<int>& k_values,
                     const std::vector<std::string>& exclude) {
  if (k_values.empty()) throw Error("aggregate: no candidates");
  std::vector<const RankVector*> used;
  for (const auto& r : ranks) {
    if (std::find(exclude.begin(), exclude.end(), r.index_name) != exclude.end()) continue;
    if (r.ranks.size() != k_values.size())
      throw Error("aggregate: rank vector for '" + r.index_name +
                  "' does not match the candidate list");
    used.push_back(&r);
  }
  if (used.empty()) throw Error("aggregate: every index was excluded");

  KSelection sel;
  sel.k_values = k_values;
  sel.excluded = exclude;
  sel.mean_rank.assign(k_values.size(), 0.0);
  for (const RankVector* r : used)
    for (std::size_t c = 0; c < k_values.size(); ++c) sel.mean_rank[c] += r->ranks[c];
  for (double& v : sel.mean_rank) v /= static_cast<double>(used.size());

  sel.score.resize(k_values.size());
  for (std::size_t c = 0; c < k_values.size(); ++c) sel.score[c] = 1.0 / sel.mean_rank[c];

  std::size_t best = 0;
  for (std::size_t c = 1; c < k_values.size(); ++c)
    if (sel.score[c] > sel.score[best]) best = c;  // ties keep the smaller k
  sel.chosen_k = k_values[best];
  return sel;
}

SelectionResult select_k(const Matrix& x, int sweep_min, int sweep_max, int agg_min,
                         int agg_max, EngineKind engine, std::uint64_t seed,
                         const EngineParams& params) {
  if (agg_min < sweep_min || agg_max > sweep_max)
    throw Error("select_k: aggregation range must lie inside the sweep range");

  SelectionResult result;
  result.table = index_sweep(x, engine, sweep_min, sweep_max, seed, params);
  result.per_index_k = optimal_k_per_index(result.table, /*strict=*/false);

  const auto ranks = rank_candidates(result.table, agg_min, agg_max);
  std::vector<int> ks;
  for (int k : result.table.k_values)
    if (k >= agg_min && k <= agg_max) ks.push_back(k);

  result.with_friedman = aggregate(ranks, ks, {});
  result.without_friedman = aggregate(ranks, ks, {kFriedmanIndexName});
  return result;
}

}  // namespace cohort
