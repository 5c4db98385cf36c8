#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cohort/engines.hpp"

namespace cohort {

/// Within/between/total scatter matrices for a partition; T is computed
/// directly from the grand centroid so the T = W + B identity is a real check.
struct ScatterSummary {
  std::size_t dims = 0;
  int k = 0;
  std::vector<double> within;   // d x d row-major
  std::vector<double> between;  // d x d
  std::vector<double> total;    // d x d
  std::vector<std::size_t> cluster_sizes;
  std::vector<double> centroids;  // k x d
  std::vector<double> grand_centroid;

  double trace_within() const;
  double trace_between() const;
  double trace_total() const;
};

ScatterSummary scatter(const Matrix& x, const Partition& p);

/// Index value that can be finite, an explicit positive-infinity marker
/// (perfect separation / degenerate denominator), or degenerate (not
/// evaluable for this k). Serialized output never contains floating-point
/// infinities.
struct IndexScore {
  enum class Kind { Finite, PositiveInfinity, Degenerate };
  Kind kind = Kind::Degenerate;
  double value = 0.0;

  static IndexScore finite(double v) { return {Kind::Finite, v}; }
  static IndexScore infinite() { return {Kind::PositiveInfinity, 0.0}; }
  static IndexScore degenerate() { return {Kind::Degenerate, 0.0}; }
  bool is_finite() const { return kind == Kind::Finite; }
};

enum class DecisionRule { Maximize, Minimize, MaxSuccessiveDifference };
const char* to_string(DecisionRule rule);

IndexScore index_calinski_harabasz(const ScatterSummary& s, std::size_t n, int k);
IndexScore index_davies_bouldin(const Matrix& x, const Partition& p);
IndexScore index_silhouette(const Matrix& x, const Partition& p);
IndexScore index_dunn(const Matrix& x, const Partition& p);
/// trace(W_reg^-1 B) with ridge eps = 1e-9 * trace(W)/d (1e-12 when
/// trace(W) = 0); decided by maximal successive difference.
IndexScore index_friedman(const ScatterSummary& s);
/// n * log(det(T_reg)/det(W_reg)) under the same ridge as the Friedman index.
IndexScore index_scott(const ScatterSummary& s, std::size_t n);

struct IndexDefinition {
  std::string name;
  DecisionRule rule;
};

/// The six default indices: calinski_harabasz, davies_bouldin, silhouette,
/// dunn, friedman, scott.
const std::vector<IndexDefinition>& default_indices();

/// Scores all six indices for one partition, recording degenerate markers
/// where an index's preconditions do not hold (k < 2, k = n for CH, n < 3
/// for silhouette).
std::vector<IndexScore> evaluate_indices(const Matrix& x, const Partition& p);

struct IndexTable {
  std::vector<int> k_values;                    // ascending candidates
  std::vector<IndexDefinition> indices;         // row order
  std::vector<std::vector<IndexScore>> scores;  // [index][candidate]

  std::optional<std::size_t> k_position(int k) const;
  std::optional<std::size_t> index_position(const std::string& name) const;
};

/// Clusters once per candidate k with the chosen engine (per-k seeds derived
/// from `seed`) and scores every index. One clustering feeds all six indices.
IndexTable index_sweep(const Matrix& x, EngineKind engine, int k_min, int k_max,
                       std::uint64_t seed, const EngineParams& params = {});

/// Applies each index's decision rule: argmax/argmin with infinity markers
/// outranking finite scores (and ranking worst under minimize), or the
/// maximal successive difference score(k) - score(k-1) with the first
/// candidate never chosen. Ties resolve toward smaller k. When strict,
/// errors on rules with too few candidates (2 for extremum rules, 3 for
/// difference rules); otherwise such indices are omitted from the result.
std::map<std::string, int> optimal_k_per_index(const IndexTable& t, bool strict = true);

}  // namespace cohort
