#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cohort/engines.hpp"

namespace cohort {

/// Sentinel consensus label for patients below the agreement threshold.
inline constexpr int kUnassigned = -1;

/// Relabels `other` by the label bijection maximizing total overlap with
/// `reference` (optimal assignment on the k x k contingency matrix; ties
/// resolve to the lexicographically smallest mapping). Cluster sizes are
/// permuted, never changed. Requires equal n and k; supports k <= 20.
Partition align_labels(const Partition& reference, const Partition& other);

struct ConsensusResult {
  std::string reference_engine;
  std::vector<std::string> engine_names;
  std::vector<Partition> aligned;    // one per engine, aligned to the reference
  std::vector<int> agreement;        // per patient, in {1..#engines}
  std::vector<int> consensus_labels; // kUnassigned below threshold
  int threshold = 0;
  int k = 0;
  std::vector<double> coassignment;  // n x n row-major pair fractions

  std::size_t n() const { return consensus_labels.size(); }
  std::size_t unassigned_count() const;
  double coassignment_at(std::size_t i, std::size_t j) const {
    return coassignment[i * n() + j];
  }
};

/// Aligns every partition to the named reference engine and assigns each
/// patient the reference label when at least `threshold` engines (reference
/// included) agree on it, else kUnassigned. The co-assignment matrix is
/// computed from the unaligned partitions, which makes it alignment-free.
ConsensusResult build_consensus(
    const std::vector<std::pair<std::string, Partition>>& partitions,
    const std::string& reference_engine, int threshold);

/// Chance-corrected pair-counting agreement in [-1, 1]; 1 means identical up
/// to relabeling. Tolerates arbitrary integer labels and differing k.
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);
double adjusted_rand_index(const Partition& p, const Partition& q);

}  // namespace cohort
