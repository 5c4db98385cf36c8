#include "cohort/consensus.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <numeric>

namespace cohort {

namespace {

/// Overlap counts: contingency[r][o] = |{i : reference=r, other=o}|.
std::vector<std::vector<std::int64_t>> contingency(const std::vector<int>& reference,
                                                   const std::vector<int>& other, int k) {
  std::vector<std::vector<std::int64_t>> c(
      static_cast<std::size_t>(k), std::vector<std::int64_t>(static_cast<std::size_t>(k), 0));
  for (std::size_t i = 0; i < reference.size(); ++i)
    ++c[static_cast<std::size_t>(reference[i])][static_cast<std::size_t>(other[i])];
  return c;
}

}  // namespace

Partition align_labels(const Partition& reference, const Partition& other) {
  if (reference.n() != other.n())
    throw Error("align_labels: partitions cover different patient counts");
  if (reference.k != other.k)
    throw Error("align_labels: partitions have different k (" +
                std::to_string(reference.k) + " vs " + std::to_string(other.k) + ")");
  const int k = reference.k;
  if (k > 20) throw Error("align_labels: k > 20 is not supported");

  const auto c = contingency(reference.labels, other.labels, k);

  // h[S] = best total overlap assigning the other-labels in S (as bit
  // positions) to the first popcount(S) reference labels... inverted here:
  // we assign reference labels in order, choosing an unused other-label for
  // each. h[S] = best achievable for reference labels |S|.. given used set S.
  const std::size_t full = (std::size_t{1} << k) - 1;
  std::vector<std::int64_t> h(full + 1, 0);
  for (std::size_t s = full; s-- > 0;) {
    const int r = std::popcount(s);
    if (r >= k) continue;
    std::int64_t best = -1;
    for (int o = 0; o < k; ++o) {
      if (s & (std::size_t{1} << o)) continue;
      const std::int64_t v =
          c[static_cast<std::size_t>(r)][static_cast<std::size_t>(o)] +
          h[s | (std::size_t{1} << o)];
      best = std::max(best, v);
    }
    h[s] = best;
  }

  // Forward reconstruction; each reference label takes the smallest
  // other-label consistent with the optimum, which yields the
  // lexicographically smallest optimal mapping.
  std::vector<int> other_to_ref(static_cast<std::size_t>(k), -1);
  std::size_t used = 0;
  for (int r = 0; r < k; ++r) {
    for (int o = 0; o < k; ++o) {
      if (used & (std::size_t{1} << o)) continue;
      const std::int64_t v =
          c[static_cast<std::size_t>(r)][static_cast<std::size_t>(o)] +
          h[used | (std::size_t{1} << o)];
      if (v == h[used]) {
        other_to_ref[static_cast<std::size_t>(o)] = r;
        used |= std::size_t{1} << o;
        break;
      }
    }
  }

  std::vector<int> labels(other.n());
  for (std::size_t i = 0; i < other.n(); ++i)
    labels[i] = other_to_ref[static_cast<std::size_t>(other.labels[i])];
  return make_partition(std::move(labels), k, other.objective);
}

std::size_t ConsensusResult::unassigned_count() const {
  return static_cast<std::size_t>(
      std::count(consensus_labels.begin(), consensus_labels.end(), kUnassigned));
}

ConsensusResult build_consensus(
    const std::vector<std::pair<std::string, Partition>>& partitions,
    const std::string& reference_engine, int threshold) {
  if (partitions.size() < 2) throw Error("build_consensus: needs at least 2 partitions");
  const int m = static_cast<int>(partitions.size());
  if (threshold < 1 || threshold > m)
    throw Error("build_consensus: threshold must lie in [1, " + std::to_string(m) + "]");

  std::size_t ref_pos = partitions.size();
  for (std::size_t e = 0; e < partitions.size(); ++e)
    if (partitions[e].first == reference_engine) {
      ref_pos = e;
      break;
    }
  if (ref_pos == partitions.size())
    throw Error("build_consensus: no partition is named '" + reference_engine + "'");

  const Partition& ref = partitions[ref_pos].second;
  const std::size_t n = ref.n();
  for (const auto& [name, p] : partitions) {
    if (p.n() != n)
      throw Error("build_consensus: partition '" + name + "' covers a different cohort");
    if (p.k != ref.k)
      throw Error("build_consensus: partition '" + name + "' has k=" + std::to_string(p.k) +
                  ", reference has k=" + std::to_string(ref.k));
  }

  ConsensusResult out;
  out.reference_engine = reference_engine;
  out.threshold = threshold;
  out.k = ref.k;
  for (const auto& [name, p] : partitions) {
    out.engine_names.push_back(name);
    out.aligned.push_back(&p == &ref ? p : align_labels(ref, p));
  }

  out.agreement.assign(n, 0);
  out.consensus_labels.assign(n, kUnassigned);
  for (std::size_t i = 0; i < n; ++i) {
    const int want = ref.labels[i];
    int votes = 0;
    for (const auto& p : out.aligned)
      if (p.labels[i] == want) ++votes;
    out.agreement[i] = votes;
    if (votes >= threshold) out.consensus_labels[i] = want;
  }

  // Pair fractions over the unaligned inputs; relabeling any engine's
  // clusters leaves this matrix unchanged.
  out.coassignment.assign(n * n, 0.0);
  for (const auto& [name, p] : partitions) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (p.labels[i] == p.labels[j]) out.coassignment[i * n + j] += 1.0;
  }
  const double denom = static_cast<double>(m);
  for (double& v : out.coassignment) v /= denom;
  return out;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw Error("adjusted_rand_index: length mismatch");
  if (a.empty()) throw Error("adjusted_rand_index: empty labelings");
  const std::size_t n = a.size();

  std::map<int, std::size_t> map_a, map_b;
  for (int v : a) map_a.emplace(v, map_a.size());
  for (int v : b) map_b.emplace(v, map_b.size());

  std::vector<std::vector<std::int64_t>> table(
      map_a.size(), std::vector<std::int64_t>(map_b.size(), 0));
  std::vector<std::int64_t> row_sum(map_a.size(), 0), col_sum(map_b.size(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ra = map_a[a[i]];
    const std::size_t cb = map_b[b[i]];
    ++table[ra][cb];
    ++row_sum[ra];
    ++col_sum[cb];
  }

  const auto choose2 = [](std::int64_t v) { return v * (v - 1) / 2; };
  std::int64_t sum_cells = 0, sum_rows = 0, sum_cols = 0;
  for (std::size_t r = 0; r < table.size(); ++r)
    for (std::size_t c = 0; c < table[r].size(); ++c) sum_cells += choose2(table[r][c]);
  for (std::int64_t v : row_sum) sum_rows += choose2(v);
  for (std::int64_t v : col_sum) sum_cols += choose2(v);
  const std::int64_t pairs = choose2(static_cast<std::int64_t>(n));

  const double expected =
      static_cast<double>(sum_rows) * static_cast<double>(sum_cols) / static_cast<double>(pairs ? pairs : 1);
  const double maximum = 0.5 * static_cast<double>(sum_rows + sum_cols);
  const double denom = maximum - expected;
  if (denom == 0.0) return 1.0;  // both labelings are trivial in the same way
  return (static_cast<double>(sum_cells) - expected) / denom;
}

double adjusted_rand_index(const Partition& p, const Partition& q) {
  return adjusted_rand_index(p.labels, q.labels);
}

}  // namespace cohort
