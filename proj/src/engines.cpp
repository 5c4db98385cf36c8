#include "cohort/engines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace cohort {

Matrix Matrix::zeros(std::size_t rows, std::size_t cols) {
  Matrix m;
  m.rows = rows;
  m.cols = cols;
  m.values.assign(rows * cols, 0.0);
  return m;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    sum += d * d;
  }
  return sum;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

std::vector<std::size_t> Partition::cluster_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (int label : labels) ++sizes[static_cast<std::size_t>(label)];
  return sizes;
}

Partition make_partition(std::vector<int> labels, int k, double objective) {
  if (k < 1) throw Error("partition needs k >= 1");
  if (labels.empty()) throw Error("partition needs at least one point");
  std::vector<bool> seen(static_cast<std::size_t>(k), false);
  for (int label : labels) {
    if (label < 0 || label >= k)
      throw Error("label " + std::to_string(label) + " outside [0, " + std::to_string(k) + ")");
    seen[static_cast<std::size_t>(label)] = true;
  }
  for (int c = 0; c < k; ++c)
    if (!seen[static_cast<std::size_t>(c)])
      throw Error("cluster " + std::to_string(c) + " is empty");
  Partition p;
  p.labels = std::move(labels);
  p.k = k;
  p.objective = objective;
  return p;
}

namespace {

void check_inputs(const Matrix& x, int k, const char* engine) {
  if (x.rows == 0 || x.cols == 0)
    throw Error(std::string(engine) + ": matrix is empty");
  if (k < 1 || static_cast<std::size_t>(k) > x.rows)
    throw Error(std::string(engine) + ": k=" + std::to_string(k) + " outside [1, " +
                std::to_string(x.rows) + "]");
}

/// k distinct row indices, sampled by a partial Fisher-Yates shuffle.
std::vector<std::size_t> sample_rows(std::size_t n, int k, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int j = 0; j < k; ++j) {
    std::uniform_int_distribution<std::size_t> pick(j, n - 1);
    std::swap(idx[static_cast<std::size_t>(j)], idx[pick(rng)]);
  }
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

struct LloydResult {
  std::vector<int> labels;
  double objective = 0.0;
};

LloydResult lloyd_once(const Matrix& x, int k, std::mt19937_64& rng, int max_iter) {
  const std::size_t n = x.rows;
  const std::size_t d = x.cols;
  const std::size_t kk = static_cast<std::size_t>(k);

  std::vector<double> centroids(kk * d);
  const auto init = sample_rows(n, k, rng);
  for (std::size_t c = 0; c < kk; ++c) {
    const auto row = x.row(init[c]);
    std::copy(row.begin(), row.end(), centroids.begin() + c * d);
  }

  std::vector<int> labels(n, -1);
  std::vector<std::size_t> sizes(kk, 0);
  double prev_objective = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    std::fill(sizes.begin(), sizes.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < kk; ++c) {
        const double dist =
            squared_distance(x.row(i), std::span<const double>(centroids.data() + c * d, d));
        if (dist < best_d) {
          best_d = dist;
          best = static_cast<int>(c);
        }
      }
      if (labels[i] != best) {
        labels[i] = best;
        changed = true;
      }
      ++sizes[static_cast<std::size_t>(best)];
    }

    // Repair empty clusters with the point farthest from its centroid among
    // clusters that can spare one.
    for (std::size_t c = 0; c < kk; ++c) {
      if (sizes[c] > 0) continue;
      std::size_t donor = n;
      double worst = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t li = static_cast<std::size_t>(labels[i]);
        if (sizes[li] < 2) continue;
        const double dist = squared_distance(
            x.row(i), std::span<const double>(centroids.data() + li * d, d));
        if (dist > worst) {
          worst = dist;
          donor = i;
        }
      }
      if (donor == n) throw Error("kmeans: cannot repair empty cluster");
      --sizes[static_cast<std::size_t>(labels[donor])];
      labels[donor] = static_cast<int>(c);
      ++sizes[c];
      changed = true;
    }

    std::fill(centroids.begin(), centroids.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = static_cast<std::size_t>(labels[i]);
      const auto row = x.row(i);
      for (std::size_t j = 0; j < d; ++j) centroids[c * d + j] += row[j];
    }
    for (std::size_t c = 0; c < kk; ++c)
      for (std::size_t j = 0; j < d; ++j)
        centroids[c * d + j] /= static_cast<double>(sizes[c]);

    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = static_cast<std::size_t>(labels[i]);
      objective += squared_distance(
          x.row(i), std::span<const double>(centroids.data() + c * d, d));
    }
    if (objective > prev_objective * (1.0 + 1e-9) + 1e-12)
      throw Error("kmeans: objective increased, which indicates a defect");
    prev_objective = objective;
    if (!changed) break;
  }

  return {std::move(labels), prev_objective};
}

}  // namespace

Partition kmeans(const Matrix& x, int k, std::uint64_t seed, int restarts, int max_iter) {
  check_inputs(x, k, "kmeans");
  if (restarts < 1) throw Error("kmeans: restarts must be >= 1");
  if (max_iter < 1) throw Error("kmeans: max_iter must be >= 1");

  LloydResult best;
  bool have = false;
  for (int r = 0; r < restarts; ++r) {
    std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(r)));
    LloydResult run = lloyd_once(x, k, rng, max_iter);
    if (!have || run.objective < best.objective) {
      best = std::move(run);
      have = true;
    }
  }
  return make_partition(std::move(best.labels), k, best.objective);
}

namespace {

std::vector<double> distance_table(const Matrix& x) {
  const std::size_t n = x.rows;
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = euclidean_distance(x.row(i), x.row(j));
      dist[i * n + j] = d;
      dist[j * n + i] = d;
    }
  return dist;
}

double pam_cost(const std::vector<double>& dist, std::size_t n,
                const std::vector<std::size_t>& medoids) {
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t m : medoids) best = std::min(best, dist[i * n + m]);
    total += best;
  }
  return total;
}

}  // namespace

Partition pam(const Matrix& x, int k, std::uint64_t /*seed*/, int max_iter) {
  check_inputs(x, k, "pam");
  if (max_iter < 1) throw Error("pam: max_iter must be >= 1");
  const std::size_t n = x.rows;
  const auto dist = distance_table(x);

  // BUILD: first the point minimizing total distance, then greedy additions.
  std::vector<std::size_t> medoids;
  std::vector<bool> is_medoid(n, false);
  {
    std::size_t best = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < n; ++c) {
      double cost = 0.0;
      for (std::size_t i = 0; i < n; ++i) cost += dist[i * n + c];
      if (cost < best_cost) {
        best_cost = cost;
        best = c;
      }
    }
    medoids.push_back(best);
    is_medoid[best] = true;
  }
  std::vector<double> nearest(n);
  for (std::size_t i = 0; i < n; ++i) nearest[i] = dist[i * n + medoids[0]];
  while (medoids.size() < static_cast<std::size_t>(k)) {
    std::size_t best = n;
    double best_gain = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < n; ++c) {
      if (is_medoid[c]) continue;
      double gain = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        gain += std::max(0.0, nearest[i] - dist[i * n + c]);
      if (gain > best_gain) {
        best_gain = gain;
        best = c;
      }
    }
    medoids.push_back(best);
    is_medoid[best] = true;
    for (std::size_t i = 0; i < n; ++i)
      nearest[i] = std::min(nearest[i], dist[i * n + best]);
  }

  // SWAP: repeat the single best-improvement swap until none improves.
  double current = pam_cost(dist, n, medoids);
  for (int iter = 0; iter < max_iter; ++iter) {
    double best_cost = current;
    std::size_t best_m = n, best_c = n;
    for (std::size_t mi = 0; mi < medoids.size(); ++mi) {
      for (std::size_t c = 0; c < n; ++c) {
        if (is_medoid[c]) continue;
        std::vector<std::size_t> trial = medoids;
        trial[mi] = c;
        const double cost = pam_cost(dist, n, trial);
        if (cost < best_cost - 1e-12) {
          best_cost = cost;
          best_m = mi;
          best_c = c;
        }
      }
    }
    if (best_m == n) break;
    is_medoid[medoids[best_m]] = false;
    medoids[best_m] = best_c;
    is_medoid[best_c] = true;
    current = best_cost;
  }

  // Cluster ids follow ascending medoid point index.
  std::sort(medoids.begin(), medoids.end());
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < medoids.size(); ++c) {
      const double d = dist[i * n + medoids[c]];
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    labels[i] = best;
  }
  // Every medoid is at distance 0 from itself, so no cluster can be empty.
  return make_partition(std::move(labels), k, current);
}

const char* to_string(Linkage linkage) {
  switch (linkage) {
    case Linkage::Single: return "single";
    case Linkage::Complete: return "complete";
    case Linkage::Average: return "average";
  }
  return "?";
}

Linkage linkage_from_string(const std::string& s) {
  if (s == "single") return Linkage::Single;
  if (s == "complete") return Linkage::Complete;
  if (s == "average") return Linkage::Average;
  throw Error("unknown linkage '" + s + "'");
}

Partition hierarchical(const Matrix& x, int k, Linkage linkage) {
  check_inputs(x, k, "hierarchical");
  const std::size_t n = x.rows;

  // Active cluster list; distances updated by the Lance-Williams recurrences.
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      dist[i][j] = dist[j][i] = euclidean_distance(x.row(i), x.row(j));

  std::vector<std::vector<std::size_t>> members(n);
  for (std::size_t i = 0; i < n; ++i) members[i] = {i};
  std::vector<bool> active(n, true);
  std::size_t n_active = n;
  double last_height = 0.0;

  while (n_active > static_cast<std::size_t>(k)) {
    std::size_t bi = n, bj = n;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!active[j]) continue;
        if (dist[i][j] < best) {
          best = dist[i][j];
          bi = i;
          bj = j;
        }
      }
    }

    const double si = static_cast<double>(members[bi].size());
    const double sj = static_cast<double>(members[bj].size());
    for (std::size_t h = 0; h < n; ++h) {
      if (!active[h] || h == bi || h == bj) continue;
      double d = 0.0;
      switch (linkage) {
        case Linkage::Single: d = std::min(dist[bi][h], dist[bj][h]); break;
        case Linkage::Complete: d = std::max(dist[bi][h], dist[bj][h]); break;
        case Linkage::Average:
          d = (si * dist[bi][h] + sj * dist[bj][h]) / (si + sj);
          break;
      }
      dist[bi][h] = dist[h][bi] = d;
    }
    members[bi].insert(members[bi].end(), members[bj].begin(), members[bj].end());
    members[bj].clear();
    active[bj] = false;
    --n_active;
    last_height = best;
  }

  // Cluster ids follow the smallest member row of each surviving cluster.
  std::vector<std::size_t> survivors;
  for (std::size_t i = 0; i < n; ++i)
    if (active[i]) survivors.push_back(i);
  std::sort(survivors.begin(), survivors.end(), [&](std::size_t a, std::size_t b) {
    return *std::min_element(members[a].begin(), members[a].end()) <
           *std::min_element(members[b].begin(), members[b].end());
  });
  std::vector<int> labels(n, -1);
  for (std::size_t c = 0; c < survivors.size(); ++c)
    for (std::size_t i : members[survivors[c]]) labels[i] = static_cast<int>(c);
  return make_partition(std::move(labels), k, last_height);
}

FuzzyMembership fuzzy_cmeans(const Matrix& x, int k, double m, std::uint64_t seed,
                             double eps, int max_iter) {
  check_inputs(x, k, "fuzzy_cmeans");
  if (m <= 1.0) throw Error("fuzzy_cmeans: fuzzifier must be > 1");
  if (eps <= 0.0) throw Error("fuzzy_cmeans: eps must be > 0");
  if (max_iter < 1) throw Error("fuzzy_cmeans: max_iter must be >= 1");

  const std::size_t n = x.rows;
  const std::size_t d = x.cols;
  const std::size_t kk = static_cast<std::size_t>(k);
  const double power = 2.0 / (m - 1.0);

  std::mt19937_64 rng(mix_seed(seed, 0));
  const auto init = sample_rows(n, k, rng);
  std::vector<double> centroids(kk * d);
  for (std::size_t c = 0; c < kk; ++c) {
    const auto row = x.row(init[c]);
    std::copy(row.begin(), row.end(), centroids.begin() + c * d);
  }

  std::vector<double> u(n * kk, 0.0);
  std::vector<double> d2(kk);

  const auto update_memberships = [&]() {
    double max_delta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t coincident = kk;
      for (std::size_t c = 0; c < kk; ++c) {
        d2[c] = squared_distance(x.row(i),
                                 std::span<const double>(centroids.data() + c * d, d));
        if (d2[c] == 0.0 && coincident == kk) coincident = c;
      }
      for (std::size_t c = 0; c < kk; ++c) {
        double value;
        if (coincident != kk) {
          value = c == coincident ? 1.0 : 0.0;
        } else if (kk == 1) {
          value = 1.0;
        } else {
          double sum = 0.0;
          for (std::size_t l = 0; l < kk; ++l)
            sum += std::pow(d2[c] / d2[l], power / 2.0);
          value = 1.0 / sum;
        }
        max_delta = std::max(max_delta, std::abs(value - u[i * kk + c]));
        u[i * kk + c] = value;
      }
    }
    return max_delta;
  };

  update_memberships();
  for (int iter = 0; iter < max_iter; ++iter) {
    for (std::size_t c = 0; c < kk; ++c) {
      double weight = 0.0;
      std::vector<double> num(d, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double w = std::pow(u[i * kk + c], m);
        weight += w;
        const auto row = x.row(i);
        for (std::size_t j = 0; j < d; ++j) num[j] += w * row[j];
      }
      if (weight == 0.0) continue;  // centroid keeps its position
      for (std::size_t j = 0; j < d; ++j) centroids[c * d + j] = num[j] / weight;
    }
    if (update_memberships() < eps) break;
  }

  FuzzyMembership out;
  out.n = n;
  out.k = k;
  out.fuzzifier = m;
  double objective = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < kk; ++c) {
      const double dist2 = squared_distance(
          x.row(i), std::span<const double>(centroids.data() + c * d, d));
      objective += std::pow(u[i * kk + c], m) * dist2;
    }
  out.objective = objective;
  out.u = std::move(u);
  return out;
}

Partition harden(const FuzzyMembership& u) {
  if (u.n == 0 || u.k < 1) throw Error("harden: empty membership");
  const std::size_t kk = static_cast<std::size_t>(u.k);
  std::vector<int> labels(u.n);
  for (std::size_t i = 0; i < u.n; ++i) {
    int best = 0;
    double best_u = u.u[i * kk];
    for (int c = 1; c < u.k; ++c) {
      const double v = u.u[i * kk + static_cast<std::size_t>(c)];
      if (v > best_u) {
        best_u = v;
        best = c;
      }
    }
    labels[i] = best;
  }

  // Compact away clusters that lost every point.
  std::vector<int> remap(kk, -1);
  int next = 0;
  for (int c = 0; c < u.k; ++c) {
    bool used = false;
    for (std::size_t i = 0; i < u.n; ++i)
      if (labels[i] == c) {
        used = true;
        break;
      }
    if (used) remap[static_cast<std::size_t>(c)] = next++;
  }
  for (std::size_t i = 0; i < u.n; ++i)
    labels[i] = remap[static_cast<std::size_t>(labels[i])];
  return make_partition(std::move(labels), next, u.objective);
}

Matrix prepare_matrix(const Dataset& d) {
  if (d.n_patients() == 0) throw Error("prepare_matrix: dataset has no patients");

  std::vector<std::size_t> cols;
  for (std::size_t j = 0; j < d.n_attributes(); ++j)
    if (d.spec(j).is_clustering_input()) cols.push_back(j);
  if (cols.empty()) throw Error("prepare_matrix: no marker or clinical attributes");

  Matrix m = Matrix::zeros(d.n_patients(), cols.size());
  m.scaled = true;
  for (std::size_t out = 0; out < cols.size(); ++out) {
    const std::size_t j = cols[out];
    const AttributeSpec& spec = d.spec(j);
    m.column_names.push_back(spec.name);

    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < d.n_patients(); ++i) {
      const Cell& c = d.cell(i, j);
      if (!c)
        throw Error("prepare_matrix: attribute '" + spec.name +
                    "' still has missing values; impute first");
      lo = std::min(lo, *c);
      hi = std::max(hi, *c);
    }

    if (spec.kind == AttributeKind::Binary) {
      for (std::size_t i = 0; i < d.n_patients(); ++i) m.at(i, out) = *d.cell(i, j);
      continue;
    }
    if (lo == hi) {
      m.warnings.push_back("attribute '" + spec.name +
                           "' is constant; scaled to 0 and carries no signal");
      for (std::size_t i = 0; i < d.n_patients(); ++i) m.at(i, out) = 0.0;
      continue;
    }
    for (std::size_t i = 0; i < d.n_patients(); ++i)
      m.at(i, out) = (*d.cell(i, j) - lo) / (hi - lo);
  }
  return m;
}

const char* to_string(EngineKind kind) {
  switch (kind) {
    case EngineKind::KMeans: return "kmeans";
    case EngineKind::Pam: return "pam";
    case EngineKind::Hierarchical: return "hierarchical";
    case EngineKind::Fuzzy: return "fuzzy";
  }
  return "?";
}

EngineKind engine_kind_from_string(const std::string& s) {
  if (s == "kmeans") return EngineKind::KMeans;
  if (s == "pam") return EngineKind::Pam;
  if (s == "hierarchical") return EngineKind::Hierarchical;
  if (s == "fuzzy") return EngineKind::Fuzzy;
  throw Error("unknown engine '" + s + "'");
}

Partition run_engine(EngineKind kind, const Matrix& x, int k, std::uint64_t seed,
                     const EngineParams& params) {
  switch (kind) {
    case EngineKind::KMeans:
      return kmeans(x, k, seed, params.restarts, params.max_iter);
    case EngineKind::Pam:
      return pam(x, k, seed, params.max_iter);
    case EngineKind::Hierarchical:
      return hierarchical(x, k, params.linkage);
    case EngineKind::Fuzzy:
      return harden(fuzzy_cmeans(x, k, params.fuzzifier, seed, params.fuzzy_eps,
                                 params.fuzzy_max_iter));
  }
  throw Error("unreachable engine kind");
}

std::vector<std::pair<std::string, Partition>> run_all_engines(
    const Matrix& x, int k, std::uint64_t seed, const EngineParams& params) {
  const EngineKind kinds[] = {EngineKind::KMeans, EngineKind::Pam,
                              EngineKind::Hierarchical, EngineKind::Fuzzy};
  std::vector<std::pair<std::string, Partition>> out;
  out.reserve(4);
  for (std::size_t e = 0; e < 4; ++e) {
    const std::uint64_t engine_seed = mix_seed(seed, 0x1000 + e);
    out.emplace_back(to_string(kinds[e]), run_engine(kinds[e], x, k, engine_seed, params));
  }
  return out;
}

}  // namespace cohort
