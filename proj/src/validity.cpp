#include "cohort/validity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cohort {

namespace {

double trace_of(const std::vector<double>& m, std::size_t d) {
  double t = 0.0;
  for (std::size_t j = 0; j < d; ++j) t += m[j * d + j];
  return t;
}

}  // namespace

double ScatterSummary::trace_within() const { return trace_of(within, dims); }
double ScatterSummary::trace_between() const { return trace_of(between, dims); }
double ScatterSummary::trace_total() const { return trace_of(total, dims); }

ScatterSummary scatter(const Matrix& x, const Partition& p) {
  if (p.n() != x.rows) throw Error("scatter: partition size does not match matrix");
  const std::size_t n = x.rows;
  const std::size_t d = x.cols;
  const std::size_t kk = static_cast<std::size_t>(p.k);

  ScatterSummary s;
  s.dims = d;
  s.k = p.k;
  s.cluster_sizes = p.cluster_sizes();
  s.centroids.assign(kk * d, 0.0);
  s.grand_centroid.assign(d, 0.0);
  s.within.assign(d * d, 0.0);
  s.between.assign(d * d, 0.0);
  s.total.assign(d * d, 0.0);

  for (std::size_t i = 0; i < n; ++i) {
    const auto row = x.row(i);
    const std::size_t c = static_cast<std::size_t>(p.labels[i]);
    for (std::size_t j = 0; j < d; ++j) {
      s.centroids[c * d + j] += row[j];
      s.grand_centroid[j] += row[j];
    }
  }
  for (std::size_t c = 0; c < kk; ++c)
    for (std::size_t j = 0; j < d; ++j)
      s.centroids[c * d + j] /= static_cast<double>(s.cluster_sizes[c]);
  for (std::size_t j = 0; j < d; ++j) s.grand_centroid[j] /= static_cast<double>(n);

  std::vector<double> diff(d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = x.row(i);
    const std::size_t c = static_cast<std::size_t>(p.labels[i]);
    for (std::size_t j = 0; j < d; ++j) diff[j] = row[j] - s.centroids[c * d + j];
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) s.within[a * d + b] += diff[a] * diff[b];
    for (std::size_t j = 0; j < d; ++j) diff[j] = row[j] - s.grand_centroid[j];
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) s.total[a * d + b] += diff[a] * diff[b];
  }
  for (std::size_t c = 0; c < kk; ++c) {
    const double size = static_cast<double>(s.cluster_sizes[c]);
    for (std::size_t j = 0; j < d; ++j)
      diff[j] = s.centroids[c * d + j] - s.grand_centroid[j];
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) s.between[a * d + b] += size * diff[a] * diff[b];
  }
  return s;
}

const char* to_string(DecisionRule rule) {
  switch (rule) {
    case DecisionRule::Maximize: return "maximize";
    case DecisionRule::Minimize: return "minimize";
    case DecisionRule::MaxSuccessiveDifference: return "max_successive_difference";
  }
  return "?";
}

IndexScore index_calinski_harabasz(const ScatterSummary& s, std::size_t n, int k) {
  if (k < 2 || static_cast<std::size_t>(k) >= n) return IndexScore::degenerate();
  const double trW = s.trace_within();
  const double trB = s.trace_between();
  if (trW == 0.0) return trB == 0.0 ? IndexScore::finite(0.0) : IndexScore::infinite();
  const double ratio = (trB / static_cast<double>(k - 1)) /
                       (trW / static_cast<double>(n - static_cast<std::size_t>(k)));
  return IndexScore::finite(ratio);
}

IndexScore index_davies_bouldin(const Matrix& x, const Partition& p) {
  if (p.k < 2) return IndexScore::degenerate();
  const std::size_t d = x.cols;
  const std::size_t kk = static_cast<std::size_t>(p.k);
  const ScatterSummary s = scatter(x, p);

  // Mean distance of each cluster's points to its centroid.
  std::vector<double> spread(kk, 0.0);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const std::size_t c = static_cast<std::size_t>(p.labels[i]);
    spread[c] += euclidean_distance(
        x.row(i), std::span<const double>(s.centroids.data() + c * d, d));
  }
  for (std::size_t c = 0; c < kk; ++c)
    spread[c] /= static_cast<double>(s.cluster_sizes[c]);

  double total = 0.0;
  for (std::size_t a = 0; a < kk; ++a) {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < kk; ++b) {
      if (a == b) continue;
      const double gap = euclidean_distance(
          std::span<const double>(s.centroids.data() + a * d, d),
          std::span<const double>(s.centroids.data() + b * d, d));
      if (gap == 0.0) return IndexScore::infinite();
      worst = std::max(worst, (spread[a] + spread[b]) / gap);
    }
    total += worst;
  }
  return IndexScore::finite(total / static_cast<double>(kk));
}

IndexScore index_silhouette(const Matrix& x, const Partition& p) {
  if (p.k < 2 || x.rows < 3) return IndexScore::degenerate();
  const std::size_t n = x.rows;
  const std::size_t kk = static_cast<std::size_t>(p.k);
  const auto sizes = p.cluster_sizes();

  double total = 0.0;
  std::vector<double> sums(kk);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      sums[static_cast<std::size_t>(p.labels[j])] +=
          euclidean_distance(x.row(i), x.row(j));
    }
    const std::size_t own = static_cast<std::size_t>(p.labels[i]);
    if (sizes[own] == 1) continue;  // singleton: s(i) = 0
    const double a = sums[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < kk; ++c) {
      if (c == own) continue;
      b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
    }
    const double denom = std::max(a, b);
    total += denom == 0.0 ? 0.0 : (b - a) / denom;
  }
  return IndexScore::finite(total / static_cast<double>(n));
}

IndexScore index_dunn(const Matrix& x, const Partition& p) {
  if (p.k < 2) return IndexScore::degenerate();
  const std::size_t n = x.rows;

  double max_diameter = 0.0;
  double min_separation = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dist = euclidean_distance(x.row(i), x.row(j));
      if (p.labels[i] == p.labels[j])
        max_diameter = std::max(max_diameter, dist);
      else
        min_separation = std::min(min_separation, dist);
    }
  if (max_diameter == 0.0) return IndexScore::infinite();
  return IndexScore::finite(min_separation / max_diameter);
}

namespace {

/// LU decomposition with partial pivoting, in place. Returns false when the
/// matrix is numerically singular. `perm_sign` tracks the permutation parity
/// for determinants.
bool lu_decompose(std::vector<double>& a, std::size_t d, std::vector<std::size_t>& piv,
                  double& perm_sign) {
  piv.resize(d);
  perm_sign = 1.0;
  for (std::size_t j = 0; j < d; ++j) piv[j] = j;
  for (std::size_t col = 0; col < d; ++col) {
    std::size_t pivot = col;
    double best = std::abs(a[col * d + col]);
    for (std::size_t r = col + 1; r < d; ++r) {
      const double v = std::abs(a[r * d + col]);
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (best == 0.0) return false;
    if (pivot != col) {
      for (std::size_t j = 0; j < d; ++j) std::swap(a[pivot * d + j], a[col * d + j]);
      std::swap(piv[pivot], piv[col]);
      perm_sign = -perm_sign;
    }
    const double diag = a[col * d + col];
    for (std::size_t r = col + 1; r < d; ++r) {
      const double factor = a[r * d + col] / diag;
      a[r * d + col] = factor;
      for (std::size_t j = col + 1; j < d; ++j) a[r * d + j] -= factor * a[col * d + j];
    }
  }
  return true;
}

/// Solves LU x = b where rows were permuted by piv (b indexed pre-pivot).
void lu_solve(const std::vector<double>& lu, std::size_t d,
              const std::vector<std::size_t>& piv, const std::vector<double>& b,
              std::vector<double>& x) {
  x.resize(d);
  for (std::size_t r = 0; r < d; ++r) x[r] = b[piv[r]];
  for (std::size_t r = 1; r < d; ++r)
    for (std::size_t c = 0; c < r; ++c) x[r] -= lu[r * d + c] * x[c];
  for (std::size_t ri = d; ri-- > 0;) {
    for (std::size_t c = ri + 1; c < d; ++c) x[ri] -= lu[ri * d + c] * x[c];
    x[ri] /= lu[ri * d + ri];
  }
}

double log_abs_det(const std::vector<double>& lu, std::size_t d, double perm_sign,
                   bool& positive) {
  double log_det = 0.0;
  double sign = perm_sign;
  for (std::size_t j = 0; j < d; ++j) {
    const double v = lu[j * d + j];
    log_det += std::log(std::abs(v));
    if (v < 0.0) sign = -sign;
  }
  positive = sign > 0.0;
  return log_det;
}

double ridge_for(const ScatterSummary& s) {
  const double trW = s.trace_within();
  if (trW == 0.0) return 1e-12;
  return 1e-9 * trW / static_cast<double>(s.dims);
}

std::vector<double> with_ridge(const std::vector<double>& m, std::size_t d, double eps) {
  std::vector<double> out = m;
  for (std::size_t j = 0; j < d; ++j) out[j * d + j] += eps;
  return out;
}

}  // namespace

IndexScore index_friedman(const ScatterSummary& s) {
  if (s.k < 2) return IndexScore::degenerate();
  const std::size_t d = s.dims;
  const double eps = ridge_for(s);
  std::vector<double> w = with_ridge(s.within, d, eps);
  std::vector<std::size_t> piv;
  double sign = 1.0;
  if (!lu_decompose(w, d, piv, sign)) return IndexScore::degenerate();

  // trace(W^-1 B) = sum_j (W^-1 b_j)_j over columns b_j of B.
  std::vector<double> column(d), solved(d);
  double trace = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t r = 0; r < d; ++r) column[r] = s.between[r * d + j];
    lu_solve(w, d, piv, column, solved);
    trace += solved[j];
  }
  if (!std::isfinite(trace)) return IndexScore::degenerate();
  return IndexScore::finite(trace);
}

IndexScore index_scott(const ScatterSummary& s, std::size_t n) {
  if (s.k < 2) return IndexScore::degenerate();
  const std::size_t d = s.dims;
  const double eps = ridge_for(s);
  std::vector<double> w = with_ridge(s.within, d, eps);
  std::vector<double> t = with_ridge(s.total, d, eps);
  std::vector<std::size_t> piv;
  double sign = 1.0;
  if (!lu_decompose(w, d, piv, sign)) return IndexScore::degenerate();
  bool w_positive = false;
  const double log_det_w = log_abs_det(w, d, sign, w_positive);
  if (!lu_decompose(t, d, piv, sign)) return IndexScore::degenerate();
  bool t_positive = false;
  const double log_det_t = log_abs_det(t, d, sign, t_positive);
  if (!w_positive || !t_positive) return IndexScore::degenerate();
  const double value = static_cast<double>(n) * (log_det_t - log_det_w);
  if (!std::isfinite(value)) return IndexScore::degenerate();
  return IndexScore::finite(value);
}

const std::vector<IndexDefinition>& default_indices() {
  static const std::vector<IndexDefinition> defs = {
      {"calinski_harabasz", DecisionRule::Maximize},
      {"davies_bouldin", DecisionRule::Minimize},
      {"silhouette", DecisionRule::Maximize},
      {"dunn", DecisionRule::Maximize},
      {"friedman", DecisionRule::MaxSuccessiveDifference},
      {"scott", DecisionRule::MaxSuccessiveDifference},
  };
  return defs;
}

std::vector<IndexScore> evaluate_indices(const Matrix& x, const Partition& p) {
  const ScatterSummary s = scatter(x, p);
  std::vector<IndexScore> out(6, IndexScore::degenerate());
  out[0] = index_calinski_harabasz(s, x.rows, p.k);
  out[1] = index_davies_bouldin(x, p);
  out[2] = index_silhouette(x, p);
  out[3] = index_dunn(x, p);
  out[4] = index_friedman(s);
  out[5] = index_scott(s, x.rows);
  return out;
}

std::optional<std::size_t> IndexTable::k_position(int k) const {
  for (std::size_t i = 0; i < k_values.size(); ++i)
    if (k_values[i] == k) return i;
  return std::nullopt;
}

std::optional<std::size_t> IndexTable::index_position(const std::string& name) const {
  for (std::size_t i = 0; i < indices.size(); ++i)
    if (indices[i].name == name) return i;
  return std::nullopt;
}

IndexTable index_sweep(const Matrix& x, EngineKind engine, int k_min, int k_max,
                       std::uint64_t seed, const EngineParams& params) {
  if (k_min < 2) throw Error("index_sweep: k_min must be >= 2");
  if (k_max < k_min) throw Error("index_sweep: k_max must be >= k_min");
  if (static_cast<std::size_t>(k_max) >= x.rows)
    throw Error("index_sweep: k_max=" + std::to_string(k_max) +
                " needs more than " + std::to_string(x.rows) + " patients");

  IndexTable t;
  t.indices = default_indices();
  t.scores.assign(t.indices.size(), {});
  for (int k = k_min; k <= k_max; ++k) {
    t.k_values.push_back(k);
    const Partition p = run_engine(engine, x, k, mix_seed(seed, static_cast<std::uint64_t>(k)),
                                   params);
    const auto scores = evaluate_indices(x, p);
    for (std::size_t i = 0; i < scores.size(); ++i) t.scores[i].push_back(scores[i]);
  }
  return t;
}

namespace {

/// Orders scores for extremum rules. Infinity outranks every finite value
/// when maximizing and ranks worst when minimizing; degenerate is always
/// worst.
bool better(const IndexScore& a, const IndexScore& b, DecisionRule rule) {
  const auto rank_class = [&](const IndexScore& s) {
    if (s.kind == IndexScore::Kind::Degenerate) return 0;       // worst
    if (s.kind == IndexScore::Kind::PositiveInfinity)
      return rule == DecisionRule::Minimize ? 1 : 2;
    return rule == DecisionRule::Minimize ? 2 : 1;
  };
  const int ca = rank_class(a);
  const int cb = rank_class(b);
  if (ca != cb) return ca > cb;
  if (a.kind != IndexScore::Kind::Finite) return false;  // both infinite or degenerate
  return rule == DecisionRule::Minimize ? a.value < b.value : a.value > b.value;
}

}  // namespace

std::map<std::string, int> optimal_k_per_index(const IndexTable& t, bool strict) {
  std::map<std::string, int> out;
  for (std::size_t idx = 0; idx < t.indices.size(); ++idx) {
    const auto& def = t.indices[idx];
    const auto& row = t.scores[idx];
    const std::size_t needed = def.rule == DecisionRule::MaxSuccessiveDifference ? 3 : 2;
    if (row.size() < needed) {
      if (strict)
        throw Error("index '" + def.name + "' needs at least " + std::to_string(needed) +
                    " candidate k values, got " + std::to_string(row.size()));
      continue;
    }

    std::size_t best = row.size();
    if (def.rule == DecisionRule::MaxSuccessiveDifference) {
      // Differences need finite neighbours; the first candidate has none.
      double best_diff = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 1; i < row.size(); ++i) {
        if (!row[i].is_finite() || !row[i - 1].is_finite()) continue;
        const double diff = row[i].value - row[i - 1].value;
        if (diff > best_diff) {
          best_diff = diff;
          best = i;
        }
      }
      if (best == row.size()) {
        if (strict) throw Error("index '" + def.name + "' has no evaluable difference");
        continue;
      }
    } else {
      best = 0;
      for (std::size_t i = 1; i < row.size(); ++i)
        if (better(row[i], row[best], def.rule)) best = i;
      if (row[best].kind == IndexScore::Kind::Degenerate) {
        if (strict) throw Error("index '" + def.name + "' is degenerate for every candidate");
        continue;
      }
    }
    out[def.name] = t.k_values[best];
  }
  return out;
}

}  // namespace cohort
