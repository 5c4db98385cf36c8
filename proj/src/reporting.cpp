#include "cohort/reporting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace cohort {

double TruthTable::sum() const {
  return std::accumulate(cells.begin(), cells.end(), 0.0);
}

TruthTable truth_table(const std::vector<int>& groups, const std::vector<Cell>& outcome) {
  if (groups.size() != outcome.size())
    throw Error("truth_table: group and outcome lengths differ");

  TruthTable t;
  std::set<int> group_set;
  std::set<double> category_set;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (!outcome[i]) {
      ++t.n_excluded;
      continue;
    }
    ++t.n_known;
    group_set.insert(groups[i]);
    category_set.insert(*outcome[i]);
  }
  if (t.n_known == 0) throw Error("truth_table: no patient has a known outcome");

  t.groups.assign(group_set.begin(), group_set.end());
  t.categories.assign(category_set.begin(), category_set.end());
  t.cells.assign(t.groups.size() * t.categories.size(), 0.0);

  const double unit = 100.0 / static_cast<double>(t.n_known);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (!outcome[i]) continue;
    const auto r = std::lower_bound(t.groups.begin(), t.groups.end(), groups[i]) -
                   t.groups.begin();
    const auto c = std::lower_bound(t.categories.begin(), t.categories.end(), *outcome[i]) -
                   t.categories.begin();
    t.cells[static_cast<std::size_t>(r) * t.categories.size() +
            static_cast<std::size_t>(c)] += unit;
  }
  return t;
}

TruthTable truth_table(const Partition& p, const std::vector<Cell>& outcome) {
  return truth_table(p.labels, outcome);
}

SurvivalSummary survival_by_group(const std::vector<int>& groups,
                                  const std::vector<Cell>& survival) {
  if (groups.size() != survival.size())
    throw Error("survival_by_group: group and survival lengths differ");

  SurvivalSummary summary;
  std::vector<int> order;  // groups by first appearance
  for (int g : groups)
    if (std::find(order.begin(), order.end(), g) == order.end()) order.push_back(g);

  for (int g : order) {
    GroupSurvival row;
    row.group = g;
    double sum = 0.0;
    for (std::size_t i = 0; i < groups.size(); ++i) {
      if (groups[i] != g || !survival[i]) continue;
      if (*survival[i] < 0.0)
        throw Error("survival_by_group: negative survival value");
      ++row.count;
      sum += *survival[i];
    }
    if (row.count > 0) row.mean = sum / static_cast<double>(row.count);
    summary.n_known += row.count;
    summary.groups.push_back(row);
  }
  return summary;
}

DeviationTable attribute_deviation(const Dataset& d, const Partition& p) {
  if (p.n() != d.n_patients())
    throw Error("attribute_deviation: partition does not match dataset");

  DeviationTable t;
  t.k = p.k;
  const auto sizes = p.cluster_sizes();
  for (std::size_t j = 0; j < d.n_attributes(); ++j) {
    if (!d.spec(j).is_clustering_input()) continue;
    t.attributes.push_back(d.spec(j).name);

    double cohort_sum = 0.0;
    std::vector<double> cluster_sum(static_cast<std::size_t>(p.k), 0.0);
    for (std::size_t i = 0; i < d.n_patients(); ++i) {
      const Cell& c = d.cell(i, j);
      if (!c)
        throw Error("attribute_deviation: attribute '" + d.spec(j).name +
                    "' still has missing values; impute first");
      cohort_sum += *c;
      cluster_sum[static_cast<std::size_t>(p.labels[i])] += *c;
    }
    const double cohort_mean = cohort_sum / static_cast<double>(d.n_patients());
    for (int c = 0; c < p.k; ++c) {
      DeviationCell cell;
      if (cohort_mean != 0.0) {
        const double cluster_mean = cluster_sum[static_cast<std::size_t>(c)] /
                                    static_cast<double>(sizes[static_cast<std::size_t>(c)]);
        cell.defined = true;
        cell.percent = 100.0 * (cluster_mean - cohort_mean) / cohort_mean;
      }
      t.cells.push_back(cell);
    }
  }
  return t;
}

double single_attribute_predictor(const std::vector<Cell>& attr,
                                  const std::vector<Cell>& labels) {
  if (attr.size() != labels.size())
    throw Error("single_attribute_predictor: length mismatch");

  std::vector<double> values;
  std::vector<double> outcome;
  std::set<double> distinct;
  for (std::size_t i = 0; i < attr.size(); ++i) {
    if (!attr[i] || !labels[i]) continue;
    values.push_back(*attr[i]);
    outcome.push_back(*labels[i]);
    distinct.insert(*labels[i]);
  }
  if (values.empty())
    throw Error("single_attribute_predictor: no patient has both values known");
  if (distinct.size() > 2)
    throw Error("single_attribute_predictor: outcome must be two-valued, saw " +
                std::to_string(distinct.size()) + " values");
  if (distinct.size() == 1) return 1.0;  // constant outcome: the constant map is perfect
  const double lo = *distinct.begin();
  const std::size_t n = values.size();

  std::vector<double> cuts;  // midpoints between adjacent distinct values
  {
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (std::size_t i = 1; i < sorted.size(); ++i)
      cuts.push_back(0.5 * (sorted[i - 1] + sorted[i]));
  }

  // Constant classifiers guarantee accuracy >= max class share >= 0.5.
  std::size_t lo_count = 0;
  for (double o : outcome)
    if (o == lo) ++lo_count;
  std::size_t best = std::max(lo_count, n - lo_count);

  for (double cut : cuts) {
    std::size_t hits_low_is_lo = 0;  // value < cut predicts the lower outcome
    for (std::size_t i = 0; i < n; ++i) {
      const bool below = values[i] < cut;
      if (below == (outcome[i] == lo)) ++hits_low_is_lo;
    }
    best = std::max({best, hits_low_is_lo, n - hits_low_is_lo});
  }
  return static_cast<double>(best) / static_cast<double>(n);
}

namespace {

int selection_for_subset(const Dataset& subset, const SelectionConfig& cfg) {
  const Dataset imputed = impute(subset, cfg.plan);
  const Matrix x = prepare_matrix(imputed);

  // Clamp the candidate range so every k stays below the patient count.
  int sweep_max = cfg.sweep_max;
  if (static_cast<std::size_t>(sweep_max) >= x.rows)
    sweep_max = static_cast<int>(x.rows) - 1;
  if (sweep_max < cfg.sweep_min)
    throw Error("sweep: subset too small for k >= " + std::to_string(cfg.sweep_min));
  const int agg_max = std::min(cfg.agg_max, sweep_max);
  if (agg_max < cfg.agg_min)
    throw Error("sweep: subset too small for the aggregation range");

  const SelectionResult sel = select_k(x, cfg.sweep_min, sweep_max, cfg.agg_min, agg_max,
                                       cfg.engine, cfg.seed, cfg.params);
  return cfg.use_friedman ? sel.with_friedman.chosen_k : sel.without_friedman.chosen_k;
}

}  // namespace

SweepCurve sweep_patients(const Dataset& d, std::size_t step, const SelectionConfig& cfg) {
  if (step < 1) throw Error("sweep_patients: step must be >= 1");
  const std::size_t n0 = d.n_patients();
  if (n0 < cfg.patient_floor)
    throw Error("sweep_patients: cohort of " + std::to_string(n0) +
                " is already below the floor of " + std::to_string(cfg.patient_floor));

  SweepCurve curve;
  curve.mode = "patients";
  for (std::size_t keep = n0;; keep -= step) {
    const Dataset subset = keep == n0 ? d : drop_patients_by_missingness(d, keep);
    curve.points.push_back({keep, selection_for_subset(subset, cfg)});
    if (keep < cfg.patient_floor + step) {
      if (keep > cfg.patient_floor) {
        curve.truncated = true;
        curve.note = "stopped at " + std::to_string(keep) +
                     " patients; the next step would cross the floor of " +
                     std::to_string(cfg.patient_floor);
      }
      break;
    }
  }
  return curve;
}

SweepCurve sweep_attributes(const Dataset& d, const SelectionConfig& cfg) {
  // Drop order fixed once, on the original dataset: most missing first,
  // ties resolved toward the later column.
  std::vector<std::size_t> clustering_cols;
  for (std::size_t j = 0; j < d.n_attributes(); ++j)
    if (d.spec(j).is_clustering_input()) clustering_cols.push_back(j);
  if (clustering_cols.size() < cfg.attribute_floor)
    throw Error("sweep_attributes: only " + std::to_string(clustering_cols.size()) +
                " clustering attributes, floor is " + std::to_string(cfg.attribute_floor));

  std::vector<std::size_t> drop_order = clustering_cols;
  std::stable_sort(drop_order.begin(), drop_order.end(),
                   [&](std::size_t a, std::size_t b) {
                     const std::size_t ma = d.missing_in_column(a);
                     const std::size_t mb = d.missing_in_column(b);
                     if (ma != mb) return ma > mb;
                     return a > b;
                   });

  SweepCurve curve;
  curve.mode = "attributes";
  std::set<std::size_t> dropped;
  for (std::size_t step = 0;; ++step) {
    const std::size_t remaining = clustering_cols.size() - dropped.size();
    std::vector<std::size_t> keep;
    for (std::size_t j = 0; j < d.n_attributes(); ++j) {
      if (d.spec(j).is_clustering_input() && dropped.count(j)) continue;
      keep.push_back(j);
    }
    curve.points.push_back({remaining, selection_for_subset(d.keep_columns(keep), cfg)});
    if (remaining == cfg.attribute_floor) break;
    dropped.insert(drop_order[step]);
  }
  return curve;
}

}  // namespace cohort
