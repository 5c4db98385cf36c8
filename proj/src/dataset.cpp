#include "cohort/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <unordered_set>

namespace cohort {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool name_contains(const std::string& name, const std::string& needle) {
  return lower(name).find(needle) != std::string::npos;
}

}  // namespace

const char* to_string(AttributeKind kind) {
  switch (kind) {
    case AttributeKind::Binary: return "binary";
    case AttributeKind::Continuous: return "continuous";
    case AttributeKind::Categorical: return "categorical";
  }
  return "?";
}

const char* to_string(AttributeRole role) {
  switch (role) {
    case AttributeRole::Marker: return "marker";
    case AttributeRole::Clinical: return "clinical";
    case AttributeRole::Outcome: return "outcome";
    case AttributeRole::Identifier: return "identifier";
  }
  return "?";
}

AttributeKind attribute_kind_from_string(const std::string& s) {
  const std::string v = lower(s);
  if (v == "binary") return AttributeKind::Binary;
  if (v == "continuous") return AttributeKind::Continuous;
  if (v == "categorical") return AttributeKind::Categorical;
  throw Error("unknown attribute kind '" + s + "'");
}

AttributeRole attribute_role_from_string(const std::string& s) {
  const std::string v = lower(s);
  if (v == "marker") return AttributeRole::Marker;
  if (v == "clinical") return AttributeRole::Clinical;
  if (v == "outcome") return AttributeRole::Outcome;
  if (v == "identifier") return AttributeRole::Identifier;
  throw Error("unknown attribute role '" + s + "'");
}

const char* to_string(ImputeStrategy s) {
  switch (s) {
    case ImputeStrategy::Mean: return "mean";
    case ImputeStrategy::Median: return "median";
    case ImputeStrategy::Mode: return "mode";
  }
  return "?";
}

ImputeStrategy impute_strategy_from_string(const std::string& s) {
  const std::string v = lower(s);
  if (v == "mean") return ImputeStrategy::Mean;
  if (v == "median") return ImputeStrategy::Median;
  if (v == "mode") return ImputeStrategy::Mode;
  throw Error("unknown imputation strategy '" + s + "'");
}

Dataset::Dataset(std::vector<AttributeSpec> specs, std::vector<std::vector<Cell>> rows,
                 std::vector<std::string> patient_ids)
    : specs_(std::move(specs)), patient_ids_(std::move(patient_ids)), n_rows_(rows.size()) {
  if (specs_.empty()) throw Error("dataset needs at least one attribute");
  std::unordered_set<std::string> names;
  for (const auto& spec : specs_) {
    if (!names.insert(spec.name).second)
      throw Error("duplicate attribute name '" + spec.name + "'");
  }
  if (patient_ids_.size() != n_rows_)
    throw Error("patient id count does not match row count");
  std::unordered_set<std::string> ids;
  for (const auto& id : patient_ids_) {
    if (!ids.insert(id).second) throw Error("duplicate patient id '" + id + "'");
  }

  cells_.reserve(n_rows_ * specs_.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != specs_.size())
      throw Error("row " + std::to_string(i + 1) + " has " + std::to_string(rows[i].size()) +
                  " cells, expected " + std::to_string(specs_.size()));
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      const Cell& c = rows[i][j];
      if (c && specs_[j].kind == AttributeKind::Binary && *c != 0.0 && *c != 1.0)
        throw Error("binary attribute '" + specs_[j].name + "' has value outside {0,1}");
      cells_.push_back(c);
    }
  }
}

std::size_t Dataset::missing_in_row(std::size_t i) const {
  std::size_t count = 0;
  for (std::size_t j = 0; j < specs_.size(); ++j)
    if (is_missing(i, j)) ++count;
  return count;
}

std::size_t Dataset::missing_in_column(std::size_t j) const {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n_rows_; ++i)
    if (is_missing(i, j)) ++count;
  return count;
}

std::vector<Cell> Dataset::column(std::size_t j) const {
  std::vector<Cell> col(n_rows_);
  for (std::size_t i = 0; i < n_rows_; ++i) col[i] = cell(i, j);
  return col;
}

std::optional<std::size_t> Dataset::find_attribute(const std::string& name) const {
  for (std::size_t j = 0; j < specs_.size(); ++j)
    if (specs_[j].name == name) return j;
  return std::nullopt;
}

std::optional<std::size_t> Dataset::tnm_column() const {
  for (std::size_t j = 0; j < specs_.size(); ++j)
    if (specs_[j].role == AttributeRole::Outcome && name_contains(specs_[j].name, "tnm"))
      return j;
  return std::nullopt;
}

std::optional<std::size_t> Dataset::survival_column() const {
  for (std::size_t j = 0; j < specs_.size(); ++j)
    if (specs_[j].role == AttributeRole::Outcome && name_contains(specs_[j].name, "surv"))
      return j;
  return std::nullopt;
}

Dataset Dataset::keep_rows(const std::vector<std::size_t>& rows) const {
  std::vector<std::vector<Cell>> out;
  std::vector<std::string> ids;
  out.reserve(rows.size());
  ids.reserve(rows.size());
  for (std::size_t i : rows) {
    std::vector<Cell> row(specs_.size());
    for (std::size_t j = 0; j < specs_.size(); ++j) row[j] = cell(i, j);
    out.push_back(std::move(row));
    ids.push_back(patient_ids_[i]);
  }
  return Dataset(specs_, std::move(out), std::move(ids));
}

Dataset Dataset::keep_columns(const std::vector<std::size_t>& cols) const {
  std::vector<AttributeSpec> specs;
  specs.reserve(cols.size());
  for (std::size_t j : cols) specs.push_back(specs_[j]);
  std::vector<std::vector<Cell>> out;
  out.reserve(n_rows_);
  for (std::size_t i = 0; i < n_rows_; ++i) {
    std::vector<Cell> row;
    row.reserve(cols.size());
    for (std::size_t j : cols) row.push_back(cell(i, j));
    out.push_back(std::move(row));
  }
  return Dataset(std::move(specs), std::move(out), patient_ids_);
}

ImputationPlan ImputationPlan::modal() {
  ImputationPlan plan;
  plan.continuous_default = ImputeStrategy::Mode;
  return plan;
}

ImputeStrategy ImputationPlan::resolve(const AttributeSpec& spec) const {
  const bool discrete =
      spec.kind == AttributeKind::Binary || spec.kind == AttributeKind::Categorical;
  auto it = overrides.find(spec.name);
  if (it != overrides.end()) {
    if (discrete && it->second != ImputeStrategy::Mode)
      throw Error("attribute '" + spec.name + "' is " + to_string(spec.kind) +
                  "; only mode imputation is permitted");
    return it->second;
  }
  if (discrete) return ImputeStrategy::Mode;
  return continuous_default;
}

MissingnessReport missingness_profile(const Dataset& d) {
  MissingnessReport report;
  const std::size_t n = d.n_patients();
  const std::size_t m = d.n_attributes();
  report.per_attribute.assign(m, 0.0);
  report.per_patient.assign(n, 0.0);
  std::size_t total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t row_missing = 0;
    for (std::size_t j = 0; j < m; ++j) {
      if (d.is_missing(i, j)) {
        ++row_missing;
        report.per_attribute[j] += 1.0;
      }
    }
    total += row_missing;
    report.per_patient[i] = static_cast<double>(row_missing) / static_cast<double>(m);
  }
  for (std::size_t j = 0; j < m; ++j)
    report.per_attribute[j] /= n > 0 ? static_cast<double>(n) : 1.0;
  report.overall_fraction =
      n == 0 ? 0.0 : static_cast<double>(total) / static_cast<double>(n * m);
  return report;
}

namespace {

double impute_value(const Dataset& d, std::size_t j, ImputeStrategy strategy) {
  std::vector<double> present;
  present.reserve(d.n_patients());
  for (std::size_t i = 0; i < d.n_patients(); ++i)
    if (const Cell& c = d.cell(i, j)) present.push_back(*c);
  if (present.empty())
    throw Error("attribute '" + d.spec(j).name + "' is entirely missing; cannot impute");

  switch (strategy) {
    case ImputeStrategy::Mean: {
      double sum = std::accumulate(present.begin(), present.end(), 0.0);
      return sum / static_cast<double>(present.size());
    }
    case ImputeStrategy::Median: {
      std::sort(present.begin(), present.end());
      const std::size_t mid = present.size() / 2;
      if (present.size() % 2 == 1) return present[mid];
      return 0.5 * (present[mid - 1] + present[mid]);
    }
    case ImputeStrategy::Mode: {
      std::map<double, std::size_t> counts;
      for (double v : present) ++counts[v];
      double best = present.front();
      std::size_t best_count = 0;
      for (const auto& [value, count] : counts) {
        if (count > best_count) {  // map iterates ascending, so ties keep the smaller value
          best = value;
          best_count = count;
        }
      }
      return best;
    }
  }
  throw Error("unreachable imputation strategy");
}

}  // namespace

Dataset impute(const Dataset& d, const ImputationPlan& plan) {
  const std::size_t n = d.n_patients();
  const std::size_t m = d.n_attributes();

  std::vector<std::optional<double>> fill(m);
  for (std::size_t j = 0; j < m; ++j) {
    if (!d.spec(j).is_clustering_input()) continue;  // outcomes stay as observed
    const ImputeStrategy strategy = plan.resolve(d.spec(j));
    if (d.missing_in_column(j) > 0) fill[j] = impute_value(d, j, strategy);
  }

  std::vector<std::vector<Cell>> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    rows[i].resize(m);
    for (std::size_t j = 0; j < m; ++j) {
      const Cell& c = d.cell(i, j);
      rows[i][j] = c || !fill[j] ? c : Cell(*fill[j]);
    }
  }
  return Dataset(d.specs(), std::move(rows), d.patient_ids());
}

std::optional<double> pairwise_pearson(const Dataset& d, std::size_t a, std::size_t b) {
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < d.n_patients(); ++i) {
    const Cell& x = d.cell(i, a);
    const Cell& y = d.cell(i, b);
    if (!x || !y) continue;
    ++n;
    sx += *x;
    sy += *y;
    sxx += *x * *x;
    syy += *y * *y;
    sxy += *x * *y;
  }
  if (n < 2) return std::nullopt;
  const double nn = static_cast<double>(n);
  const double vx = sxx - sx * sx / nn;
  const double vy = syy - sy * sy / nn;
  if (vx <= 0.0 || vy <= 0.0) return std::nullopt;  // constant on joint rows
  return (sxy - sx * sy / nn) / std::sqrt(vx * vy);
}

Dataset filter_attributes(const Dataset& d, double max_missing, double corr_threshold,
                          const std::vector<std::string>& drop_list) {
  if (corr_threshold <= 0.0 || corr_threshold > 1.0)
    throw Error("corr_threshold must lie in (0, 1]");
  const std::size_t m = d.n_attributes();
  std::vector<bool> removed(m, false);
  const auto protected_role = [&](std::size_t j) {
    return d.spec(j).role == AttributeRole::Outcome ||
           d.spec(j).role == AttributeRole::Identifier;
  };

  for (const auto& name : drop_list) {
    const auto j = d.find_attribute(name);
    if (!j) throw Error("drop_list attribute '" + name + "' not found");
    if (!protected_role(*j)) removed[*j] = true;
  }

  const std::size_t n = d.n_patients();
  for (std::size_t j = 0; j < m; ++j) {
    if (removed[j] || protected_role(j)) continue;
    const double frac =
        n == 0 ? 0.0 : static_cast<double>(d.missing_in_column(j)) / static_cast<double>(n);
    if (frac > max_missing) removed[j] = true;
  }

  // Greedy correlation pruning in column order; victims leave immediately so
  // later pairs see only survivors.
  for (std::size_t a = 0; a < m; ++a) {
    if (removed[a] || protected_role(a)) continue;
    for (std::size_t b = a + 1; b < m; ++b) {
      if (removed[a]) break;
      if (removed[b] || protected_role(b)) continue;
      const auto r = pairwise_pearson(d, a, b);
      if (!r || std::abs(*r) < corr_threshold) continue;
      const std::size_t miss_a = d.missing_in_column(a);
      const std::size_t miss_b = d.missing_in_column(b);
      // keep the less-missing member; tie removes the later column
      removed[miss_a > miss_b ? a : b] = true;
    }
  }

  std::vector<std::size_t> keep;
  keep.reserve(m);
  for (std::size_t j = 0; j < m; ++j)
    if (!removed[j]) keep.push_back(j);
  return d.keep_columns(keep);
}

Dataset drop_patients_by_missingness(const Dataset& d, std::size_t keep) {
  const std::size_t n = d.n_patients();
  if (keep < 1 || keep > n)
    throw Error("keep must lie in [1, " + std::to_string(n) + "], got " + std::to_string(keep));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return d.missing_in_row(a) < d.missing_in_row(b);
  });
  order.resize(keep);
  std::sort(order.begin(), order.end());  // surviving rows keep original order
  return d.keep_rows(order);
}

Dataset subset_by_tnm(const Dataset& d, const std::set<int>& stages) {
  const auto tnm = d.tnm_column();
  if (!tnm) throw Error("dataset has no TNM outcome attribute");
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < d.n_patients(); ++i) {
    const Cell& c = d.cell(i, *tnm);
    if (!c) continue;
    const int stage = static_cast<int>(std::lround(*c));
    if (stages.count(stage)) keep.push_back(i);
  }
  return d.keep_rows(keep);
}

}  // namespace cohort
