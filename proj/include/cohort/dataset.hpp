#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cohort/common.hpp"

namespace cohort {

enum class AttributeKind { Binary, Continuous, Categorical };
enum class AttributeRole { Marker, Clinical, Outcome, Identifier };

const char* to_string(AttributeKind kind);
const char* to_string(AttributeRole role);
AttributeKind attribute_kind_from_string(const std::string& s);
AttributeRole attribute_role_from_string(const std::string& s);

struct AttributeSpec {
  std::string name;
  AttributeKind kind = AttributeKind::Continuous;
  AttributeRole role = AttributeRole::Marker;

  /// Marker and clinical attributes are the ones fed to clustering distances.
  bool is_clustering_input() const {
    return role == AttributeRole::Marker || role == AttributeRole::Clinical;
  }
};

/// A cell is either a numeric value or missing. Missing is a real state,
/// not a sentinel number, so arithmetic on absent data cannot happen silently.
using Cell = std::optional<double>;

/// Rectangular patient x attribute table. Immutable after construction;
/// every operation returns a new Dataset, so instances can be shared
/// read-only across threads.
class Dataset {
 public:
  /// Validates: unique attribute names, unique patient ids, rectangular rows,
  /// binary cells in {0,1,missing}. Zero patients is allowed (aggressive
  /// subsetting can empty a cohort; such datasets profile fine but do not
  /// cluster).
  Dataset(std::vector<AttributeSpec> specs, std::vector<std::vector<Cell>> rows,
          std::vector<std::string> patient_ids);

  std::size_t n_patients() const { return n_rows_; }
  std::size_t n_attributes() const { return specs_.size(); }

  const std::vector<AttributeSpec>& specs() const { return specs_; }
  const AttributeSpec& spec(std::size_t j) const { return specs_[j]; }
  const std::vector<std::string>& patient_ids() const { return patient_ids_; }

  const Cell& cell(std::size_t i, std::size_t j) const {
    return cells_[i * specs_.size() + j];
  }
  bool is_missing(std::size_t i, std::size_t j) const { return !cell(i, j).has_value(); }
  std::size_t missing_in_row(std::size_t i) const;
  std::size_t missing_in_column(std::size_t j) const;
  std::vector<Cell> column(std::size_t j) const;

  std::optional<std::size_t> find_attribute(const std::string& name) const;
  /// Outcome column whose name contains "tnm" (case-insensitive), if any.
  std::optional<std::size_t> tnm_column() const;
  /// Outcome column whose name contains "surv" (case-insensitive), if any.
  std::optional<std::size_t> survival_column() const;

  /// Row/column subsetting in the order given; order preservation is the
  /// caller's contract.
  Dataset keep_rows(const std::vector<std::size_t>& rows) const;
  Dataset keep_columns(const std::vector<std::size_t>& cols) const;

 private:
  std::vector<AttributeSpec> specs_;
  std::vector<Cell> cells_;  // row-major
  std::vector<std::string> patient_ids_;
  std::size_t n_rows_ = 0;
};

struct MissingnessReport {
  double overall_fraction = 0.0;
  std::vector<double> per_attribute;
  std::vector<double> per_patient;
};

enum class ImputeStrategy { Mean, Median, Mode };

const char* to_string(ImputeStrategy s);
ImputeStrategy impute_strategy_from_string(const std::string& s);

/// Per-attribute imputation strategies, resolved by attribute name so a plan
/// survives column filtering. Binary and categorical attributes always take
/// the mode; requesting mean or median for them is an error.
struct ImputationPlan {
  ImputeStrategy continuous_default = ImputeStrategy::Mean;
  std::map<std::string, ImputeStrategy> overrides;

  static ImputationPlan modal();  // mode everywhere, the all-thresholded default

  ImputeStrategy resolve(const AttributeSpec& spec) const;
};

MissingnessReport missingness_profile(const Dataset& d);

/// Fills every missing marker/clinical cell per the plan; outcome and
/// identifier columns pass through untouched, since fabricating outcomes
/// would poison every downstream characterization. Present cells are never
/// changed; mode ties break toward the smaller value. Errors when a
/// clustering attribute is entirely missing or the plan assigns mean/median
/// to a binary/categorical attribute.
Dataset impute(const Dataset& d, const ImputationPlan& plan);

/// Attribute reduction: drops named attributes, then attributes whose missing
/// fraction exceeds max_missing, then for every marker/clinical pair with
/// |Pearson r| >= corr_threshold (over jointly present rows, skipped when
/// fewer than 2) the member with more missing cells (tie: later column).
/// Outcome and identifier columns are never removed. Surviving column order
/// is preserved.
Dataset filter_attributes(const Dataset& d, double max_missing, double corr_threshold,
                          const std::vector<std::string>& drop_list);

/// Retains the `keep` patients with the fewest missing cells, ties broken by
/// original row order; surviving rows keep their original order.
Dataset drop_patients_by_missingness(const Dataset& d, std::size_t keep);

/// Retains patients whose TNM outcome value lies in `stages`; patients with
/// missing TNM are dropped. Errors when the dataset has no TNM column.
Dataset subset_by_tnm(const Dataset& d, const std::set<int>& stages);

/// Pearson correlation of two columns over jointly present rows; empty when
/// fewer than 2 joint rows or either column is constant on them.
std::optional<double> pairwise_pearson(const Dataset& d, std::size_t a, std::size_t b);

}  // namespace cohort
