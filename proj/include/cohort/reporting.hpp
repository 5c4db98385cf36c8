#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cohort/dataset.hpp"
#include "cohort/selection.hpp"

namespace cohort {

/// Cluster x outcome-category table where each cell is a percentage of the
/// whole cohort with both labels known, so cells sum to 100.
struct TruthTable {
  std::vector<int> groups;         // row ids, ascending
  std::vector<double> categories;  // column values, ascending
  std::vector<double> cells;       // row-major percentages
  std::size_t n_known = 0;
  std::size_t n_excluded = 0;  // patients lacking the outcome

  double cell(std::size_t r, std::size_t c) const { return cells[r * categories.size() + c]; }
  double sum() const;
};

TruthTable truth_table(const std::vector<int>& groups, const std::vector<Cell>& outcome);
TruthTable truth_table(const Partition& p, const std::vector<Cell>& outcome);

struct GroupSurvival {
  int group = 0;
  std::size_t count = 0;            // patients with known survival
  std::optional<double> mean;       // empty marks an undefined mean (count 0)
};

/// Mean survival per group over patients with known survival. Groups appear
/// in order of first appearance; groups emptied by exclusions keep a row with
/// count 0 and an undefined-mean marker.
struct SurvivalSummary {
  std::vector<GroupSurvival> groups;
  std::size_t n_known = 0;
};

SurvivalSummary survival_by_group(const std::vector<int>& groups,
                                  const std::vector<Cell>& survival);

struct DeviationCell {
  bool defined = false;
  double percent = 0.0;
};

/// Per attribute and cluster, the percent deviation of the cluster mean from
/// the cohort mean. Attributes with cohort mean 0 are flagged undefined.
struct DeviationTable {
  std::vector<std::string> attributes;  // marker/clinical columns
  int k = 0;
  std::vector<DeviationCell> cells;  // attributes x k row-major

  const DeviationCell& cell(std::size_t a, int c) const {
    return cells[a * static_cast<std::size_t>(k) + c];
  }
};

DeviationTable attribute_deviation(const Dataset& d, const Partition& p);

/// Best single-attribute threshold classifier accuracy against a two-valued
/// outcome, over patients with both values known. Both polarities and all
/// midpoint thresholds (plus the two constant mappings) are scanned, so the
/// result is always >= 0.5. A single-valued outcome scores 1.0; more than
/// two values or no jointly known pair is an error.
double single_attribute_predictor(const std::vector<Cell>& attr,
                                  const std::vector<Cell>& labels);

/// Everything a sweep point needs to re-run optimal-k selection on a subset.
struct SelectionConfig {
  int sweep_min = 2;
  int sweep_max = 15;
  int agg_min = 2;
  int agg_max = 10;
  EngineKind engine = EngineKind::KMeans;
  EngineParams params;
  std::uint64_t seed = 0;
  bool use_friedman = false;  // which selection variant's chosen k is recorded
  ImputationPlan plan;
  std::size_t patient_floor = 30;
  std::size_t attribute_floor = 2;
};

struct SweepPoint {
  std::size_t size = 0;  // patients or clustering attributes remaining
  int chosen_k = 0;
};

struct SweepCurve {
  std::string mode;  // "patients" or "attributes"
  std::vector<SweepPoint> points;  // sizes strictly decreasing
  bool truncated = false;
  std::string note;
};

/// Drops the `step` most-missing patients at a time (missingness ranked on
/// the original dataset), re-imputes, and re-runs optimal-k selection until
/// the patient floor is reached.
SweepCurve sweep_patients(const Dataset& d, std::size_t step, const SelectionConfig& cfg);

/// Drops marker/clinical attributes one at a time in order of decreasing
/// missing fraction (ties: later column first; order fixed once from the
/// original dataset), re-running selection per subset down to the attribute
/// floor.
SweepCurve sweep_attributes(const Dataset& d, const SelectionConfig& cfg);

}  // namespace cohort
