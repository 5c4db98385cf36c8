#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cohort/consensus.hpp"
#include "cohort/io.hpp"
#include "cohort/reporting.hpp"
#include "cohort/selection.hpp"
#include "cohort/synth.hpp"

namespace cohort {

/// Resolved batch-run configuration. Loaded from a key=value file, overridden
/// by CLI flags, validated before any work starts.
struct RunConfig {
  std::string input_path;
  std::string schema_path;
  std::string out_dir;
  bool force = false;

  std::uint64_t seed = 0;
  char delimiter = ',';
  std::string missing_token = "NA";

  // imputation: continuous-attribute default; binary/categorical always mode.
  std::string impute = "auto";  // auto|mean|median|mode (auto = mean)
  std::map<std::string, std::string> impute_overrides;

  // attribute/patient filtering
  double max_missing = 1.0;      // 1.0 disables the missingness filter
  double corr_threshold = 1.0;   // 1.0 removes only perfectly correlated pairs
  std::vector<std::string> drop_list;
  std::set<int> tnm_stages;      // empty = keep all stages

  // engines
  EngineKind reference_engine = EngineKind::KMeans;
  EngineParams engine_params;

  // candidate-k ranges
  int sweep_min = 2;
  int sweep_max = 15;
  int agg_min = 2;
  int agg_max = 10;
  bool use_friedman_for_k = false;

  // consensus + characterization
  int consensus_threshold = 3;
  bool include_unassigned = false;
  bool emit_coassignment = false;

  // sweeps
  std::size_t sweep_step = 10;
  std::size_t patient_floor = 30;
  std::size_t attribute_floor = 2;

  void validate() const;
  ImputationPlan imputation_plan() const;
  SelectionConfig selection_config() const;
};

RunConfig parse_config_file(const std::string& path);
/// Applies one `key=value` override; unknown keys are errors.
void apply_config_entry(RunConfig& config, const std::string& key, const std::string& value);

/// Everything cmd_pipeline computes, gathered before any file is written so a
/// failing stage leaves no partial outputs.
struct PipelineResult {
  RunConfig config;

  std::size_t n_loaded = 0;
  std::size_t n_after_subset = 0;
  std::vector<std::string> dropped_attributes;  // removed by filter_attributes
  MissingnessReport missingness;                // post-subset, pre-filter
  std::vector<std::string> matrix_warnings;
  std::vector<std::string> notes;

  std::optional<Dataset> dataset;  // post-subset, post-filter, imputed
  std::vector<std::string> patient_ids;

  SelectionResult selection;
  int chosen_k = 0;

  std::vector<std::pair<std::string, Partition>> partitions;
  ConsensusResult consensus;
  std::map<std::string, double> ari_vs_reference;

  std::optional<TruthTable> truth;          // absent without a TNM column
  std::optional<SurvivalSummary> survival;  // absent without a survival column
  DeviationTable deviations;
  /// attribute -> best threshold accuracy vs TNM; filled only when the cohort
  /// has exactly two observed TNM stages.
  std::map<std::string, double> predictor_accuracy;
};

/// Runs subset -> profile -> filter -> impute -> matrix -> selection ->
/// engines -> consensus -> characterization on an already-loaded dataset.
/// Stage failures raise StageError with the stage name.
PipelineResult run_pipeline(const Dataset& loaded, const RunConfig& config);
/// Loads input/schema from the config paths, then runs the pipeline.
PipelineResult run_pipeline(const RunConfig& config);

/// The stable JSON run report (resolved config included; no timestamps, so
/// identical runs serialize byte-identically).
std::string run_report_json(const PipelineResult& result);

/// Writes the run report plus every per-artifact CSV into out_dir. Refuses a
/// non-empty directory unless force is set; on failure removes the files it
/// created this run.
std::vector<std::string> write_pipeline_outputs(const PipelineResult& result,
                                                const std::string& out_dir, bool force);

// Sweep / profile / synth command helpers shared by the CLI and tests.
struct SweepOutput {
  SweepCurve curve;
};
SweepOutput run_sweep(const Dataset& loaded, const RunConfig& config, const std::string& mode);

std::string missingness_report_json(const MissingnessReport& report, const Dataset& d);

SyntheticSpec parse_synthetic_spec_file(const std::string& path);
void apply_synthetic_spec_entry(SyntheticSpec& spec, const std::string& key,
                                const std::string& value);

}  // namespace cohort
