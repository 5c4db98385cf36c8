#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cohort/pipeline.hpp"
#include "json.hpp"

namespace {

using namespace cohort;

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> sets;  // key=value overrides, applied last
  std::string input;
  std::string schema;
  std::string out;
  std::string seed;
  bool force = false;
};

void add_common_options(CLI::App* cmd, CommonArgs& args, bool with_data_flags = true) {
  cmd->add_option("--config", args.config_path, "key = value configuration file");
  cmd->add_option("--set", args.sets, "override one configuration key (key=value); repeatable");
  if (with_data_flags) {
    cmd->add_option("--input", args.input, "delimited dataset file");
    cmd->add_option("--schema", args.schema, "schema sidecar (name,kind,role per line)");
  }
  cmd->add_option("--out", args.out, "output directory");
  cmd->add_option("--seed", args.seed, "random seed");
  cmd->add_flag("--force", args.force, "allow writing into a non-empty output directory");
}

RunConfig build_config(const CommonArgs& args) {
  RunConfig config =
      args.config_path.empty() ? RunConfig{} : parse_config_file(args.config_path);
  if (!args.input.empty()) config.input_path = args.input;
  if (!args.schema.empty()) config.schema_path = args.schema;
  if (!args.out.empty()) config.out_dir = args.out;
  if (args.force) config.force = true;
  if (!args.seed.empty()) apply_config_entry(config, "seed", args.seed);
  for (const auto& entry : args.sets) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos)
      throw Error("--set expects key=value, got '" + entry + "'");
    apply_config_entry(config, entry.substr(0, eq), entry.substr(eq + 1));
  }
  return config;
}

Dataset load_from_config(const RunConfig& config) {
  if (config.input_path.empty()) throw StageError("config", "no input path configured");
  if (config.schema_path.empty()) throw StageError("config", "no schema path configured");
  try {
    LoadOptions options;
    options.delimiter = config.delimiter;
    options.missing_token = config.missing_token;
    return load_dataset_file(config.input_path, config.schema_path, options);
  } catch (const Error& e) {
    throw StageError("load", e.what());
  }
}

void ensure_output_dir(const std::string& out_dir, bool force) {
  namespace fs = std::filesystem;
  const fs::path dir(out_dir);
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir))
      throw Error("output path '" + out_dir + "' exists and is not a directory");
    if (!fs::is_empty(dir) && !force)
      throw Error("output directory '" + out_dir + "' is not empty; pass --force to overwrite");
    return;
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + out_dir + "': " + ec.message());
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

int cmd_profile(const CommonArgs& args) {
  const RunConfig config = build_config(args);
  const Dataset loaded = load_from_config(config);
  const Dataset subset =
      config.tnm_stages.empty() ? loaded : subset_by_tnm(loaded, config.tnm_stages);
  const MissingnessReport report = missingness_profile(subset);
  const std::string report_json = missingness_report_json(report, subset);

  if (config.out_dir.empty()) {
    std::cout << report_json;
    return 0;
  }

  ensure_output_dir(config.out_dir, config.force);
  write_text_file(join_path(config.out_dir, "missingness.json"), report_json);

  std::ostringstream per_attr;
  per_attr << "attribute,kind,role,missing_fraction\n";
  for (std::size_t j = 0; j < subset.n_attributes(); ++j)
    per_attr << subset.spec(j).name << ',' << to_string(subset.spec(j).kind) << ','
             << to_string(subset.spec(j).role) << ','
             << format_number(report.per_attribute[j]) << "\n";
  write_text_file(join_path(config.out_dir, "missingness_per_attribute.csv"), per_attr.str());

  std::ostringstream per_patient;
  per_patient << "patient_id,missing_fraction\n";
  for (std::size_t i = 0; i < subset.n_patients(); ++i)
    per_patient << subset.patient_ids()[i] << ',' << format_number(report.per_patient[i])
                << "\n";
  write_text_file(join_path(config.out_dir, "missingness_per_patient.csv"),
                  per_patient.str());

  std::cout << join_path(config.out_dir, "missingness.json") << "\n"
            << join_path(config.out_dir, "missingness_per_attribute.csv") << "\n"
            << join_path(config.out_dir, "missingness_per_patient.csv") << "\n";
  return 0;
}

int cmd_pipeline(const CommonArgs& args) {
  const RunConfig config = build_config(args);
  if (config.out_dir.empty())
    throw StageError("config", "the pipeline needs an output directory (--out)");
  const PipelineResult result = run_pipeline(config);
  const auto files = write_pipeline_outputs(result, config.out_dir, config.force);
  for (const auto& f : files) std::cout << f << "\n";
  return 0;
}

int cmd_sweep(const CommonArgs& args, const std::string& mode) {
  const RunConfig config = build_config(args);
  const Dataset loaded = load_from_config(config);
  const SweepOutput output = run_sweep(loaded, config, mode);

  nlohmann::json report;
  report["mode"] = output.curve.mode;
  report["truncated"] = output.curve.truncated;
  report["note"] = output.curve.note;
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : output.curve.points) {
    nlohmann::json row;
    row["size"] = p.size;
    row["chosen_k"] = p.chosen_k;
    points.push_back(row);
  }
  report["points"] = points;
  const std::string report_json = report.dump(2) + "\n";

  if (config.out_dir.empty()) {
    std::cout << report_json;
    return 0;
  }

  ensure_output_dir(config.out_dir, config.force);
  const std::string base = "sweep_" + output.curve.mode;
  write_text_file(join_path(config.out_dir, base + ".json"), report_json);

  std::ostringstream csv;
  csv << "size,chosen_k\n";
  for (const auto& p : output.curve.points) csv << p.size << ',' << p.chosen_k << "\n";
  write_text_file(join_path(config.out_dir, base + ".csv"), csv.str());

  std::cout << join_path(config.out_dir, base + ".json") << "\n"
            << join_path(config.out_dir, base + ".csv") << "\n";
  return 0;
}

int cmd_synth(const CommonArgs& args, const std::string& spec_path) {
  SyntheticSpec spec =
      spec_path.empty() ? SyntheticSpec{} : parse_synthetic_spec_file(spec_path);
  if (!args.seed.empty()) apply_synthetic_spec_entry(spec, "seed", args.seed);
  for (const auto& entry : args.sets) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos)
      throw Error("--set expects key=value, got '" + entry + "'");
    apply_synthetic_spec_entry(spec, entry.substr(0, eq), entry.substr(eq + 1));
  }
  if (args.out.empty()) throw Error("synth needs an output directory (--out)");

  const SyntheticCohort cohort = generate(spec);
  ensure_output_dir(args.out, args.force);

  std::ostringstream data;
  write_dataset_csv(data, cohort.dataset);
  write_text_file(join_path(args.out, "cohort.csv"), data.str());

  std::ostringstream schema;
  write_schema(schema, cohort.dataset);
  write_text_file(join_path(args.out, "cohort.schema"), schema.str());

  std::ostringstream truth;
  truth << "patient_id,cluster\n";
  for (std::size_t i = 0; i < cohort.truth.n(); ++i)
    truth << cohort.dataset.patient_ids()[i] << ',' << cohort.truth.labels[i] << "\n";
  write_text_file(join_path(args.out, "truth.csv"), truth.str());

  std::cout << join_path(args.out, "cohort.csv") << "\n"
            << join_path(args.out, "cohort.schema") << "\n"
            << join_path(args.out, "truth.csv") << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Consensus clustering for thresholded biomarker cohorts"};
  app.require_subcommand(1);

  CommonArgs profile_args;
  CLI::App* profile = app.add_subcommand(
      "profile", "Missingness report for a cohort (optionally TNM-subset)");
  add_common_options(profile, profile_args);

  CommonArgs pipeline_args;
  CLI::App* pipeline = app.add_subcommand(
      "pipeline", "Full batch run: filter, impute, select k, cluster, consensus, report");
  add_common_options(pipeline, pipeline_args);

  CommonArgs sweep_args;
  std::string sweep_mode = "patients";
  CLI::App* sweep = app.add_subcommand(
      "sweep", "Optimal-k robustness under shrinking patients or attributes");
  add_common_options(sweep, sweep_args);
  sweep->add_option("--mode", sweep_mode, "patients or attributes")
      ->check(CLI::IsMember({"patients", "attributes"}));

  CommonArgs synth_args;
  std::string synth_spec_path;
  CLI::App* synth = app.add_subcommand(
      "synth", "Generate a synthetic cohort with planted clusters");
  add_common_options(synth, synth_args, /*with_data_flags=*/false);
  synth->add_option("--spec", synth_spec_path, "key = value synthetic spec file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (profile->parsed()) return cmd_profile(profile_args);
    if (pipeline->parsed()) return cmd_pipeline(pipeline_args);
    if (sweep->parsed()) return cmd_sweep(sweep_args, sweep_mode);
    if (synth->parsed()) return cmd_synth(synth_args, synth_spec_path);
  } catch (const StageError& e) {
    std::cerr << "error " << e.what() << "\n";
    return e.stage() == "config" || e.stage() == "load" ? 2 : 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
