#include "cohort/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace cohort {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    const std::string v = trim(item);
    if (!v.empty()) out.push_back(v);
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw Error("key '" + key + "': expected a boolean, got '" + value + "'");
}

long long parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(value, &pos);
    if (pos != value.size()) throw Error("");
    return v;
  } catch (...) {
    throw Error("key '" + key + "': expected an integer, got '" + value + "'");
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw Error("");
    return v;
  } catch (...) {
    throw Error("key '" + key + "': expected a number, got '" + value + "'");
  }
}

std::uint64_t parse_seed(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const std::uint64_t v = std::stoull(value, &pos);
    if (pos != value.size()) throw Error("");
    return v;
  } catch (...) {
    throw Error("key '" + key + "': expected a non-negative integer, got '" + value + "'");
  }
}

template <typename Fn>
auto stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e.what());
  }
}

}  // namespace

void RunConfig::validate() const {
  if (sweep_min < 2) throw Error("k_min must be >= 2");
  if (sweep_max < sweep_min) throw Error("k_max must be >= k_min");
  if (agg_min < sweep_min || agg_max > sweep_max || agg_max < agg_min)
    throw Error("aggregation range [" + std::to_string(agg_min) + ", " +
                std::to_string(agg_max) + "] must lie inside the sweep range [" +
                std::to_string(sweep_min) + ", " + std::to_string(sweep_max) + "]");
  if (consensus_threshold < 1 || consensus_threshold > 4)
    throw Error("consensus_threshold must lie in [1, 4]");
  if (max_missing < 0.0 || max_missing > 1.0)
    throw Error("max_missing must lie in [0, 1]");
  if (corr_threshold <= 0.0 || corr_threshold > 1.0)
    throw Error("corr_threshold must lie in (0, 1]");
  if (sweep_step < 1) throw Error("sweep_step must be >= 1");
  if (patient_floor < 2) throw Error("patient_floor must be >= 2");
  if (attribute_floor < 1) throw Error("attribute_floor must be >= 1");
  if (engine_params.restarts < 1) throw Error("restarts must be >= 1");
  if (engine_params.max_iter < 1) throw Error("max_iter must be >= 1");
  if (engine_params.fuzzifier <= 1.0) throw Error("fuzzifier must be > 1");
  if (engine_params.fuzzy_eps <= 0.0) throw Error("fuzzy_eps must be > 0");
  if (engine_params.fuzzy_max_iter < 1) throw Error("fuzzy_max_iter must be >= 1");
  for (int v : tnm_stages)
    if (v < 1 || v > 4) throw Error("tnm_stages values must lie in [1, 4]");
  imputation_plan();  // throws on an unknown strategy name
}

ImputationPlan RunConfig::imputation_plan() const {
  ImputationPlan plan;
  plan.continuous_default =
      impute == "auto" ? ImputeStrategy::Mean : impute_strategy_from_string(impute);
  for (const auto& [name, strategy] : impute_overrides)
    plan.overrides[name] = impute_strategy_from_string(strategy);
  return plan;
}

SelectionConfig RunConfig::selection_config() const {
  SelectionConfig cfg;
  cfg.sweep_min = sweep_min;
  cfg.sweep_max = sweep_max;
  cfg.agg_min = agg_min;
  cfg.agg_max = agg_max;
  cfg.engine = reference_engine;
  cfg.params = engine_params;
  cfg.seed = seed;
  cfg.use_friedman = use_friedman_for_k;
  cfg.plan = imputation_plan();
  cfg.patient_floor = patient_floor;
  cfg.attribute_floor = attribute_floor;
  return cfg;
}

void apply_config_entry(RunConfig& config, const std::string& key, const std::string& value) {
  if (key == "input") config.input_path = value;
  else if (key == "schema") config.schema_path = value;
  else if (key == "out") config.out_dir = value;
  else if (key == "force") config.force = parse_bool(key, value);
  else if (key == "seed") config.seed = parse_seed(key, value);
  else if (key == "delimiter") {
    if (value == "tab") config.delimiter = '\t';
    else if (value == "comma") config.delimiter = ',';
    else if (value == "semicolon") config.delimiter = ';';
    else if (value.size() == 1) config.delimiter = value[0];
    else throw Error("key 'delimiter': expected one character, 'tab', 'comma' or 'semicolon'");
  }
  else if (key == "missing_token") config.missing_token = value;
  else if (key == "impute") config.impute = value;
  else if (key.rfind("impute.", 0) == 0) {
    const std::string attr = key.substr(7);
    if (attr.empty()) throw Error("key 'impute.': missing attribute name");
    config.impute_overrides[attr] = value;
  }
  else if (key == "max_missing") config.max_missing = parse_double(key, value);
  else if (key == "corr_threshold") config.corr_threshold = parse_double(key, value);
  else if (key == "drop") config.drop_list = split_list(value);
  else if (key == "tnm_stages") {
    config.tnm_stages.clear();
    for (const auto& item : split_list(value))
      config.tnm_stages.insert(static_cast<int>(parse_int(key, item)));
  }
  else if (key == "engine") config.reference_engine = engine_kind_from_string(value);
  else if (key == "restarts") config.engine_params.restarts = static_cast<int>(parse_int(key, value));
  else if (key == "max_iter") config.engine_params.max_iter = static_cast<int>(parse_int(key, value));
  else if (key == "fuzzifier") config.engine_params.fuzzifier = parse_double(key, value);
  else if (key == "fuzzy_eps") config.engine_params.fuzzy_eps = parse_double(key, value);
  else if (key == "fuzzy_max_iter") config.engine_params.fuzzy_max_iter = static_cast<int>(parse_int(key, value));
  else if (key == "linkage") config.engine_params.linkage = linkage_from_string(value);
  else if (key == "k_min") config.sweep_min = static_cast<int>(parse_int(key, value));
  else if (key == "k_max") config.sweep_max = static_cast<int>(parse_int(key, value));
  else if (key == "agg_min") config.agg_min = static_cast<int>(parse_int(key, value));
  else if (key == "agg_max") config.agg_max = static_cast<int>(parse_int(key, value));
  else if (key == "use_friedman_for_k") config.use_friedman_for_k = parse_bool(key, value);
  else if (key == "consensus_threshold") config.consensus_threshold = static_cast<int>(parse_int(key, value));
  else if (key == "include_unassigned") config.include_unassigned = parse_bool(key, value);
  else if (key == "coassignment") config.emit_coassignment = parse_bool(key, value);
  else if (key == "sweep_step") config.sweep_step = static_cast<std::size_t>(parse_int(key, value));
  else if (key == "patient_floor") config.patient_floor = static_cast<std::size_t>(parse_int(key, value));
  else if (key == "attribute_floor") config.attribute_floor = static_cast<std::size_t>(parse_int(key, value));
  else throw Error("unknown configuration key '" + key + "'");
}

namespace {

/// Shared reader for `key = value` files with # comments.
void parse_kv_file(const std::string& path,
                   const std::function<void(const std::string&, const std::string&)>& apply) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open configuration file '" + path + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string content = trim(line);
    if (content.empty() || content[0] == '#') continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos)
      throw Error(path + " line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(content.substr(0, eq));
    const std::string value = trim(content.substr(eq + 1));
    if (key.empty())
      throw Error(path + " line " + std::to_string(line_no) + ": empty key");
    try {
      apply(key, value);
    } catch (const Error& e) {
      throw Error(path + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace

RunConfig parse_config_file(const std::string& path) {
  RunConfig config;
  parse_kv_file(path, [&](const std::string& key, const std::string& value) {
    apply_config_entry(config, key, value);
  });
  return config;
}

PipelineResult run_pipeline(const Dataset& loaded, const RunConfig& config) {
  PipelineResult result;
  result.config = config;
  result.n_loaded = loaded.n_patients();

  stage("config", [&] { config.validate(); });

  const Dataset subset = stage("subset", [&] {
    if (config.tnm_stages.empty()) return loaded;
    Dataset s = subset_by_tnm(loaded, config.tnm_stages);
    if (s.n_patients() == 0)
      throw Error("the TNM subset leaves no patients");
    return s;
  });
  result.n_after_subset = subset.n_patients();

  stage("profile", [&] { result.missingness = missingness_profile(subset); });

  const Dataset filtered = stage("filter", [&] {
    Dataset f = filter_attributes(subset, config.max_missing, config.corr_threshold,
                                  config.drop_list);
    std::set<std::string> kept;
    for (const auto& spec : f.specs()) kept.insert(spec.name);
    for (const auto& spec : subset.specs())
      if (!kept.count(spec.name)) result.dropped_attributes.push_back(spec.name);
    return f;
  });

  const Dataset imputed =
      stage("impute", [&] { return impute(filtered, config.imputation_plan()); });
  result.dataset = imputed;
  result.patient_ids = imputed.patient_ids();

  const Matrix x = stage("matrix", [&] {
    Matrix m = prepare_matrix(imputed);
    result.matrix_warnings = m.warnings;
    if (static_cast<std::size_t>(config.sweep_max) >= m.rows)
      throw Error("k_max=" + std::to_string(config.sweep_max) + " requires more than " +
                  std::to_string(m.rows) + " patients");
    return m;
  });

  stage("selection", [&] {
    result.selection = select_k(x, config.sweep_min, config.sweep_max, config.agg_min,
                                config.agg_max, config.reference_engine, config.seed,
                                config.engine_params);
    result.chosen_k = config.use_friedman_for_k
                          ? result.selection.with_friedman.chosen_k
                          : result.selection.without_friedman.chosen_k;
  });

  stage("engines", [&] {
    result.partitions = run_all_engines(x, result.chosen_k, config.seed,
                                        config.engine_params);
  });

  stage("consensus", [&] {
    result.consensus = build_consensus(result.partitions,
                                       to_string(config.reference_engine),
                                       config.consensus_threshold);
    const Partition* ref = nullptr;
    for (const auto& [name, p] : result.partitions)
      if (name == result.consensus.reference_engine) ref = &p;
    for (const auto& [name, p] : result.partitions)
      result.ari_vs_reference[name] = adjusted_rand_index(*ref, p);
  });

  stage("characterize", [&] {
    const std::vector<int>& labels = result.consensus.consensus_labels;
    std::vector<std::size_t> assigned;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] != kUnassigned) assigned.push_back(i);

    std::vector<std::size_t> used = assigned;
    if (config.include_unassigned) {
      used.resize(labels.size());
      for (std::size_t i = 0; i < labels.size(); ++i) used[i] = i;
    }
    if (used.empty()) {
      result.notes.push_back(
          "every patient fell below the consensus threshold; characterization skipped");
      return;
    }

    std::vector<int> used_groups;
    used_groups.reserve(used.size());
    for (std::size_t i : used) used_groups.push_back(labels[i]);

    if (const auto tnm = imputed.tnm_column()) {
      std::vector<Cell> outcome;
      outcome.reserve(used.size());
      std::size_t known = 0;
      for (std::size_t i : used) {
        outcome.push_back(imputed.cell(i, *tnm));
        if (outcome.back()) ++known;
      }
      if (known == 0)
        result.notes.push_back("no TNM stage is known; truth table skipped");
      else
        result.truth = truth_table(used_groups, outcome);
    } else {
      result.notes.push_back("no TNM attribute; truth table skipped");
    }

    if (const auto surv = imputed.survival_column()) {
      std::vector<Cell> outcome;
      outcome.reserve(used.size());
      for (std::size_t i : used) outcome.push_back(imputed.cell(i, *surv));
      result.survival = survival_by_group(used_groups, outcome);
    } else {
      result.notes.push_back("no survival attribute; survival summary skipped");
    }

    if (!assigned.empty()) {
      // Deviations describe the consensus clusters, so only assigned
      // patients participate; cluster labels are compacted when the
      // threshold empties one.
      std::vector<int> distinct;
      for (std::size_t i : assigned)
        if (std::find(distinct.begin(), distinct.end(), labels[i]) == distinct.end())
          distinct.push_back(labels[i]);
      std::sort(distinct.begin(), distinct.end());
      if (static_cast<int>(distinct.size()) < result.consensus.k)
        result.notes.push_back("deviation columns cover the non-empty consensus clusters: " +
                               [&] {
                                 std::string s;
                                 for (int c : distinct) s += (s.empty() ? "" : ", ") + std::to_string(c);
                                 return s;
                               }());
      std::vector<int> compact(assigned.size());
      for (std::size_t t = 0; t < assigned.size(); ++t)
        compact[t] = static_cast<int>(std::lower_bound(distinct.begin(), distinct.end(),
                                                       labels[assigned[t]]) -
                                      distinct.begin());
      const Dataset sub = imputed.keep_rows(assigned);
      const Partition part =
          make_partition(std::move(compact), static_cast<int>(distinct.size()), 0.0);
      result.deviations = attribute_deviation(sub, part);
    }

    if (const auto tnm = imputed.tnm_column()) {
      std::set<double> stages;
      for (std::size_t i : used)
        if (const Cell& c = imputed.cell(i, *tnm)) stages.insert(*c);
      if (stages.size() == 2) {
        std::vector<Cell> outcome;
        for (std::size_t i : used) outcome.push_back(imputed.cell(i, *tnm));
        for (std::size_t j = 0; j < imputed.n_attributes(); ++j) {
          if (!imputed.spec(j).is_clustering_input()) continue;
          std::vector<Cell> attr;
          for (std::size_t i : used) attr.push_back(imputed.cell(i, j));
          result.predictor_accuracy[imputed.spec(j).name] =
              single_attribute_predictor(attr, outcome);
        }
      } else {
        result.notes.push_back("stage predictors need exactly 2 observed TNM stages, saw " +
                               std::to_string(stages.size()));
      }
    }
  });

  return result;
}

PipelineResult run_pipeline(const RunConfig& config) {
  stage("config", [&] {
    if (config.input_path.empty()) throw Error("no input path configured");
    if (config.schema_path.empty()) throw Error("no schema path configured");
  });
  const Dataset loaded = stage("load", [&] {
    LoadOptions options;
    options.delimiter = config.delimiter;
    options.missing_token = config.missing_token;
    return load_dataset_file(config.input_path, config.schema_path, options);
  });
  return run_pipeline(loaded, config);
}

namespace {

json score_json(const IndexScore& s) {
  json out;
  switch (s.kind) {
    case IndexScore::Kind::Finite:
      out["kind"] = "finite";
      out["value"] = s.value;
      break;
    case IndexScore::Kind::PositiveInfinity:
      out["kind"] = "positive_infinity";
      break;
    case IndexScore::Kind::Degenerate:
      out["kind"] = "degenerate";
      break;
  }
  return out;
}

json selection_json(const KSelection& sel) {
  json out;
  out["chosen_k"] = sel.chosen_k;
  out["excluded_indices"] = sel.excluded;
  out["k"] = sel.k_values;
  out["mean_rank"] = sel.mean_rank;
  out["score"] = sel.score;
  return out;
}

json config_json(const RunConfig& c) {
  json out;
  out["agg_max"] = c.agg_max;
  out["agg_min"] = c.agg_min;
  out["coassignment"] = c.emit_coassignment;
  out["consensus_threshold"] = c.consensus_threshold;
  out["corr_threshold"] = c.corr_threshold;
  out["delimiter"] = std::string(1, c.delimiter);
  out["drop"] = c.drop_list;
  out["engine"] = to_string(c.reference_engine);
  out["fuzzifier"] = c.engine_params.fuzzifier;
  out["fuzzy_eps"] = c.engine_params.fuzzy_eps;
  out["fuzzy_max_iter"] = c.engine_params.fuzzy_max_iter;
  out["impute"] = c.impute;
  json overrides = json::object();
  for (const auto& [name, strategy] : c.impute_overrides) overrides[name] = strategy;
  out["impute_overrides"] = overrides;
  out["include_unassigned"] = c.include_unassigned;
  out["input"] = c.input_path;
  out["k_max"] = c.sweep_max;
  out["k_min"] = c.sweep_min;
  out["linkage"] = to_string(c.engine_params.linkage);
  out["max_iter"] = c.engine_params.max_iter;
  out["max_missing"] = c.max_missing;
  out["missing_token"] = c.missing_token;
  out["restarts"] = c.engine_params.restarts;
  out["schema"] = c.schema_path;
  out["seed"] = c.seed;
  out["tnm_stages"] = std::vector<int>(c.tnm_stages.begin(), c.tnm_stages.end());
  out["use_friedman_for_k"] = c.use_friedman_for_k;
  return out;
}

}  // namespace

std::string run_report_json(const PipelineResult& result) {
  json report;
  report["config"] = config_json(result.config);

  json cohort;
  cohort["n_loaded"] = result.n_loaded;
  cohort["n_after_subset"] = result.n_after_subset;
  cohort["n_attributes_kept"] = result.dataset ? result.dataset->n_attributes() : 0;
  cohort["overall_missing_fraction"] = result.missingness.overall_fraction;
  cohort["dropped_attributes"] = result.dropped_attributes;
  report["cohort"] = cohort;

  json sel;
  sel["k_candidates"] = result.selection.table.k_values;
  json per_index = json::object();
  for (const auto& [name, k] : result.selection.per_index_k) per_index[name] = k;
  sel["per_index_k"] = per_index;
  json scores = json::object();
  for (std::size_t idx = 0; idx < result.selection.table.indices.size(); ++idx) {
    json row = json::array();
    for (const auto& s : result.selection.table.scores[idx]) row.push_back(score_json(s));
    scores[result.selection.table.indices[idx].name] = row;
  }
  sel["scores"] = scores;
  sel["with_friedman"] = selection_json(result.selection.with_friedman);
  sel["without_friedman"] = selection_json(result.selection.without_friedman);
  sel["chosen_k"] = result.chosen_k;
  report["selection"] = sel;

  json engines = json::object();
  for (const auto& [name, p] : result.partitions) {
    json e;
    e["objective"] = p.objective;
    e["cluster_sizes"] = p.cluster_sizes();
    e["ari_vs_reference"] = result.ari_vs_reference.at(name);
    engines[name] = e;
  }
  report["engines"] = engines;

  json consensus;
  consensus["reference"] = result.consensus.reference_engine;
  consensus["threshold"] = result.consensus.threshold;
  consensus["k"] = result.consensus.k;
  consensus["n_assigned"] = result.consensus.n() - result.consensus.unassigned_count();
  consensus["n_unassigned"] = result.consensus.unassigned_count();
  report["consensus"] = consensus;

  json character;
  if (result.survival) {
    json rows = json::array();
    for (const auto& g : result.survival->groups) {
      json row;
      row["cluster"] = g.group;
      row["count"] = g.count;
      if (g.mean) row["mean_survival"] = *g.mean;
      else row["mean_survival"] = nullptr;
      rows.push_back(row);
    }
    character["survival"] = rows;
  }
  if (result.truth) {
    json truth;
    truth["clusters"] = result.truth->groups;
    truth["categories"] = result.truth->categories;
    truth["percent"] = result.truth->cells;
    truth["n_known"] = result.truth->n_known;
    truth["n_excluded"] = result.truth->n_excluded;
    character["truth_table"] = truth;
  }
  if (!result.predictor_accuracy.empty()) {
    json pred = json::object();
    for (const auto& [name, acc] : result.predictor_accuracy) pred[name] = acc;
    character["predictors"] = pred;
  }
  report["characterization"] = character;

  report["matrix_warnings"] = result.matrix_warnings;
  report["notes"] = result.notes;
  return report.dump(2) + "\n";
}

namespace {

std::string deviation_csv(const PipelineResult& result) {
  // Column ids are the original consensus cluster ids that kept patients.
  std::vector<int> cluster_ids;
  for (int label : result.consensus.consensus_labels)
    if (label != kUnassigned &&
        std::find(cluster_ids.begin(), cluster_ids.end(), label) == cluster_ids.end())
      cluster_ids.push_back(label);
  std::sort(cluster_ids.begin(), cluster_ids.end());

  std::ostringstream out;
  out << "attribute";
  for (int c : cluster_ids) out << ",cluster_" << c;
  out << "\n";
  for (std::size_t a = 0; a < result.deviations.attributes.size(); ++a) {
    out << result.deviations.attributes[a];
    for (int c = 0; c < result.deviations.k; ++c) {
      const DeviationCell& cell = result.deviations.cell(a, c);
      out << ',' << (cell.defined ? format_number(cell.percent) : "");
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace

std::vector<std::string> write_pipeline_outputs(const PipelineResult& result,
                                                const std::string& out_dir, bool force) {
  namespace fs = std::filesystem;
  const fs::path dir(out_dir);
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir))
      throw Error("output path '" + out_dir + "' exists and is not a directory");
    if (!fs::is_empty(dir) && !force)
      throw Error("output directory '" + out_dir + "' is not empty; pass force to overwrite");
  } else {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory '" + out_dir + "': " + ec.message());
  }

  std::vector<std::string> written;
  const auto emit = [&](const std::string& name, const std::string& content) {
    const std::string path = (dir / name).string();
    write_text_file(path, content);
    written.push_back(path);
  };

  try {
    emit("run_report.json", run_report_json(result));

    {
      std::ostringstream out;
      out << "k";
      for (const auto& def : result.selection.table.indices) out << ',' << def.name;
      out << "\n";
      for (std::size_t c = 0; c < result.selection.table.k_values.size(); ++c) {
        out << result.selection.table.k_values[c];
        for (std::size_t idx = 0; idx < result.selection.table.indices.size(); ++idx) {
          const IndexScore& s = result.selection.table.scores[idx][c];
          out << ',';
          if (s.kind == IndexScore::Kind::Finite) out << format_number(s.value);
          else if (s.kind == IndexScore::Kind::PositiveInfinity) out << "inf";
          else out << "degenerate";
        }
        out << "\n";
      }
      emit("index_table.csv", out.str());
    }

    const auto selection_csv = [&](const KSelection& sel) {
      std::ostringstream out;
      out << "k,mean_rank,score\n";
      for (std::size_t c = 0; c < sel.k_values.size(); ++c)
        out << sel.k_values[c] << ',' << format_number(sel.mean_rank[c]) << ','
            << format_number(sel.score[c]) << "\n";
      return out.str();
    };
    emit("selection_with_friedman.csv", selection_csv(result.selection.with_friedman));
    emit("selection_without_friedman.csv", selection_csv(result.selection.without_friedman));

    for (const auto& [name, p] : result.partitions) {
      std::ostringstream out;
      out << "patient_id,label\n";
      for (std::size_t i = 0; i < p.labels.size(); ++i)
        out << result.patient_ids[i] << ',' << p.labels[i] << "\n";
      emit("partition_" + name + ".csv", out.str());
    }

    {
      std::ostringstream out;
      out << "patient_id";
      for (const auto& name : result.consensus.engine_names) out << ",label_" << name;
      out << ",agreement,consensus\n";
      for (std::size_t i = 0; i < result.consensus.n(); ++i) {
        out << result.patient_ids[i];
        for (const auto& p : result.consensus.aligned) out << ',' << p.labels[i];
        out << ',' << result.consensus.agreement[i] << ','
            << result.consensus.consensus_labels[i] << "\n";
      }
      emit("consensus.csv", out.str());
    }

    if (result.truth) {
      std::ostringstream out;
      out << "cluster";
      for (double c : result.truth->categories) out << ",stage_" << format_number(c);
      out << "\n";
      for (std::size_t r = 0; r < result.truth->groups.size(); ++r) {
        out << result.truth->groups[r];
        for (std::size_t c = 0; c < result.truth->categories.size(); ++c)
          out << ',' << format_number(result.truth->cell(r, c));
        out << "\n";
      }
      emit("truth_table.csv", out.str());
    }

    if (result.survival) {
      std::ostringstream out;
      out << "cluster,count,mean_survival\n";
      for (const auto& g : result.survival->groups) {
        out << g.group << ',' << g.count << ',';
        if (g.mean) out << format_number(*g.mean);
        out << "\n";
      }
      emit("survival_by_cluster.csv", out.str());
    }

    if (!result.deviations.attributes.empty())
      emit("attribute_deviation.csv", deviation_csv(result));

    if (!result.predictor_accuracy.empty()) {
      std::ostringstream out;
      out << "attribute,accuracy\n";
      for (const auto& [name, acc] : result.predictor_accuracy)
        out << name << ',' << format_number(acc) << "\n";
      emit("predictors.csv", out.str());
    }

    if (result.config.emit_coassignment) {
      std::ostringstream out;
      out << "patient_id";
      for (const auto& id : result.patient_ids) out << ',' << id;
      out << "\n";
      for (std::size_t i = 0; i < result.consensus.n(); ++i) {
        out << result.patient_ids[i];
        for (std::size_t j = 0; j < result.consensus.n(); ++j)
          out << ',' << format_number(result.consensus.coassignment_at(i, j));
        out << "\n";
      }
      emit("coassignment.csv", out.str());
    }
  } catch (...) {
    for (const auto& path : written) {
      std::error_code ec;
      fs::remove(path, ec);
    }
    throw;
  }
  return written;
}

SweepOutput run_sweep(const Dataset& loaded, const RunConfig& config, const std::string& mode) {
  stage("config", [&] { config.validate(); });
  const Dataset subset = stage("subset", [&] {
    if (config.tnm_stages.empty()) return loaded;
    Dataset s = subset_by_tnm(loaded, config.tnm_stages);
    if (s.n_patients() == 0) throw Error("the TNM subset leaves no patients");
    return s;
  });

  SweepOutput out;
  stage("sweep", [&] {
    const SelectionConfig cfg = config.selection_config();
    if (mode == "patients")
      out.curve = sweep_patients(subset, config.sweep_step, cfg);
    else if (mode == "attributes")
      out.curve = sweep_attributes(subset, cfg);
    else
      throw Error("unknown sweep mode '" + mode + "'; expected patients or attributes");
  });
  return out;
}

std::string missingness_report_json(const MissingnessReport& report, const Dataset& d) {
  json out;
  out["overall_fraction"] = report.overall_fraction;
  out["n_patients"] = d.n_patients();
  out["n_attributes"] = d.n_attributes();

  json per_attr = json::array();
  for (std::size_t j = 0; j < d.n_attributes(); ++j) {
    json row;
    row["attribute"] = d.spec(j).name;
    row["fraction"] = report.per_attribute[j];
    row["kind"] = to_string(d.spec(j).kind);
    row["role"] = to_string(d.spec(j).role);
    per_attr.push_back(row);
  }
  out["per_attribute"] = per_attr;

  json per_patient = json::array();
  for (std::size_t i = 0; i < d.n_patients(); ++i) {
    json row;
    row["patient_id"] = d.patient_ids()[i];
    row["fraction"] = report.per_patient[i];
    per_patient.push_back(row);
  }
  out["per_patient"] = per_patient;
  return out.dump(2) + "\n";
}

void apply_synthetic_spec_entry(SyntheticSpec& spec, const std::string& key,
                                const std::string& value) {
  if (key == "n_patients") spec.n_patients = static_cast<std::size_t>(parse_int(key, value));
  else if (key == "n_binary") spec.n_binary = static_cast<std::size_t>(parse_int(key, value));
  else if (key == "n_continuous") spec.n_continuous = static_cast<std::size_t>(parse_int(key, value));
  else if (key == "k_true") spec.k_true = static_cast<int>(parse_int(key, value));
  else if (key == "flip_prob") spec.flip_prob = parse_double(key, value);
  else if (key == "separation") spec.separation = parse_double(key, value);
  else if (key == "missing_rate") spec.missing_rate = parse_double(key, value);
  else if (key == "survival_effect") {
    spec.survival_effect.clear();
    for (const auto& item : split_list(value))
      spec.survival_effect.push_back(parse_double(key, item));
  }
  else if (key == "survival_noise") spec.survival_noise = parse_double(key, value);
  else if (key == "seed") spec.seed = parse_seed(key, value);
  else throw Error("unknown synthetic spec key '" + key + "'");
}

SyntheticSpec parse_synthetic_spec_file(const std::string& path) {
  SyntheticSpec spec;
  parse_kv_file(path, [&](const std::string& key, const std::string& value) {
    apply_synthetic_spec_entry(spec, key, value);
  });
  return spec;
}

}  // namespace cohort
