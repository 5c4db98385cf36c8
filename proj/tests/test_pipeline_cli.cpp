#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cohort/pipeline.hpp"
#include "doctest.h"
#include "json.hpp"
#include "test_helpers.hpp"

using namespace cohort;
namespace fs = std::filesystem;

namespace {

Dataset toy_dataset() {
  return th::dataset(
      {th::marker("m1"), th::marker("m2"),
       th::spec("tnm_stage", AttributeKind::Categorical, AttributeRole::Outcome),
       th::spec("survival_months", AttributeKind::Continuous, AttributeRole::Outcome)},
      {{Cell(0.0), Cell(0.0), Cell(1.0), Cell(20.0)},
       {Cell(0.0), Cell(1.0), Cell(2.0), Cell(30.0)},
       {Cell(1.0), Cell(0.0), Cell(1.0), Cell(40.0)},
       {Cell(1.0), Cell(1.0), Cell(2.0), Cell(50.0)}});
}

RunConfig toy_config() {
  RunConfig cfg;
  cfg.sweep_min = 2;
  cfg.sweep_max = 3;
  cfg.agg_min = 2;
  cfg.agg_max = 3;
  cfg.engine_params.restarts = 8;
  cfg.seed = 11;
  return cfg;
}

std::string cli_path() {
  const char* env = std::getenv("COHORT_CLI");
  REQUIRE_MESSAGE(env != nullptr, "COHORT_CLI must point at the cohort binary");
  return env;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("cohort_ut_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::string& args, const fs::path& scratch) {
  const fs::path out_file = scratch / "stdout.txt";
  const fs::path err_file = scratch / "stderr.txt";
  const std::string command = "\"" + cli_path() + "\" " + args + " > \"" +
                              out_file.string() + "\" 2> \"" + err_file.string() + "\"";
  const int status = std::system(command.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_text_file(out_file.string());
  r.err = read_text_file(err_file.string());
  return r;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

void write_toy_files(const fs::path& dir) {
  write_file(dir / "toy.schema",
             "m1,binary,marker\n"
             "m2,binary,marker\n"
             "tnm_stage,categorical,outcome\n"
             "survival_months,continuous,outcome\n");
  write_file(dir / "toy.csv",
             "m1,m2,tnm_stage,survival_months\n"
             "0,0,1,20\n"
             "0,1,2,30\n"
             "1,0,1,40\n"
             "1,1,2,50\n");
}

}  // namespace

TEST_CASE("config entries parse and validate") {
  RunConfig cfg;
  apply_config_entry(cfg, "seed", "99");
  apply_config_entry(cfg, "k_min", "2");
  apply_config_entry(cfg, "k_max", "7");
  apply_config_entry(cfg, "agg_max", "7");
  apply_config_entry(cfg, "engine", "pam");
  apply_config_entry(cfg, "linkage", "single");
  apply_config_entry(cfg, "impute", "median");
  apply_config_entry(cfg, "impute.age", "mean");
  apply_config_entry(cfg, "tnm_stages", "2,3");
  apply_config_entry(cfg, "drop", "a, b");
  apply_config_entry(cfg, "consensus_threshold", "2");
  apply_config_entry(cfg, "delimiter", "tab");
  apply_config_entry(cfg, "use_friedman_for_k", "true");
  CHECK(cfg.seed == 99);
  CHECK(cfg.sweep_max == 7);
  CHECK(cfg.reference_engine == EngineKind::Pam);
  CHECK(cfg.engine_params.linkage == Linkage::Single);
  CHECK(cfg.impute == "median");
  CHECK(cfg.impute_overrides.at("age") == "mean");
  CHECK(cfg.tnm_stages == std::set<int>{2, 3});
  CHECK(cfg.drop_list == std::vector<std::string>{"a", "b"});
  CHECK(cfg.delimiter == '\t');
  CHECK(cfg.use_friedman_for_k);
  CHECK_NOTHROW(cfg.validate());

  CHECK_THROWS_AS(apply_config_entry(cfg, "no_such_key", "1"), Error);
  CHECK_THROWS_AS(apply_config_entry(cfg, "seed", "abc"), Error);
  // range checks are deferred to validate(), not entry parsing
  apply_config_entry(cfg, "k_min", "1");
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("config validation rejects inconsistent ranges") {
  RunConfig cfg = toy_config();
  cfg.agg_max = 5;  // outside the sweep range
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = toy_config();
  cfg.consensus_threshold = 5;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = toy_config();
  cfg.impute = "mode";
  CHECK_NOTHROW(cfg.validate());
  cfg.impute = "bogus";
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("config files parse with comments and win order") {
  const fs::path dir = fresh_dir("config");
  write_file(dir / "run.conf",
             "# comment\n"
             "seed = 5\n"
             "k_max = 4\n"
             "agg_max = 4\n"
             "\n"
             "engine = hierarchical\n");
  const RunConfig cfg = parse_config_file((dir / "run.conf").string());
  CHECK(cfg.seed == 5);
  CHECK(cfg.sweep_max == 4);
  CHECK(cfg.reference_engine == EngineKind::Hierarchical);

  write_file(dir / "bad.conf", "seed\n");
  CHECK_THROWS_AS(parse_config_file((dir / "bad.conf").string()), Error);
}

TEST_CASE("the toy pipeline completes and its truth table sums to 100") {
  const PipelineResult r = run_pipeline(toy_dataset(), toy_config());
  CHECK(r.n_loaded == 4);
  CHECK(r.n_after_subset == 4);
  CHECK((r.chosen_k == 2 || r.chosen_k == 3));
  REQUIRE(r.partitions.size() == 4);
  for (const auto& [name, p] : r.partitions) CHECK(p.labels.size() == 4);
  CHECK(r.consensus.consensus_labels.size() == 4);
  REQUIRE(r.truth.has_value());
  CHECK(r.truth->sum() == doctest::Approx(100.0));
  REQUIRE(r.survival.has_value());
  CHECK(r.ari_vs_reference.at("kmeans") == doctest::Approx(1.0));
}

TEST_CASE("the run report is valid JSON and byte-stable") {
  const PipelineResult r1 = run_pipeline(toy_dataset(), toy_config());
  const PipelineResult r2 = run_pipeline(toy_dataset(), toy_config());
  const std::string a = run_report_json(r1);
  const std::string b = run_report_json(r2);
  CHECK(a == b);

  const nlohmann::json doc = nlohmann::json::parse(a);
  CHECK(doc.contains("config"));
  CHECK(doc.contains("selection"));
  CHECK(doc.contains("consensus"));
  CHECK(doc["config"]["seed"] == 11);
  CHECK(doc["cohort"]["n_loaded"] == 4);
  CHECK(doc["selection"]["chosen_k"] == r1.chosen_k);
  // no floating-point infinities may survive serialization
  CHECK(a.find("inf") == std::string::npos);
  CHECK(a.find("nan") == std::string::npos);
}

TEST_CASE("pipeline stage errors carry their stage") {
  RunConfig cfg = toy_config();
  cfg.tnm_stages = {4};  // nobody is stage 4 -> empty cohort
  try {
    run_pipeline(toy_dataset(), cfg);
    FAIL("expected a stage error");
  } catch (const StageError& e) {
    CHECK(e.stage() == "subset");
  }

  cfg = toy_config();
  cfg.sweep_max = 10;  // more clusters than patients
  try {
    run_pipeline(toy_dataset(), cfg);
    FAIL("expected a stage error");
  } catch (const StageError& e) {
    CHECK(e.stage() == "matrix");
  }
}

TEST_CASE("cli: help exits zero, bad flags exit two") {
  const fs::path dir = fresh_dir("cli_help");
  CHECK(run_cli("--help", dir).exit_code == 0);
  CHECK(run_cli("pipeline --no-such-flag", dir).exit_code == 2);
  CHECK(run_cli("", dir).exit_code == 2);  // a subcommand is required
}

TEST_CASE("cli: pipeline runs the toy cohort end to end") {
  const fs::path dir = fresh_dir("cli_toy");
  write_toy_files(dir);
  const std::string common = "pipeline --input \"" + (dir / "toy.csv").string() +
                             "\" --schema \"" + (dir / "toy.schema").string() +
                             "\" --seed 11 --set k_min=2 --set k_max=3 --set agg_max=3";

  const CliResult run1 =
      run_cli(common + " --out \"" + (dir / "run1").string() + "\"", dir);
  CAPTURE(run1.err);
  CHECK(run1.exit_code == 0);
  CHECK(fs::exists(dir / "run1" / "run_report.json"));
  CHECK(fs::exists(dir / "run1" / "index_table.csv"));
  CHECK(fs::exists(dir / "run1" / "consensus.csv"));
  CHECK(fs::exists(dir / "run1" / "truth_table.csv"));
  CHECK(fs::exists(dir / "run1" / "survival_by_cluster.csv"));
  CHECK(fs::exists(dir / "run1" / "attribute_deviation.csv"));
  CHECK(fs::exists(dir / "run1" / "partition_kmeans.csv"));

  const CliResult run2 =
      run_cli(common + " --out \"" + (dir / "run2").string() + "\"", dir);
  CHECK(run2.exit_code == 0);
  CHECK(read_text_file((dir / "run1" / "run_report.json").string()) ==
        read_text_file((dir / "run2" / "run_report.json").string()));

  SUBCASE("a non-empty output directory is refused without force") {
    const CliResult clash =
        run_cli(common + " --out \"" + (dir / "run1").string() + "\"", dir);
    CHECK(clash.exit_code == 2);
    const CliResult forced =
        run_cli(common + " --out \"" + (dir / "run1").string() + "\" --force", dir);
    CHECK(forced.exit_code == 0);
  }
}

TEST_CASE("cli: exit codes distinguish input errors from stage failures") {
  const fs::path dir = fresh_dir("cli_codes");
  write_toy_files(dir);
  SUBCASE("missing input file exits 2") {
    const CliResult r = run_cli("pipeline --input /nonexistent.csv --schema \"" +
                                    (dir / "toy.schema").string() + "\" --out \"" +
                                    (dir / "out").string() + "\"",
                                dir);
    CHECK(r.exit_code == 2);
  }
  SUBCASE("malformed data exits 2 with a line number") {
    write_file(dir / "bad.csv", "m1,m2,tnm_stage,survival_months\n0,3,1,20\n");
    const CliResult r = run_cli("pipeline --input \"" + (dir / "bad.csv").string() +
                                    "\" --schema \"" + (dir / "toy.schema").string() +
                                    "\" --out \"" + (dir / "out").string() + "\"",
                                dir);
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("line 2") != std::string::npos);
  }
  SUBCASE("a mid-pipeline failure exits 3") {
    const CliResult r = run_cli(
        "pipeline --input \"" + (dir / "toy.csv").string() + "\" --schema \"" +
            (dir / "toy.schema").string() + "\" --set k_max=10 --out \"" +
            (dir / "out").string() + "\"",
        dir);
    CHECK(r.exit_code == 3);
    CHECK(r.err.find("[matrix]") != std::string::npos);
  }
  SUBCASE("unknown config keys exit 2") {
    const CliResult r = run_cli(
        "pipeline --input \"" + (dir / "toy.csv").string() + "\" --schema \"" +
            (dir / "toy.schema").string() + "\" --set bogus=1 --out \"" +
            (dir / "out").string() + "\"",
        dir);
    CHECK(r.exit_code == 2);
  }
}

TEST_CASE("cli: synth, profile, and sweep round trip") {
  const fs::path dir = fresh_dir("cli_synth");
  const CliResult synth = run_cli(
      "synth --out \"" + (dir / "cohort").string() +
          "\" --seed 3 --set n_patients=50 --set n_binary=8 --set k_true=2"
          " --set missing_rate=0.05",
      dir);
  CAPTURE(synth.err);
  REQUIRE(synth.exit_code == 0);
  REQUIRE(fs::exists(dir / "cohort" / "cohort.csv"));
  REQUIRE(fs::exists(dir / "cohort" / "cohort.schema"));
  REQUIRE(fs::exists(dir / "cohort" / "truth.csv"));

  const std::string data_flags = "--input \"" + (dir / "cohort" / "cohort.csv").string() +
                                 "\" --schema \"" +
                                 (dir / "cohort" / "cohort.schema").string() + "\"";

  const CliResult profile = run_cli("profile " + data_flags, dir);
  REQUIRE(profile.exit_code == 0);
  const nlohmann::json doc = nlohmann::json::parse(profile.out);
  CHECK(doc["n_patients"] == 50);
  CHECK(doc["overall_fraction"].get<double>() > 0.0);

  const CliResult sweep = run_cli(
      "sweep --mode patients " + data_flags +
          " --set sweep_step=15 --set patient_floor=20 --set k_max=4 --set agg_max=4"
          " --set restarts=6",
      dir);
  CAPTURE(sweep.err);
  REQUIRE(sweep.exit_code == 0);
  const nlohmann::json curve = nlohmann::json::parse(sweep.out);
  CHECK(curve["mode"] == "patients");
  CHECK(curve["points"].size() == 3);  // 50, 35, 20

  SUBCASE("identical synth seeds produce identical files") {
    const CliResult again = run_cli(
        "synth --out \"" + (dir / "cohort2").string() +
            "\" --seed 3 --set n_patients=50 --set n_binary=8 --set k_true=2"
            " --set missing_rate=0.05",
        dir);
    REQUIRE(again.exit_code == 0);
    CHECK(read_text_file((dir / "cohort" / "cohort.csv").string()) ==
          read_text_file((dir / "cohort2" / "cohort.csv").string()));
    CHECK(read_text_file((dir / "cohort" / "truth.csv").string()) ==
          read_text_file((dir / "cohort2" / "truth.csv").string()));
  }
  SUBCASE("an infeasible synthetic spec exits 2") {
    const CliResult bad = run_cli(
        "synth --out \"" + (dir / "bad").string() +
            "\" --set n_binary=3 --set k_true=8 --set n_patients=16 --set separation=1",
        dir);
    CHECK(bad.exit_code == 2);
  }
}
