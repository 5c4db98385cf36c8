// Acceptance suite: one self-contained check per numbered criterion, each
// printing a single PASS/FAIL line. Reference values come from the
// independent brute-force implementations in oracles.hpp, never from the
// library under test.
#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cohort/consensus.hpp"
#include "cohort/dataset.hpp"
#include "cohort/engines.hpp"
#include "cohort/pipeline.hpp"
#include "cohort/reporting.hpp"
#include "cohort/selection.hpp"
#include "cohort/synth.hpp"
#include "cohort/validity.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace cohort;

namespace {

std::string g_cli;  // path to the cohort binary, used by criterion 8

struct Failure {
  std::string reason;
};

using Outcome = std::optional<Failure>;  // empty = pass

Outcome pass() { return std::nullopt; }
Outcome fail(std::string reason) { return Failure{std::move(reason)}; }

bool close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

Matrix to_matrix(const oracle::Points& pts) {
  Matrix x = Matrix::zeros(pts.size(), pts.empty() ? 0 : pts[0].size());
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < pts[i].size(); ++j) x.at(i, j) = pts[i][j];
  return x;
}

// ---------------------------------------------------------------------------
// Criterion 1: CH, DB, Dunn, and silhouette match an independent brute-force
// implementation to 1e-10 over exhaustively enumerated partitions (n <= 6,
// d <= 3, k <= 3); trace(T) = trace(W) + trace(B) to 1e-8.
// ---------------------------------------------------------------------------
Outcome criterion_1() {
  std::size_t comparisons = 0;
  for (std::size_t n = 3; n <= 6; ++n) {
    for (std::size_t d = 1; d <= 3; ++d) {
      for (std::uint64_t rep = 0; rep < 3; ++rep) {
        const auto pts = oracle::random_points(n, d, 1000 + 100 * n + 10 * d + rep);
        const Matrix x = to_matrix(pts);
        for (int k = 1; k <= std::min<std::size_t>(3, n); ++k) {
          for (const auto& labels : oracle::all_partitions(n, k)) {
            const Partition p = make_partition(labels, k, 0.0);
            const ScatterSummary s = scatter(x, p);
            const double identity_gap =
                std::abs(s.trace_total() - (s.trace_within() + s.trace_between()));
            if (identity_gap > 1e-8)
              return fail("scatter identity off by " + std::to_string(identity_gap));

            struct Pair {
              const char* name;
              oracle::Score ref;
              IndexScore lib;
            };
            const Pair pairs[] = {
                {"calinski_harabasz", oracle::bf_calinski_harabasz(pts, labels, k),
                 index_calinski_harabasz(s, n, k)},
                {"davies_bouldin", oracle::bf_davies_bouldin(pts, labels, k),
                 index_davies_bouldin(x, p)},
                {"silhouette", oracle::bf_silhouette(pts, labels, k), index_silhouette(x, p)},
                {"dunn", oracle::bf_dunn(pts, labels, k), index_dunn(x, p)},
            };
            for (const auto& pair : pairs) {
              ++comparisons;
              if (pair.ref.finite) {
                if (!pair.lib.is_finite())
                  return fail(std::string(pair.name) + ": expected finite, got marker");
                if (!close(pair.lib.value, pair.ref.value, 1e-10))
                  return fail(std::string(pair.name) + ": " + std::to_string(pair.lib.value) +
                              " vs reference " + std::to_string(pair.ref.value));
              } else if (pair.ref.infinite) {
                if (pair.lib.kind != IndexScore::Kind::PositiveInfinity)
                  return fail(std::string(pair.name) + ": expected infinity marker");
              } else {
                if (pair.lib.kind != IndexScore::Kind::Degenerate)
                  return fail(std::string(pair.name) + ": expected degenerate marker");
              }
            }
          }
        }
      }
    }
  }
  std::cout << "  criterion 1 detail: " << comparisons << " index comparisons\n";
  return pass();
}

// ---------------------------------------------------------------------------
// Criterion 2: k-means with 64 restarts attains the exhaustive-enumeration
// optimum on 100/100 random instances with n <= 8, k <= 3.
// ---------------------------------------------------------------------------
Outcome criterion_2() {
  int matched = 0;
  for (int c = 0; c < 100; ++c) {
    const std::size_t n = 4 + static_cast<std::size_t>(c) % 5;  // 4..8
    const int k = 2 + c % 2;                                    // 2..3
    const std::size_t d = 1 + static_cast<std::size_t>(c) % 3;  // 1..3
    const auto pts = oracle::random_points(n, d, 2000 + static_cast<std::uint64_t>(c));
    const Partition p = kmeans(to_matrix(pts), k, static_cast<std::uint64_t>(c), 64);
    const double best = oracle::best_kmeans_objective(pts, k);
    if (close(p.objective, best, 1e-9)) ++matched;
    else
      return fail("instance " + std::to_string(c) + ": objective " +
                  std::to_string(p.objective) + " vs optimum " + std::to_string(best));
  }
  std::cout << "  criterion 2 detail: " << matched << "/100 instances optimal\n";
  return pass();
}

// ---------------------------------------------------------------------------
// Shared synthetic-cohort recipe for criteria 3 and 4.
// ---------------------------------------------------------------------------
SyntheticSpec recovery_spec(int seed_index) {
  SyntheticSpec spec;
  spec.n_patients = 300;
  spec.n_binary = 40;
  spec.n_continuous = 0;
  spec.k_true = seed_index < 10 ? 3 : 4;
  spec.flip_prob = 0.05;
  spec.separation = 0.5;
  spec.missing_rate = 0.1;
  spec.seed = 7000 + static_cast<std::uint64_t>(seed_index);
  return spec;
}

Matrix cohort_matrix(const SyntheticCohort& cohort) {
  return prepare_matrix(impute(cohort.dataset, ImputationPlan::modal()));
}

// ---------------------------------------------------------------------------
// Criterion 3: on 300-patient cohorts (40 binary markers, 5% flips, 10%
// missing, k_true in {3,4}), >= 5 of 6 indices choose k_true and both
// aggregation variants choose k_true, on >= 18 of 20 seeds.
// ---------------------------------------------------------------------------
Outcome criterion_3() {
  int good_seeds = 0;
  std::ostringstream detail;
  for (int s = 0; s < 20; ++s) {
    const SyntheticSpec spec = recovery_spec(s);
    const SyntheticCohort cohort = generate(spec);
    const Matrix x = cohort_matrix(cohort);
    // PAM drives the sweep: it is deterministic, and its medoid partitions
    // leave the successive-difference indices their largest jump at k_true,
    // where k-means' near-optimal low-k fits flatten those differences.
    const SelectionResult r = select_k(x, 2, 10, 2, 10, EngineKind::Pam, spec.seed);

    int correct_indices = 0;
    for (const auto& def : default_indices()) {
      const auto it = r.per_index_k.find(def.name);
      if (it != r.per_index_k.end() && it->second == spec.k_true) ++correct_indices;
    }
    const bool ok = correct_indices >= 5 && r.with_friedman.chosen_k == spec.k_true &&
                    r.without_friedman.chosen_k == spec.k_true;
    if (ok) ++good_seeds;
    else
      detail << "    seed " << s << ": " << correct_indices << "/6 indices, with="
             << r.with_friedman.chosen_k << " without=" << r.without_friedman.chosen_k
             << " (k_true " << spec.k_true << ")\n";
  }
  std::cout << "  criterion 3 detail: " << good_seeds << "/20 seeds recovered k_true\n"
            << detail.str();
  return good_seeds >= 18 ? pass()
                          : fail(std::to_string(good_seeds) + "/20 seeds (need 18)");
}

// ---------------------------------------------------------------------------
// Criterion 4: all four engines at k_true with agreement threshold 3 give a
// consensus partition with ARI >= 0.95 against the planted labels and at most
// 10% unassigned patients, on >= 18 of 20 seeds. The ARI is computed over the
// assigned patients (the unassigned carry no consensus label).
// ---------------------------------------------------------------------------
Outcome criterion_4() {
  int good_seeds = 0;
  std::ostringstream detail;
  for (int s = 0; s < 20; ++s) {
    const SyntheticSpec spec = recovery_spec(s);
    const SyntheticCohort cohort = generate(spec);
    const Matrix x = cohort_matrix(cohort);
    EngineParams params;
    params.restarts = 16;
    const auto runs = run_all_engines(x, spec.k_true, spec.seed, params);
    const ConsensusResult consensus = build_consensus(runs, "kmeans", 3);

    std::vector<int> truth_sub, cons_sub;
    for (std::size_t i = 0; i < consensus.n(); ++i) {
      if (consensus.consensus_labels[i] == kUnassigned) continue;
      truth_sub.push_back(cohort.truth.labels[i]);
      cons_sub.push_back(consensus.consensus_labels[i]);
    }
    const double unassigned_fraction =
        static_cast<double>(consensus.unassigned_count()) / static_cast<double>(consensus.n());
    const double ari =
        cons_sub.empty() ? 0.0 : adjusted_rand_index(truth_sub, cons_sub);
    const bool ok = ari >= 0.95 && unassigned_fraction <= 0.10;
    if (ok) ++good_seeds;
    else
      detail << "    seed " << s << ": ari=" << ari
             << " unassigned=" << unassigned_fraction << "\n";
  }
  std::cout << "  criterion 4 detail: " << good_seeds << "/20 seeds recovered consensus\n"
            << detail.str();
  return good_seeds >= 18 ? pass()
                          : fail(std::to_string(good_seeds) + "/20 seeds (need 18)");
}

// ---------------------------------------------------------------------------
// Criterion 5: with cluster-independent TNM labels at n = 400 and k_true = 4,
// every truth-table cell sits within 5 percentage points of the uniform
// expectation and the cells sum to 100 +- 0.01.
// ---------------------------------------------------------------------------
Outcome criterion_5() {
  double worst = 0.0;
  for (int s = 0; s < 5; ++s) {
    SyntheticSpec spec;
    spec.n_patients = 400;
    spec.n_binary = 40;
    spec.k_true = 4;
    spec.flip_prob = 0.05;
    spec.missing_rate = 0.0;
    spec.seed = 7100 + static_cast<std::uint64_t>(s);
    const SyntheticCohort cohort = generate(spec);
    const Dataset& d = cohort.dataset;
    const TruthTable table = truth_table(cohort.truth, d.column(*d.tnm_column()));

    if (std::abs(table.sum() - 100.0) > 0.01)
      return fail("seed " + std::to_string(s) + ": cells sum to " +
                  std::to_string(table.sum()));
    const double expected =
        100.0 / (static_cast<double>(table.groups.size()) * table.categories.size());
    for (std::size_t r = 0; r < table.groups.size(); ++r)
      for (std::size_t c = 0; c < table.categories.size(); ++c) {
        const double dev = std::abs(table.cell(r, c) - expected);
        worst = std::max(worst, dev);
        if (dev >= 5.0)
          return fail("seed " + std::to_string(s) + ": cell (" + std::to_string(r) + "," +
                      std::to_string(c) + ") deviates " + std::to_string(dev) + "pp");
      }
  }
  std::cout << "  criterion 5 detail: worst cell deviation " << worst << "pp over 5 seeds\n";
  return pass();
}

// ---------------------------------------------------------------------------
// Criterion 6: planted survival means (37, 40, 42, 47) on k_true = 4 at
// n = 400 are recovered per consensus cluster: monotone in the planted order
// and within +-2 months, on >= 18 of 20 seeds.
// ---------------------------------------------------------------------------
Outcome criterion_6() {
  const std::vector<double> effect = {37, 40, 42, 47};
  int good_seeds = 0;
  std::ostringstream detail;
  for (int s = 0; s < 20; ++s) {
    SyntheticSpec spec;
    spec.n_patients = 400;
    spec.n_binary = 40;
    spec.k_true = 4;
    spec.flip_prob = 0.05;
    spec.missing_rate = 0.0;
    spec.survival_effect = effect;
    spec.survival_noise = 5.0;
    spec.seed = 7200 + static_cast<std::uint64_t>(s);
    const SyntheticCohort cohort = generate(spec);
    const Matrix x = prepare_matrix(cohort.dataset);
    EngineParams params;
    params.restarts = 16;
    const auto runs = run_all_engines(x, 4, spec.seed, params);
    const ConsensusResult consensus = build_consensus(runs, "kmeans", 3);

    std::vector<int> truth_sub, cons_sub;
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < consensus.n(); ++i) {
      if (consensus.consensus_labels[i] == kUnassigned) continue;
      truth_sub.push_back(cohort.truth.labels[i]);
      cons_sub.push_back(consensus.consensus_labels[i]);
      rows.push_back(i);
    }
    const auto has_all_k = [](const std::vector<int>& labels) {
      std::vector<bool> seen(4, false);
      for (int l : labels)
        if (l < 0 || l >= 4) return false;
        else seen[l] = true;
      return seen[0] && seen[1] && seen[2] && seen[3];
    };
    if (!has_all_k(truth_sub) || !has_all_k(cons_sub)) {
      detail << "    seed " << s << ": a cluster vanished among assigned patients\n";
      continue;
    }

    // map consensus clusters into the planted label space, then average
    // survival per planted cluster
    const Partition truth_part = make_partition(truth_sub, 4, 0.0);
    const Partition aligned = align_labels(truth_part, make_partition(cons_sub, 4, 0.0));
    const std::size_t surv_col = *cohort.dataset.survival_column();
    double mean[4] = {0, 0, 0, 0};
    std::size_t count[4] = {0, 0, 0, 0};
    for (std::size_t j = 0; j < rows.size(); ++j) {
      mean[aligned.labels[j]] += *cohort.dataset.cell(rows[j], surv_col);
      ++count[aligned.labels[j]];
    }
    bool ok = true;
    for (int c = 0; c < 4; ++c) {
      if (count[c] == 0) {
        ok = false;
        break;
      }
      mean[c] /= static_cast<double>(count[c]);
      if (std::abs(mean[c] - effect[c]) > 2.0) ok = false;
    }
    for (int c = 1; ok && c < 4; ++c)
      if (!(mean[c] > mean[c - 1])) ok = false;
    if (ok) ++good_seeds;
    else
      detail << "    seed " << s << ": means " << mean[0] << " " << mean[1] << " " << mean[2]
             << " " << mean[3] << "\n";
  }
  std::cout << "  criterion 6 detail: " << good_seeds << "/20 seeds recovered the gradient\n"
            << detail.str();
  return good_seeds >= 18 ? pass()
                          : fail(std::to_string(good_seeds) + "/20 seeds (need 18)");
}

// ---------------------------------------------------------------------------
// Criterion 7: on a clean cohort, the patient sweep (300 -> 100) and the
// attribute sweep (40 -> 20) choose k_true at >= 90% of their points.
// ---------------------------------------------------------------------------
Outcome criterion_7() {
  SyntheticSpec spec;
  spec.n_patients = 300;
  spec.n_binary = 40;
  spec.k_true = 3;
  spec.flip_prob = 0.02;
  spec.missing_rate = 0.0;
  spec.seed = 7300;
  const SyntheticCohort cohort = generate(spec);

  SelectionConfig cfg;
  cfg.sweep_min = 2;
  cfg.sweep_max = 8;
  cfg.agg_min = 2;
  cfg.agg_max = 8;
  cfg.engine = EngineKind::KMeans;
  cfg.params.restarts = 10;
  cfg.seed = spec.seed;
  cfg.use_friedman = false;
  cfg.plan = ImputationPlan::modal();
  cfg.patient_floor = 100;
  cfg.attribute_floor = 20;

  const SweepCurve patients = sweep_patients(cohort.dataset, 20, cfg);
  std::size_t patient_hits = 0;
  for (const auto& pt : patients.points)
    if (pt.chosen_k == spec.k_true) ++patient_hits;
  if (patients.points.size() != 11)
    return fail("patient sweep produced " + std::to_string(patients.points.size()) +
                " points, expected 11");

  const SweepCurve attributes = sweep_attributes(cohort.dataset, cfg);
  std::size_t attribute_hits = 0;
  for (const auto& pt : attributes.points)
    if (pt.chosen_k == spec.k_true) ++attribute_hits;
  if (attributes.points.size() != 21)
    return fail("attribute sweep produced " + std::to_string(attributes.points.size()) +
                " points, expected 21");

  std::cout << "  criterion 7 detail: patients " << patient_hits << "/11, attributes "
            << attribute_hits << "/21 points at k_true\n";
  const bool patients_ok =
      patient_hits * 10 >= patients.points.size() * 9;  // >= 90%
  const bool attributes_ok = attribute_hits * 10 >= attributes.points.size() * 9;
  if (!patients_ok)
    return fail("patient sweep hit k_true at only " + std::to_string(patient_hits) +
                "/11 points");
  if (!attributes_ok)
    return fail("attribute sweep hit k_true at only " + std::to_string(attribute_hits) +
                "/21 points");
  return pass();
}

// ---------------------------------------------------------------------------
// Criterion 8: two full pipeline CLI runs with identical config and seed
// produce byte-identical output files.
// ---------------------------------------------------------------------------
int spawn(const std::string& args, const fs::path& scratch) {
  const fs::path out_file = scratch / "spawn_stdout.txt";
  const fs::path err_file = scratch / "spawn_stderr.txt";
  const std::string command = "\"" + g_cli + "\" " + args + " > \"" + out_file.string() +
                              "\" 2> \"" + err_file.string() + "\"";
  const int status = std::system(command.c_str());
  if (!WIFEXITED(status)) return -1;
  const int code = WEXITSTATUS(status);
  if (code != 0) {
    std::ifstream err(err_file);
    std::string line;
    while (std::getline(err, line)) std::cout << "    stderr: " << line << "\n";
  }
  return code;
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream body;
    body << in.rdbuf();
    files[fs::relative(entry.path(), root).string()] = body.str();
  }
  return files;
}

Outcome criterion_8() {
  if (g_cli.empty()) return fail("no --cli path supplied");
  const fs::path scratch = fs::temp_directory_path() / "cohort_acceptance_8";
  fs::remove_all(scratch);
  fs::create_directories(scratch);

  const std::string synth_args =
      "synth --out \"" + (scratch / "cohort").string() +
      "\" --seed 5 --set n_patients=120 --set n_binary=16 --set k_true=3"
      " --set missing_rate=0.08";
  if (spawn(synth_args, scratch) != 0) return fail("synth run failed");

  const std::string pipeline_args =
      "pipeline --input \"" + (scratch / "cohort" / "cohort.csv").string() +
      "\" --schema \"" + (scratch / "cohort" / "cohort.schema").string() +
      "\" --seed 17 --set k_max=6 --set agg_max=6 --set restarts=8"
      " --set coassignment=true";
  if (spawn(pipeline_args + " --out \"" + (scratch / "run1").string() + "\"", scratch) != 0)
    return fail("first pipeline run failed");
  if (spawn(pipeline_args + " --out \"" + (scratch / "run2").string() + "\"", scratch) != 0)
    return fail("second pipeline run failed");

  const auto tree1 = read_tree(scratch / "run1");
  const auto tree2 = read_tree(scratch / "run2");
  if (tree1.empty()) return fail("first run wrote no files");
  if (tree1.size() != tree2.size())
    return fail("file lists differ: " + std::to_string(tree1.size()) + " vs " +
                std::to_string(tree2.size()));
  for (const auto& [name, body] : tree1) {
    const auto it = tree2.find(name);
    if (it == tree2.end()) return fail("second run lacks " + name);
    if (it->second != body) return fail("file " + name + " differs between runs");
  }
  std::cout << "  criterion 8 detail: " << tree1.size() << " files byte-identical\n";
  return pass();
}

// ---------------------------------------------------------------------------
// Criterion 9: property families with >= 1000 random cases each.
// ---------------------------------------------------------------------------
Outcome property_imputation_idempotence() {
  std::mt19937_64 rng(90001);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng() % 11;
    const std::size_t m = 1 + rng() % 5;
    std::vector<AttributeSpec> specs;
    for (std::size_t j = 0; j < m; ++j) {
      const int kind_pick = static_cast<int>(rng() % 3);
      AttributeSpec spec;
      spec.name = "a" + std::to_string(j);
      spec.kind = kind_pick == 0   ? AttributeKind::Binary
                  : kind_pick == 1 ? AttributeKind::Continuous
                                   : AttributeKind::Categorical;
      spec.role = rng() % 4 == 0 ? AttributeRole::Outcome
                  : rng() % 2 == 0 ? AttributeRole::Marker
                                   : AttributeRole::Clinical;
      specs.push_back(spec);
    }
    std::vector<std::vector<Cell>> rows(n, std::vector<Cell>(m));
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t guaranteed = rng() % n;  // keeps the column imputable
      for (std::size_t i = 0; i < n; ++i) {
        if (i != guaranteed && u(rng) < 0.3) {
          rows[i][j] = std::nullopt;
          continue;
        }
        switch (specs[j].kind) {
          case AttributeKind::Binary: rows[i][j] = Cell(static_cast<double>(rng() % 2)); break;
          case AttributeKind::Continuous: rows[i][j] = Cell(std::round(u(rng) * 8) / 2); break;
          case AttributeKind::Categorical:
            rows[i][j] = Cell(static_cast<double>(1 + rng() % 4));
            break;
        }
      }
    }
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("p" + std::to_string(i));
    const Dataset d(specs, rows, ids);

    ImputationPlan plan;
    plan.continuous_default = rng() % 3 == 0   ? ImputeStrategy::Mean
                              : rng() % 2 == 0 ? ImputeStrategy::Median
                                               : ImputeStrategy::Mode;
    const Dataset once = impute(d, plan);
    const Dataset twice = impute(once, plan);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        if (once.cell(i, j) != twice.cell(i, j))
          return fail("imputation not idempotent on trial " + std::to_string(trial));
        if (d.spec(j).is_clustering_input() && !once.cell(i, j).has_value())
          return fail("clustering cell left missing on trial " + std::to_string(trial));
        if (d.cell(i, j).has_value() && once.cell(i, j) != d.cell(i, j))
          return fail("imputation changed an observed cell on trial " + std::to_string(trial));
      }
  }
  return pass();
}

Outcome property_rank_sum() {
  std::mt19937_64 rng(90002);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t m = 2 + rng() % 7;
    IndexTable t;
    for (std::size_t i = 0; i < m; ++i) t.k_values.push_back(static_cast<int>(i) + 2);
    const DecisionRule rule = trial % 3 == 0   ? DecisionRule::Maximize
                              : trial % 3 == 1 ? DecisionRule::Minimize
                                               : DecisionRule::MaxSuccessiveDifference;
    t.indices = {{"prop", rule}};
    std::vector<IndexScore> row;
    for (std::size_t i = 0; i < m; ++i) {
      const int kind = static_cast<int>(rng() % 5);
      if (kind == 0) row.push_back(IndexScore::infinite());
      else if (kind == 1) row.push_back(IndexScore::degenerate());
      else row.push_back(IndexScore::finite(std::round(u(rng) * 6) / 3));  // forces ties
    }
    t.scores = {row};
    const auto ranks = rank_candidates(t);
    double sum = 0;
    for (double r : ranks[0].ranks) sum += r;
    const double expected = static_cast<double>(m) * (static_cast<double>(m) + 1) / 2.0;
    if (std::abs(sum - expected) > 1e-9)
      return fail("rank sum " + std::to_string(sum) + " != " + std::to_string(expected) +
                  " on trial " + std::to_string(trial));
  }
  return pass();
}

Outcome property_deviation_weighted_sum() {
  std::mt19937_64 rng(90003);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 4 + rng() % 12;
    const int k = 2 + static_cast<int>(rng() % 3);
    if (static_cast<std::size_t>(k) > n) continue;
    const std::size_t m = 1 + rng() % 4;
    std::vector<AttributeSpec> specs;
    for (std::size_t j = 0; j < m; ++j)
      specs.push_back({"a" + std::to_string(j), AttributeKind::Continuous,
                       AttributeRole::Clinical});
    std::vector<std::vector<Cell>> rows(n, std::vector<Cell>(m));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) rows[i][j] = Cell(std::round(u(rng) * 10) / 2);
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("p" + std::to_string(i));
    const Dataset d(specs, rows, ids);

    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i) % k;
    std::shuffle(labels.begin(), labels.end(), rng);
    const Partition p = make_partition(labels, k, 0.0);

    const DeviationTable t = attribute_deviation(d, p);
    const auto sizes = p.cluster_sizes();
    for (std::size_t a = 0; a < t.attributes.size(); ++a) {
      if (!t.cell(a, 0).defined) continue;
      double weighted = 0, scale = 1;
      for (int c = 0; c < k; ++c) {
        weighted += t.cell(a, c).percent * static_cast<double>(sizes[c]);
        scale += std::abs(t.cell(a, c).percent) * static_cast<double>(sizes[c]);
      }
      if (std::abs(weighted) > 1e-7 * scale)
        return fail("weighted deviation sum " + std::to_string(weighted) + " on trial " +
                    std::to_string(trial));
    }
  }
  return pass();
}

Outcome property_ari_permutation_invariance() {
  std::mt19937_64 rng(90004);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 3 + rng() % 14;
    std::vector<int> a(n), b(n);
    for (auto& v : a) v = static_cast<int>(rng() % (1 + rng() % 5));
    for (auto& v : b) v = static_cast<int>(rng() % (1 + rng() % 5));
    const double base = adjusted_rand_index(a, b);
    if (std::abs(base - oracle::bf_ari(a, b)) > 1e-12)
      return fail("ARI disagrees with the pair-counting oracle on trial " +
                  std::to_string(trial));

    std::vector<int> perm(8);
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<int> pa(n), pb(n);
    for (std::size_t i = 0; i < n; ++i) {
      pa[i] = perm[a[i]];
      pb[i] = perm[b[i]];
    }
    if (std::abs(adjusted_rand_index(pa, b) - base) > 1e-12 ||
        std::abs(adjusted_rand_index(a, pb) - base) > 1e-12 ||
        std::abs(adjusted_rand_index(pa, pb) - base) > 1e-12)
      return fail("ARI changed under relabeling on trial " + std::to_string(trial));
  }
  return pass();
}

Outcome property_threshold_monotonicity() {
  std::mt19937_64 rng(90005);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 4 + rng() % 9;
    const int k = 2 + static_cast<int>(rng() % 3);
    if (static_cast<std::size_t>(k) > n) continue;
    const int engines = 2 + static_cast<int>(rng() % 3);
    std::vector<std::pair<std::string, Partition>> runs;
    for (int e = 0; e < engines; ++e) {
      std::vector<int> labels(n);
      for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i) % k;
      std::shuffle(labels.begin(), labels.end(), rng);
      runs.emplace_back("e" + std::to_string(e), make_partition(labels, k, 0.0));
    }
    std::size_t prev = 0;
    for (int threshold = 1; threshold <= engines; ++threshold) {
      const ConsensusResult c = build_consensus(runs, "e0", threshold);
      if (c.unassigned_count() < prev)
        return fail("unassigned count decreased at threshold " + std::to_string(threshold) +
                    " on trial " + std::to_string(trial));
      prev = c.unassigned_count();
    }
  }
  return pass();
}

Outcome criterion_9() {
  struct Family {
    const char* name;
    Outcome (*run)();
  };
  const Family families[] = {
      {"imputation idempotence", property_imputation_idempotence},
      {"rank-sum conservation", property_rank_sum},
      {"deviation weighted-sum zero", property_deviation_weighted_sum},
      {"ARI permutation invariance", property_ari_permutation_invariance},
      {"consensus threshold monotonicity", property_threshold_monotonicity},
  };
  for (const auto& family : families) {
    const Outcome result = family.run();
    if (result) return fail(std::string(family.name) + ": " + result->reason);
    std::cout << "  criterion 9 detail: " << family.name << " held on 1000 cases\n";
  }
  return pass();
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> chosen;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--cli" && i + 1 < argc) {
      g_cli = argv[++i];
    } else {
      try {
        chosen.push_back(std::stoi(arg));
      } catch (...) {
        std::cerr << "usage: cohort_acceptance [--cli PATH] [criterion...]\n";
        return 2;
      }
    }
  }
  if (chosen.empty()) chosen = {1, 2, 3, 4, 5, 6, 7, 8, 9};

  using Runner = Outcome (*)();
  const std::map<int, Runner> runners = {
      {1, criterion_1}, {2, criterion_2}, {3, criterion_3},
      {4, criterion_4}, {5, criterion_5}, {6, criterion_6},
      {7, criterion_7}, {8, criterion_8}, {9, criterion_9},
  };

  bool all_ok = true;
  for (int n : chosen) {
    const auto it = runners.find(n);
    if (it == runners.end()) {
      std::cerr << "unknown criterion " << n << "\n";
      return 2;
    }
    Outcome result;
    try {
      result = it->second();
    } catch (const std::exception& e) {
      result = fail(std::string("unexpected exception: ") + e.what());
    }
    if (result) {
      std::cout << "criterion " << n << ": FAIL (" << result->reason << ")\n";
      all_ok = false;
    } else {
      std::cout << "criterion " << n << ": PASS\n";
    }
  }
  return all_ok ? 0 : 1;
}
