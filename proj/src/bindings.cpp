#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cohort/consensus.hpp"
#include "cohort/dataset.hpp"
#include "cohort/engines.hpp"
#include "cohort/io.hpp"
#include "cohort/selection.hpp"
#include "cohort/synth.hpp"

namespace py = pybind11;
using namespace cohort;

namespace {

Matrix matrix_from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw Error("matrix must have at least one row");
  const std::size_t cols = rows[0].size();
  Matrix x = Matrix::zeros(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) throw Error("matrix rows must share one width");
    for (std::size_t j = 0; j < cols; ++j) x.at(i, j) = rows[i][j];
  }
  return x;
}

py::tuple partition_tuple(const Partition& p) {
  return py::make_tuple(p.labels, p.objective);
}

ImputationPlan plan_from_args(const std::string& default_strategy,
                              const std::map<std::string, std::string>& overrides) {
  ImputationPlan plan;
  plan.continuous_default = impute_strategy_from_string(default_strategy);
  for (const auto& [name, strategy] : overrides)
    plan.overrides[name] = impute_strategy_from_string(strategy);
  return plan;
}

py::dict score_dict(const IndexScore& score) {
  py::dict out;
  switch (score.kind) {
    case IndexScore::Kind::Finite:
      out["kind"] = "finite";
      out["value"] = score.value;
      break;
    case IndexScore::Kind::PositiveInfinity:
      out["kind"] = "infinity";
      out["value"] = py::none();
      break;
    case IndexScore::Kind::Degenerate:
      out["kind"] = "degenerate";
      out["value"] = py::none();
      break;
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Consensus clustering for thresholded biomarker cohorts";

  py::register_exception<Error>(m, "CohortError");

  py::class_<Dataset>(m, "Dataset")
      .def_property_readonly("n_patients", &Dataset::n_patients)
      .def_property_readonly("n_attributes", &Dataset::n_attributes)
      .def_property_readonly("patient_ids",
                             [](const Dataset& d) { return d.patient_ids(); })
      .def_property_readonly("attribute_names",
                             [](const Dataset& d) {
                               std::vector<std::string> names;
                               for (const auto& s : d.specs()) names.push_back(s.name);
                               return names;
                             })
      .def_property_readonly("attribute_kinds",
                             [](const Dataset& d) {
                               std::vector<std::string> kinds;
                               for (const auto& s : d.specs())
                                 kinds.push_back(to_string(s.kind));
                               return kinds;
                             })
      .def_property_readonly("attribute_roles",
                             [](const Dataset& d) {
                               std::vector<std::string> roles;
                               for (const auto& s : d.specs())
                                 roles.push_back(to_string(s.role));
                               return roles;
                             })
      .def("cell",
           [](const Dataset& d, std::size_t i, std::size_t j) -> std::optional<double> {
             if (i >= d.n_patients() || j >= d.n_attributes())
               throw Error("cell index out of range");
             return d.cell(i, j);
           },
           py::arg("row"), py::arg("column"))
      .def("missingness",
           [](const Dataset& d) {
             const MissingnessReport r = missingness_profile(d);
             py::dict out;
             out["overall_fraction"] = r.overall_fraction;
             out["per_attribute"] = r.per_attribute;
             out["per_patient"] = r.per_patient;
             return out;
           })
      .def("impute",
           [](const Dataset& d, const std::string& strategy,
              const std::map<std::string, std::string>& overrides) {
             return impute(d, plan_from_args(strategy, overrides));
           },
           py::arg("strategy") = "mean",
           py::arg("overrides") = std::map<std::string, std::string>{})
      .def("filter_attributes",
           [](const Dataset& d, double max_missing, double corr_threshold,
              const std::vector<std::string>& drop) {
             return filter_attributes(d, max_missing, corr_threshold, drop);
           },
           py::arg("max_missing") = 1.0, py::arg("corr_threshold") = 1.0,
           py::arg("drop") = std::vector<std::string>{})
      .def("subset_by_tnm",
           [](const Dataset& d, const std::vector<int>& stages) {
             return subset_by_tnm(d, std::set<int>(stages.begin(), stages.end()));
           },
           py::arg("stages"))
      .def("to_matrix",
           [](const Dataset& d) {
             const Matrix x = prepare_matrix(d);
             std::vector<std::vector<double>> rows(x.rows, std::vector<double>(x.cols));
             for (std::size_t i = 0; i < x.rows; ++i)
               for (std::size_t j = 0; j < x.cols; ++j) rows[i][j] = x.at(i, j);
             return py::make_tuple(rows, x.column_names, x.warnings);
           },
           "Marker/clinical columns as a fully numeric row-major matrix "
           "(binary passed through, the rest min-max scaled); returns "
           "(rows, column_names, warnings).");

  m.def("load_dataset",
        [](const std::string& path, const std::string& schema_path,
           const std::string& delimiter, const std::string& missing_token) {
          LoadOptions options;
          if (delimiter.size() != 1) throw Error("delimiter must be a single character");
          options.delimiter = delimiter[0];
          options.missing_token = missing_token;
          return load_dataset_file(path, schema_path, options);
        },
        py::arg("path"), py::arg("schema_path"), py::arg("delimiter") = ",",
        py::arg("missing_token") = "NA");

  m.def("kmeans",
        [](const std::vector<std::vector<double>>& rows, int k, std::uint64_t seed,
           int restarts, int max_iter) {
          return partition_tuple(kmeans(matrix_from_rows(rows), k, seed, restarts, max_iter));
        },
        py::arg("x"), py::arg("k"), py::arg("seed") = 0, py::arg("restarts") = 32,
        py::arg("max_iter") = 100);

  m.def("pam",
        [](const std::vector<std::vector<double>>& rows, int k) {
          return partition_tuple(pam(matrix_from_rows(rows), k));
        },
        py::arg("x"), py::arg("k"));

  m.def("hierarchical",
        [](const std::vector<std::vector<double>>& rows, int k, const std::string& linkage) {
          return partition_tuple(
              hierarchical(matrix_from_rows(rows), k, linkage_from_string(linkage)));
        },
        py::arg("x"), py::arg("k"), py::arg("linkage") = "average");

  m.def("fuzzy_cmeans",
        [](const std::vector<std::vector<double>>& rows, int k, double m_exp,
           std::uint64_t seed, double eps, int max_iter) {
          const FuzzyMembership u =
              fuzzy_cmeans(matrix_from_rows(rows), k, m_exp, seed, eps, max_iter);
          return partition_tuple(harden(u));
        },
        py::arg("x"), py::arg("k"), py::arg("m") = 2.0, py::arg("seed") = 0,
        py::arg("eps") = 1e-6, py::arg("max_iter") = 300);

  m.def("run_all_engines",
        [](const std::vector<std::vector<double>>& rows, int k, std::uint64_t seed) {
          const Matrix x = matrix_from_rows(rows);
          py::list out;
          for (const auto& [name, p] : run_all_engines(x, k, seed))
            out.append(py::make_tuple(name, p.labels, p.objective));
          return out;
        },
        py::arg("x"), py::arg("k"), py::arg("seed") = 0,
        "All four engines in order; returns [(name, labels, objective)].");

  m.def("evaluate_indices",
        [](const std::vector<std::vector<double>>& rows, const std::vector<int>& labels,
           int k) {
          const Matrix x = matrix_from_rows(rows);
          const Partition p = make_partition(labels, k, 0.0);
          const auto scores = evaluate_indices(x, p);
          const auto& defs = default_indices();
          py::dict out;
          for (std::size_t i = 0; i < defs.size(); ++i)
            out[defs[i].name.c_str()] = score_dict(scores[i]);
          return out;
        },
        py::arg("x"), py::arg("labels"), py::arg("k"));

  m.def("select_k",
        [](const std::vector<std::vector<double>>& rows, int sweep_min, int sweep_max,
           int agg_min, int agg_max, const std::string& engine, std::uint64_t seed) {
          const SelectionResult r =
              select_k(matrix_from_rows(rows), sweep_min, sweep_max, agg_min, agg_max,
                       engine_kind_from_string(engine), seed);
          py::dict out;
          out["k_values"] = r.table.k_values;
          out["per_index_k"] = r.per_index_k;
          py::dict with, without;
          with["chosen_k"] = r.with_friedman.chosen_k;
          with["k_values"] = r.with_friedman.k_values;
          with["mean_rank"] = r.with_friedman.mean_rank;
          with["score"] = r.with_friedman.score;
          without["chosen_k"] = r.without_friedman.chosen_k;
          without["k_values"] = r.without_friedman.k_values;
          without["mean_rank"] = r.without_friedman.mean_rank;
          without["score"] = r.without_friedman.score;
          out["with_friedman"] = with;
          out["without_friedman"] = without;
          return out;
        },
        py::arg("x"), py::arg("sweep_min") = 2, py::arg("sweep_max") = 10,
        py::arg("agg_min") = 2, py::arg("agg_max") = 10, py::arg("engine") = "kmeans",
        py::arg("seed") = 0);

  m.def("align_labels",
        [](const std::vector<int>& reference, const std::vector<int>& other, int k) {
          const Partition aligned =
              align_labels(make_partition(reference, k, 0.0), make_partition(other, k, 0.0));
          return aligned.labels;
        },
        py::arg("reference"), py::arg("other"), py::arg("k"));

  m.def("build_consensus",
        [](const std::vector<std::pair<std::string, std::vector<int>>>& partitions, int k,
           const std::string& reference, int threshold) {
          std::vector<std::pair<std::string, Partition>> runs;
          for (const auto& [name, labels] : partitions)
            runs.emplace_back(name, make_partition(labels, k, 0.0));
          const ConsensusResult c = build_consensus(runs, reference, threshold);
          py::dict out;
          out["reference"] = c.reference_engine;
          out["labels"] = c.consensus_labels;
          out["agreement"] = c.agreement;
          out["k"] = c.k;
          out["threshold"] = c.threshold;
          out["n_unassigned"] = c.unassigned_count();
          py::dict aligned;
          for (std::size_t e = 0; e < c.engine_names.size(); ++e)
            aligned[c.engine_names[e].c_str()] = c.aligned[e].labels;
          out["aligned"] = aligned;
          return out;
        },
        py::arg("partitions"), py::arg("k"), py::arg("reference"), py::arg("threshold"),
        "partitions: [(engine_name, labels)]; unassigned patients get label -1.");

  m.def("adjusted_rand_index",
        [](const std::vector<int>& a, const std::vector<int>& b) {
          return adjusted_rand_index(a, b);
        },
        py::arg("a"), py::arg("b"));

  m.def("generate_synthetic",
        [](std::size_t n_patients, std::size_t n_binary, std::size_t n_continuous,
           int k_true, double flip_prob, double separation, double missing_rate,
           const std::vector<double>& survival_effect, double survival_noise,
           std::uint64_t seed) {
          SyntheticSpec spec;
          spec.n_patients = n_patients;
          spec.n_binary = n_binary;
          spec.n_continuous = n_continuous;
          spec.k_true = k_true;
          spec.flip_prob = flip_prob;
          spec.separation = separation;
          spec.missing_rate = missing_rate;
          spec.survival_effect = survival_effect;
          spec.survival_noise = survival_noise;
          spec.seed = seed;
          SyntheticCohort cohort = generate(spec);
          return py::make_tuple(std::move(cohort.dataset), cohort.truth.labels);
        },
        py::arg("n_patients") = 300, py::arg("n_binary") = 40, py::arg("n_continuous") = 0,
        py::arg("k_true") = 3, py::arg("flip_prob") = 0.05, py::arg("separation") = 0.5,
        py::arg("missing_rate") = 0.0,
        py::arg("survival_effect") = std::vector<double>{},
        py::arg("survival_noise") = 5.0, py::arg("seed") = 0,
        "Synthetic cohort with planted clusters; returns (dataset, truth_labels).");
}
