#pragma once

#include <cstdint>
#include <vector>

#include "cohort/dataset.hpp"
#include "cohort/engines.hpp"

namespace cohort {

/// Synthetic cohort with planted cluster structure: binary marker prototypes
/// with Bernoulli flip noise, Gaussian age-like covariates, a TNM outcome
/// drawn independently of the planted clusters, and survival drawn around
/// per-cluster means.
struct SyntheticSpec {
  std::size_t n_patients = 300;
  std::size_t n_binary = 40;
  std::size_t n_continuous = 0;
  int k_true = 3;
  double flip_prob = 0.05;
  /// Minimum pairwise prototype Hamming distance as a fraction of n_binary;
  /// also the spacing (in noise sd units) of continuous cluster means.
  double separation = 0.5;
  double missing_rate = 0.0;
  /// Per-cluster mean survival in months; empty derives 36 + 4*cluster.
  std::vector<double> survival_effect;
  double survival_noise = 5.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticCohort {
  Dataset dataset;
  Partition truth;  // planted labels, round-robin balanced
};

/// Deterministic: equal SyntheticSpec values yield equal cohorts. Missing cells are
/// planted only in marker/clinical columns. Errors when no prototype set
/// with the requested separation can be found.
SyntheticCohort generate(const SyntheticSpec& spec);

}  // namespace cohort
