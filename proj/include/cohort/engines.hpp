#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cohort/dataset.hpp"

namespace cohort {

/// Fully present numeric matrix fed to the clustering engines.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // row-major
  bool scaled = false;         // when set, every column lies in [0,1]
  std::vector<std::string> column_names;
  std::vector<std::string> warnings;  // notes from prepare_matrix (constant columns)

  static Matrix zeros(std::size_t rows, std::size_t cols);

  double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  double& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values.data() + i * cols, cols);
  }
};

double squared_distance(std::span<const double> a, std::span<const double> b);
double euclidean_distance(std::span<const double> a, std::span<const double> b);

/// Hard assignment of every row to one of k non-empty clusters, plus the
/// objective of the algorithm that produced it.
struct Partition {
  std::vector<int> labels;
  int k = 0;
  double objective = 0.0;

  std::size_t n() const { return labels.size(); }
  std::vector<std::size_t> cluster_sizes() const;
};

/// Validates the partition invariants (labels in range, clusters non-empty).
Partition make_partition(std::vector<int> labels, int k, double objective);

struct FuzzyMembership {
  std::size_t n = 0;
  int k = 0;
  std::vector<double> u;  // row-major n x k, rows sum to 1
  double fuzzifier = 2.0;
  double objective = 0.0;

  double at(std::size_t i, int j) const { return u[i * static_cast<std::size_t>(k) + j]; }
};

/// Lloyd k-means with squared-Euclidean distance. Each restart initializes
/// from k distinct rows sampled with the seeded generator; the restart with
/// the lowest objective wins (tie: lowest restart index). Empty clusters are
/// repaired by moving the point farthest from its current centroid.
Partition kmeans(const Matrix& x, int k, std::uint64_t seed, int restarts = 32,
                 int max_iter = 100);

/// Classic PAM: BUILD initialization then best-improvement SWAP over
/// Euclidean dissimilarities. Objective is the total distance of points to
/// their medoids. The seed is accepted for interface symmetry; both phases
/// are deterministic.
Partition pam(const Matrix& x, int k, std::uint64_t seed = 0, int max_iter = 100);

enum class Linkage { Single, Complete, Average };
const char* to_string(Linkage linkage);
Linkage linkage_from_string(const std::string& s);

/// Agglomerative clustering under the chosen linkage with Euclidean distance,
/// cut at k clusters. Merge ties break toward the smallest pair of cluster
/// indices. Objective is the linkage height of the final merge.
Partition hierarchical(const Matrix& x, int k, Linkage linkage = Linkage::Average);

/// Standard fuzzy c-means: alternating membership/centroid updates until the
/// largest membership change drops below eps. A point coincident with a
/// centroid takes membership 1 there (smallest such centroid on ties).
FuzzyMembership fuzzy_cmeans(const Matrix& x, int k, double m = 2.0,
                             std::uint64_t seed = 0, double eps = 1e-6,
                             int max_iter = 300);

/// Argmax labels (ties toward the smaller label); objective carries over from
/// the fuzzy run. If hardening empties a cluster the labels are compacted, so
/// k can shrink on degenerate data.
Partition harden(const FuzzyMembership& u);

/// Bridges a fully imputed dataset to the engines: marker/clinical columns
/// only, binary passed through as 0/1, continuous and categorical min-max
/// scaled to [0,1]. Constant non-binary columns scale to 0 and are flagged in
/// the warning list.
Matrix prepare_matrix(const Dataset& d);

enum class EngineKind { KMeans, Pam, Hierarchical, Fuzzy };
const char* to_string(EngineKind kind);
EngineKind engine_kind_from_string(const std::string& s);

struct EngineParams {
  int restarts = 32;
  int max_iter = 100;
  double fuzzifier = 2.0;
  double fuzzy_eps = 1e-6;
  int fuzzy_max_iter = 300;
  Linkage linkage = Linkage::Average;
};

/// Uniform entry point used by sweeps and the consensus stage; fuzzy output
/// is hardened to a Partition.
Partition run_engine(EngineKind kind, const Matrix& x, int k, std::uint64_t seed,
                     const EngineParams& params = {});

/// All four engines in a fixed order (kmeans, pam, hierarchical, fuzzy).
std::vector<std::pair<std::string, Partition>> run_all_engines(
    const Matrix& x, int k, std::uint64_t seed, const EngineParams& params = {});

}  // namespace cohort
