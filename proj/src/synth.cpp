#include "cohort/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace cohort {

void SyntheticSpec::validate() const {
  if (n_patients < 1) throw Error("synthetic spec: n_patients must be >= 1");
  if (n_binary + n_continuous < 1)
    throw Error("synthetic spec: at least one marker attribute is required");
  if (k_true < 1) throw Error("synthetic spec: k_true must be >= 1");
  if (static_cast<std::size_t>(k_true) > n_patients)
    throw Error("synthetic spec: k_true cannot exceed n_patients");
  if (flip_prob < 0.0 || flip_prob >= 0.5)
    throw Error("synthetic spec: flip_prob must lie in [0, 0.5)");
  if (separation <= 0.0 || separation > 1.0)
    throw Error("synthetic spec: separation must lie in (0, 1]");
  if (missing_rate < 0.0 || missing_rate >= 0.9)
    throw Error("synthetic spec: missing_rate must lie in [0, 0.9)");
  if (!survival_effect.empty() &&
      survival_effect.size() != static_cast<std::size_t>(k_true))
    throw Error("synthetic spec: survival_effect needs one mean per cluster");
  for (double v : survival_effect)
    if (v < 0.0) throw Error("synthetic spec: survival means must be >= 0");
  if (survival_noise < 0.0) throw Error("synthetic spec: survival_noise must be >= 0");
  if (k_true > 1 && n_binary > 0) {
    // With fewer binary coordinates than the required Hamming gap the
    // prototype search cannot succeed; fail early with a clear message.
    const auto gap = static_cast<std::size_t>(
        std::ceil(separation * static_cast<double>(n_binary)));
    if (gap > n_binary)
      throw Error("synthetic spec: separation demands an impossible Hamming gap");
  }
}

namespace {

std::size_t hamming(const std::vector<int>& a, const std::vector<int>& b) {
  std::size_t d = 0;
  for (std::size_t j = 0; j < a.size(); ++j) d += a[j] != b[j];
  return d;
}

/// Greedy rejection sampling of k binary prototypes with a pairwise Hamming
/// floor. Deterministic in the seed; throws after the attempt cap.
std::vector<std::vector<int>> sample_prototypes(std::size_t n_binary, int k,
                                                std::size_t min_gap,
                                                std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  std::vector<std::vector<int>> protos;
  const int max_attempts = 20000;
  int attempts = 0;
  while (protos.size() < static_cast<std::size_t>(k)) {
    if (++attempts > max_attempts)
      throw Error("synthetic cohort: cannot place " + std::to_string(k) +
                  " prototypes with Hamming gap " + std::to_string(min_gap) +
                  " in " + std::to_string(n_binary) + " binary attributes; lower the "
                  "separation or add attributes");
    std::vector<int> candidate(n_binary);
    for (auto& bit : candidate) bit = coin(rng) ? 1 : 0;
    bool ok = true;
    for (const auto& p : protos)
      if (hamming(candidate, p) < min_gap) {
        ok = false;
        break;
      }
    if (ok) protos.push_back(std::move(candidate));
  }
  return protos;
}

}  // namespace

SyntheticCohort generate(const SyntheticSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n_patients;
  const std::size_t kk = static_cast<std::size_t>(spec.k_true);

  // Independent substreams per concern: adding noise columns later must not
  // reshuffle survival draws, and vice versa.
  std::mt19937_64 proto_rng(mix_seed(spec.seed, 1));
  std::mt19937_64 flip_rng(mix_seed(spec.seed, 2));
  std::mt19937_64 cont_rng(mix_seed(spec.seed, 3));
  std::mt19937_64 tnm_rng(mix_seed(spec.seed, 4));
  std::mt19937_64 surv_rng(mix_seed(spec.seed, 5));
  std::mt19937_64 miss_rng(mix_seed(spec.seed, 6));

  std::vector<std::vector<int>> protos;
  if (spec.n_binary > 0 && spec.k_true > 1) {
    const auto gap = static_cast<std::size_t>(
        std::ceil(spec.separation * static_cast<double>(spec.n_binary)));
    protos = sample_prototypes(spec.n_binary, spec.k_true, gap, proto_rng);
  } else if (spec.n_binary > 0) {
    protos = sample_prototypes(spec.n_binary, 1, 0, proto_rng);
  }

  std::vector<double> survival_mean = spec.survival_effect;
  if (survival_mean.empty()) {
    survival_mean.resize(kk);
    for (std::size_t c = 0; c < kk; ++c)
      survival_mean[c] = 36.0 + 4.0 * static_cast<double>(c);
  }

  std::vector<AttributeSpec> specs;
  for (std::size_t j = 0; j < spec.n_binary; ++j)
    specs.push_back({"marker_" + std::to_string(j + 1), AttributeKind::Binary,
                     AttributeRole::Marker});
  for (std::size_t j = 0; j < spec.n_continuous; ++j)
    specs.push_back({"measure_" + std::to_string(j + 1), AttributeKind::Continuous,
                     AttributeRole::Clinical});
  specs.push_back({"tnm_stage", AttributeKind::Categorical, AttributeRole::Outcome});
  specs.push_back({"survival_months", AttributeKind::Continuous, AttributeRole::Outcome});

  std::bernoulli_distribution flip(spec.flip_prob);
  std::uniform_int_distribution<int> tnm(1, 4);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<int> labels(n);
  std::vector<std::vector<Cell>> rows(n);
  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % kk);  // round-robin planted labels
    labels[i] = c;
    ids[i] = "P" + std::to_string(i + 1);

    std::vector<Cell> row;
    row.reserve(specs.size());
    for (std::size_t j = 0; j < spec.n_binary; ++j) {
      int bit = protos[static_cast<std::size_t>(c)][j];
      if (spec.flip_prob > 0.0 && flip(flip_rng)) bit = 1 - bit;
      row.emplace_back(static_cast<double>(bit));
    }
    for (std::size_t j = 0; j < spec.n_continuous; ++j) {
      const double mean = static_cast<double>(c) * spec.separation;
      row.emplace_back(mean + gauss(cont_rng));
    }
    row.emplace_back(static_cast<double>(tnm(tnm_rng)));
    const double surv = survival_mean[static_cast<std::size_t>(c)] +
                        spec.survival_noise * gauss(surv_rng);
    row.emplace_back(std::max(0.0, surv));
    rows[i] = std::move(row);
  }

  // Missingness hits only marker/clinical cells; outcomes stay intact.
  if (spec.missing_rate > 0.0) {
    const std::size_t n_inputs = spec.n_binary + spec.n_continuous;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n_inputs; ++j)
        if (unit(miss_rng) < spec.missing_rate) rows[i][j] = std::nullopt;
  }

  SyntheticCohort out{Dataset(std::move(specs), std::move(rows), std::move(ids)),
                      make_partition(std::move(labels), spec.k_true, 0.0)};
  return out;
}

}  // namespace cohort
