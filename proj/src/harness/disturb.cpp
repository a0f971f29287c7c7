//
// molmetric - Copyright 2026 The molmetric Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cmath>

#include "molmetric/harness.hpp"
#include "molmetric/random.hpp"
#include "molmetric/smiles.hpp"

namespace molmetric::harness {
namespace {

std::vector<std::size_t> draw(const std::vector<std::size_t>& pool, std::size_t n,
                              std::uint64_t seed) {
  if (pool.size() < n) {
    throw InputError("NotEnoughQualifyingRecords(" + std::to_string(pool.size()) +
                     ", " + std::to_string(n) + ")");
  }
  std::vector<std::size_t> out;
  out.reserve(n);
  for (std::size_t i : sample_without_replacement(pool.size(), n, seed)) {
    out.push_back(pool[i]);
  }
  return out;
}

}  // namespace

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw InputError("percentile of an empty column");
  if (!(p > 0.0 && p < 100.0)) {
    throw InputError("percentile must lie in (0, 100), got " + std::to_string(p));
  }
  std::sort(values.begin(), values.end());
  const double h = static_cast<double>(values.size() - 1) * p / 100.0;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<std::size_t> percentile_filter_indices(
    std::span<const DatasetRecord> records, const std::string& column, Side side,
    double pct, std::size_t n, std::uint64_t seed) {
  std::vector<double> values;
  for (const DatasetRecord& r : records) {
    if (auto v = r.get(column)) values.push_back(*v);
  }
  if (values.empty()) throw InputError("MissingColumn(" + column + ")");
  const double threshold = percentile(values, pct);

  std::vector<std::size_t> qualifying;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::optional<double> v = records[i].get(column);
    if (!v) continue;
    if (side == Side::kBelow ? *v < threshold : *v > threshold) qualifying.push_back(i);
  }
  return draw(qualifying, n, seed);
}

std::vector<DatasetRecord> percentile_filter(std::span<const DatasetRecord> records,
                                             const std::string& column, Side side,
                                             double pct, std::size_t n,
                                             std::uint64_t seed) {
  return select(records, percentile_filter_indices(records, column, side, pct, n, seed));
}

std::vector<std::size_t> mode_collapse_indices(
    std::span<const fingerprint::Fingerprint> fps, double cutoff, std::size_t n,
    std::uint64_t seed) {
  const fingerprint::ClusterAssignment clusters =
      fingerprint::single_linkage_clusters(fps, cutoff);
  const std::vector<int> sizes = clusters.sizes();
  int best = -1;
  int largest = 0;
  for (int label = 0; label < static_cast<int>(sizes.size()); ++label) {
    largest = std::max(largest, sizes[label]);
    if (static_cast<std::size_t>(sizes[label]) >= n &&
        (best < 0 || sizes[label] > sizes[best])) {
      best = label;
    }
  }
  if (best < 0) {
    throw InputError("NoClusterLargeEnough(" + std::to_string(largest) + ", " +
                     std::to_string(n) + ")");
  }
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < clusters.labels.size(); ++i) {
    if (clusters.labels[i] == best) members.push_back(i);
  }
  return draw(members, n, seed);
}

std::vector<DatasetRecord> mode_collapse_sample(std::span<const DatasetRecord> records,
                                                double cutoff, std::size_t n,
                                                std::uint64_t seed) {
  std::vector<std::string> smiles;
  smiles.reserve(records.size());
  for (const DatasetRecord& r : records) smiles.push_back(r.smiles);
  const auto fps = fingerprints(smiles);
  return select(records, mode_collapse_indices(fps, cutoff, n, seed));
}

std::vector<std::size_t> target_class_indices(std::span<const DatasetRecord> records,
                                              const std::string& column,
                                              double threshold, std::size_t n,
                                              std::uint64_t seed) {
  std::vector<std::size_t> qualifying;
  bool present = false;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::optional<double> v = records[i].get(column);
    present = present || v.has_value();
    if (v && *v >= threshold) qualifying.push_back(i);
  }
  if (!present) throw InputError("MissingColumn(" + column + ")");
  return draw(qualifying, n, seed);
}

std::vector<DatasetRecord> target_class_sample(std::span<const DatasetRecord> records,
                                               const std::string& column,
                                               double threshold, std::size_t n,
                                               std::uint64_t seed) {
  return select(records, target_class_indices(records, column, threshold, n, seed));
}

std::string bias_name(Bias bias) {
  switch (bias) {
    case Bias::kDruglike: return "druglike";
    case Bias::kLogP: return "logp";
    case Bias::kSA: return "sa";
    case Bias::kModeCollapse: return "modecollapse";
    case Bias::kTarget: return "target";
  }
  return "unknown";
}

Bias parse_bias(std::string_view name) {
  for (Bias b : kAllBiases) {
    if (bias_name(b) == name) return b;
  }
  throw InputError("unknown disturbance '" + std::string(name) +
                   "' (expected druglike, logp, sa, modecollapse or target)");
}

std::vector<std::size_t> disturbed_indices(std::span<const DatasetRecord> records,
                                           std::span<const fingerprint::Fingerprint> fps,
                                           Bias bias, std::size_t n, std::uint64_t seed,
                                           const DisturbanceConfig& config) {
  switch (bias) {
    case Bias::kDruglike:
      return percentile_filter_indices(records, "qed", Side::kBelow,
                                       config.low_percentile, n, seed);
    case Bias::kLogP:
      return percentile_filter_indices(records, "logp", Side::kAbove,
                                       config.high_percentile, n, seed);
    case Bias::kSA:
      return percentile_filter_indices(records, "sa_score", Side::kBelow,
                                       config.low_percentile, n, seed);
    case Bias::kModeCollapse:
      if (fps.size() != records.size()) {
        throw InputError("fingerprints do not match the records");
      }
      return mode_collapse_indices(fps, config.cluster_cutoff, n, seed);
    case Bias::kTarget:
      return target_class_indices(records, "activity", config.activity_threshold, n,
                                  seed);
  }
  throw InputError("unknown disturbance");
}

std::vector<std::string> random_cno_baseline(std::size_t n, std::uint64_t seed) {
  static constexpr char kAtoms[] = {'C', 'N', 'O'};
  SplitMix64 rng(seed);
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t len = 1 + static_cast<std::size_t>(rng.below(50));
    std::string s(len, 'C');
    for (char& c : s) c = kAtoms[rng.below(3)];
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace molmetric::harness
