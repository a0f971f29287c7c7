//
// molmetric - Copyright 2026 The molmetric Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <numeric>

#include "molmetric/fingerprint.hpp"
#include "molmetric/parallel.hpp"
#include "molmetric/random.hpp"

namespace molmetric::fingerprint {
namespace {

struct Counts {
  int intersection;
  int union_;
};

Counts overlap(const Fingerprint& a, const Fingerprint& b) {
  const auto wa = a.words();
  const auto wb = b.words();
  int inter = 0, uni = 0;
  for (std::size_t i = 0; i < wa.size(); ++i) {
    inter += std::popcount(wa[i] & wb[i]);
    uni += std::popcount(wa[i] | wb[i]);
  }
  return {inter, uni};
}

void require_same_width(const Fingerprint& a, const Fingerprint& b) {
  if (a.size() != b.size()) {
    throw InputError("WidthMismatch: " + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()) + " bits");
  }
}

constexpr std::size_t kRowsPerTask = 32;

}  // namespace

double tanimoto(const Fingerprint& a, const Fingerprint& b) {
  require_same_width(a, b);
  const Counts c = overlap(a, b);
  if (c.union_ == 0) return 1.0;
  return static_cast<double>(c.intersection) / c.union_;
}

// Pair distances (u - i) / u are accumulated as exact integer numerators per
// denominator u, so the result is independent of the thread count. The final
// reduction over denominators runs in a fixed order in quad precision, which
// leaves the correctly rounded double except within ~2^-100 of a tie.
double mean_pairwise_distance(std::span<const Fingerprint> fps) {
  const std::size_t n = fps.size();
  if (n < 2) return 0.0;
  const int width = fps.front().size();
  for (const Fingerprint& fp : fps) require_same_width(fps.front(), fp);

  const std::size_t tasks = (n + kRowsPerTask - 1) / kRowsPerTask;
  std::vector<std::vector<std::uint64_t>> partial(tasks);
  parallel_for(tasks, [&](std::size_t t) {
    std::vector<std::uint64_t> numer(static_cast<std::size_t>(width) + 1, 0);
    const std::size_t end = std::min(n, (t + 1) * kRowsPerTask);
    for (std::size_t i = t * kRowsPerTask; i < end; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const Counts c = overlap(fps[i], fps[j]);
        numer[c.union_] += static_cast<std::uint64_t>(c.union_ - c.intersection);
      }
    }
    partial[t] = std::move(numer);
  });

  std::vector<std::uint64_t> numer(static_cast<std::size_t>(width) + 1, 0);
  for (const auto& p : partial) {
    for (std::size_t u = 0; u < p.size(); ++u) numer[u] += p[u];
  }

  __float128 sum = 0;
  for (std::size_t u = 1; u < numer.size(); ++u) {
    if (numer[u] != 0) sum += static_cast<__float128>(numer[u]) / u;
  }
  const __float128 pairs = static_cast<__float128>(n) * (n - 1) / 2;
  return static_cast<double>(sum / pairs);
}

double internal_diversity(std::span<const Fingerprint> fps,
                          std::size_t subset_size, int repeats,
                          std::uint64_t seed) {
  if (fps.size() < 2 || repeats <= 0) return 0.0;
  const std::size_t k = std::min(subset_size, fps.size());
  double total = 0.0;
  std::vector<Fingerprint> subset;
  for (int r = 0; r < repeats; ++r) {
    const auto idx = sample_without_replacement(
        fps.size(), k, derive_seed(seed, static_cast<std::uint64_t>(r)));
    subset.clear();
    for (std::size_t i : idx) subset.push_back(fps[i]);
    total += mean_pairwise_distance(subset);
  }
  return total / repeats;
}

int ClusterAssignment::num_clusters() const {
  return labels.empty() ? 0
                        : *std::max_element(labels.begin(), labels.end()) + 1;
}

std::vector<int> ClusterAssignment::sizes() const {
  std::vector<int> out(static_cast<std::size_t>(num_clusters()), 0);
  for (int l : labels) ++out[l];
  return out;
}

ClusterAssignment single_linkage_clusters(std::span<const Fingerprint> fps,
                                          double cutoff) {
  if (!(cutoff > 0.0 && cutoff <= 1.0)) {
    throw InputError("cluster cutoff must lie in (0, 1]");
  }
  const std::size_t n = fps.size();
  for (const Fingerprint& fp : fps) require_same_width(fps.front(), fp);

  // Visiting fingerprints by popcount bounds the candidate partners:
  // tanimoto(a, b) <= min(|a|, |b|) / max(|a|, |b|).
  std::vector<int> pc(n);
  for (std::size_t i = 0; i < n; ++i) pc[i] = fps[i].popcount();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pc[a] < pc[b]; });

  const std::size_t tasks = (n + kRowsPerTask - 1) / kRowsPerTask;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> edges(tasks);
  parallel_for(tasks, [&](std::size_t t) {
    const std::size_t end = std::min(n, (t + 1) * kRowsPerTask);
    for (std::size_t p = t * kRowsPerTask; p < end; ++p) {
      const std::size_t i = order[p];
      for (std::size_t q = p + 1; q < n; ++q) {
        const std::size_t j = order[q];
        if (pc[j] * cutoff > pc[i] + 1e-9) break;
        if (tanimoto(fps[i], fps[j]) >= cutoff) edges[t].emplace_back(i, j);
      }
    }
  });

  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& block : edges) {
    for (const auto& [i, j] : block) {
      const std::size_t a = find(i), b = find(j);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }

  ClusterAssignment out;
  out.cutoff = cutoff;
  out.labels.assign(n, -1);
  std::vector<int> root_label(n, -1);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    if (root_label[r] < 0) root_label[r] = next++;
    out.labels[i] = root_label[r];
  }
  return out;
}

}  // namespace molmetric::fingerprint
