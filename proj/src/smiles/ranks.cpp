//
// molmetric - Copyright 2026 The molmetric Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <tuple>

#include "molmetric/smiles.hpp"

namespace molmetric::smiles {
namespace {

// Replaces each value by its dense rank among the distinct values.
template <typename Key>
std::vector<int> dense_ranks(const std::vector<Key>& keys) {
  std::vector<Key> sorted = keys;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<int> ranks(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    ranks[i] = static_cast<int>(
        std::lower_bound(sorted.begin(), sorted.end(), keys[i]) -
        sorted.begin());
  }
  return ranks;
}

int count_classes(const std::vector<int>& ranks) {
  return ranks.empty() ? 0 : *std::max_element(ranks.begin(), ranks.end()) + 1;
}

}  // namespace

// Seeds: (atomic number, formal charge, degree, aromatic), ordered
// lexicographically. Each round re-ranks atoms by (own rank, sorted
// (bond order, neighbour rank) pairs) until the class count is stable.
std::vector<int> canonical_ranks(const Molecule& mol) {
  const std::size_t n = mol.num_atoms();
  using Seed = std::tuple<int, int, int, int>;
  std::vector<Seed> seeds(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Atom& a = mol.atom(int(i));
    seeds[i] = {a.atomic_number, a.formal_charge, mol.degree(int(i)),
                a.aromatic ? 1 : 0};
  }
  std::vector<int> ranks = dense_ranks(seeds);
  int classes = count_classes(ranks);

  using Signature = std::pair<int, std::vector<std::pair<int, int>>>;
  while (true) {
    std::vector<Signature> sig(n);
    for (std::size_t i = 0; i < n; ++i) {
      sig[i].first = ranks[i];
      for (const Neighbor& nb : mol.neighbors(int(i))) {
        sig[i].second.emplace_back(static_cast<int>(mol.bond(nb.bond).order),
                                   ranks[nb.atom]);
      }
      std::sort(sig[i].second.begin(), sig[i].second.end());
    }
    std::vector<int> next = dense_ranks(sig);
    const int next_classes = count_classes(next);
    ranks = std::move(next);
    if (next_classes == classes) break;
    classes = next_classes;
  }
  return ranks;
}

}  // namespace molmetric::smiles
