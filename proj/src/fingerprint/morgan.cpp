//
// molmetric - Copyright 2026 The molmetric Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <utility>

#include "molmetric/fingerprint.hpp"

namespace molmetric::fingerprint {

Fingerprint::Fingerprint(int nbits) : nbits_(nbits) {
  if (nbits <= 0 || !std::has_single_bit(static_cast<unsigned>(nbits))) {
    throw InputError("fingerprint width must be a power of two, got " +
                     std::to_string(nbits));
  }
  words_.assign((static_cast<std::size_t>(nbits) + 63) / 64, 0);
}

int Fingerprint::popcount() const {
  int c = 0;
  for (std::uint64_t w : words_) c += std::popcount(w);
  return c;
}

std::vector<std::vector<std::uint64_t>> morgan_identifiers(
    const smiles::Molecule& mol, int radius) {
  if (radius < 0) throw InputError("radius must be non-negative");
  const int n = static_cast<int>(mol.num_atoms());
  const std::vector<bool> in_ring = mol.ring_atoms();

  std::vector<std::vector<std::uint64_t>> rounds;
  rounds.reserve(radius + 1);

  std::vector<std::uint64_t> ids(n);
  for (int i = 0; i < n; ++i) {
    const smiles::Atom& a = mol.atom(i);
    ids[i] = Fnv1a()
                 .add_i32(a.atomic_number)
                 .add_i32(mol.degree(i))
                 .add_i32(a.total_h())
                 .add_i32(a.formal_charge)
                 .add_i32(a.aromatic ? 1 : 0)
                 .add_i32(in_ring[i] ? 1 : 0)
                 .value();
  }
  rounds.push_back(ids);

  std::vector<std::pair<std::int32_t, std::uint64_t>> env;
  for (int r = 1; r <= radius; ++r) {
    const std::vector<std::uint64_t>& prev = rounds.back();
    std::vector<std::uint64_t> next(n);
    for (int i = 0; i < n; ++i) {
      env.clear();
      for (const smiles::Neighbor& nb : mol.neighbors(i)) {
        env.emplace_back(static_cast<std::int32_t>(mol.bond(nb.bond).order),
                         prev[nb.atom]);
      }
      std::sort(env.begin(), env.end());
      Fnv1a h;
      h.add_u64(prev[i]);
      for (const auto& [order, id] : env) h.add_i32(order).add_u64(id);
      next[i] = h.value();
    }
    rounds.push_back(std::move(next));
  }
  return rounds;
}

Fingerprint morgan_fingerprint(const smiles::Molecule& mol, int radius,
                               int nbits) {
  Fingerprint fp(nbits);
  const std::uint64_t mask = static_cast<std::uint64_t>(nbits) - 1;
  for (const auto& round : morgan_identifiers(mol, radius)) {
    for (std::uint64_t id : round) fp.set(id & mask);
  }
  return fp;
}

Eigen::MatrixXd to_matrix(std::span<const Fingerprint> fps) {
  if (fps.empty()) return {};
  const int width = fps.front().size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(Eigen::Index(fps.size()), width);
  for (std::size_t r = 0; r < fps.size(); ++r) {
    if (fps[r].size() != width) throw InputError("fingerprint width mismatch");
    for (int b = 0; b < width; ++b) {
      if (fps[r].test(b)) m(Eigen::Index(r), b) = 1.0;
    }
  }
  return m;
}

}  // namespace molmetric::fingerprint
