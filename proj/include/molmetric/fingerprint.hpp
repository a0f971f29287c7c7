//
// molmetric - Copyright 2026 The molmetric Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLMETRIC_FINGERPRINT_HPP
#define MOLMETRIC_FINGERPRINT_HPP

#include <bit>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "molmetric/smiles.hpp"

namespace molmetric::fingerprint {

inline constexpr int kDefaultRadius = 2;
inline constexpr int kDefaultBits = 2048;
inline constexpr double kDefaultClusterCutoff = 0.65;

class Fingerprint {
 public:
  Fingerprint() = default;
  // nbits must be a positive power of two.
  explicit Fingerprint(int nbits);

  int size() const { return nbits_; }
  void set(std::size_t bit) { words_[bit >> 6] |= 1ULL << (bit & 63); }
  bool test(std::size_t bit) const {
    return (words_[bit >> 6] >> (bit & 63)) & 1ULL;
  }
  int popcount() const;
  std::span<const std::uint64_t> words() const { return words_; }

  bool operator==(const Fingerprint&) const = default;

 private:
  std::vector<std::uint64_t> words_;
  int nbits_ = 0;
};

// 64-bit FNV-1a, fed little-endian encodings of integer fields.
class Fnv1a {
 public:
  static constexpr std::uint64_t kOffset = 0xcbf29ce484222325ULL;
  static constexpr std::uint64_t kPrime = 0x100000001b3ULL;

  Fnv1a& add_byte(std::uint8_t b) {
    hash_ = (hash_ ^ b) * kPrime;
    return *this;
  }
  Fnv1a& add_i32(std::int32_t v) {
    auto u = static_cast<std::uint32_t>(v);
    for (int i = 0; i < 4; ++i) add_byte(static_cast<std::uint8_t>(u >> (8 * i)));
    return *this;
  }
  Fnv1a& add_u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) add_byte(static_cast<std::uint8_t>(v >> (8 * i)));
    return *this;
  }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = kOffset;
};

// Circular (Morgan/ECFP-style) fingerprint.
//
// Radius 0 identifiers hash the int32 tuple (atomic number, heavy degree,
// hydrogen count, formal charge, aromatic, in ring). Each further round hashes
// the atom's previous identifier (u64) followed by its neighbours' sorted
// (bond order code as int32, previous identifier as u64) pairs. Every
// identifier of every round sets bit `id mod nbits`.
Fingerprint morgan_fingerprint(const smiles::Molecule& mol,
                               int radius = kDefaultRadius,
                               int nbits = kDefaultBits);

// Per-round identifiers, mostly useful for testing: result[r][atom].
std::vector<std::vector<std::uint64_t>> morgan_identifiers(
    const smiles::Molecule& mol, int radius);

// |a & b| / |a | b|; 1.0 when both are empty. Throws on width mismatch.
double tanimoto(const Fingerprint& a, const Fingerprint& b);

// Mean pairwise Tanimoto distance over unordered distinct pairs, averaged
// over `repeats` seeded subsets of min(subset_size, n) fingerprints.
double internal_diversity(std::span<const Fingerprint> fps,
                          std::size_t subset_size = 5000, int repeats = 5,
                          std::uint64_t seed = 42);

// Exact mean distance over all unordered distinct pairs of `fps`.
double mean_pairwise_distance(std::span<const Fingerprint> fps);

struct ClusterAssignment {
  std::vector<int> labels;  // dense, numbered by first occurrence
  double cutoff = kDefaultClusterCutoff;

  int num_clusters() const;
  std::vector<int> sizes() const;
};

// Connected components of the graph with an edge wherever
// tanimoto >= cutoff.
ClusterAssignment single_linkage_clusters(std::span<const Fingerprint> fps,
                                          double cutoff = kDefaultClusterCutoff);

// Rows are fingerprints as 0/1 vectors, for Frechet statistics.
Eigen::MatrixXd to_matrix(std::span<const Fingerprint> fps);

}  // namespace molmetric::fingerprint

#endif  // MOLMETRIC_FINGERPRINT_HPP
