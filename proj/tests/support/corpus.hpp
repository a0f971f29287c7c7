//
// molmetric - Copyright 2026 The molmetric Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLMETRIC_TESTS_CORPUS_HPP
#define MOLMETRIC_TESTS_CORPUS_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "molmetric/harness.hpp"
#include "molmetric/random.hpp"

namespace molmetric::testing {

inline std::filesystem::path corpus_path() {
  return std::filesystem::path(MOLMETRIC_DATA_DIR) / "corpus.csv";
}

inline const harness::Dataset& corpus() {
  static const harness::Dataset data = harness::load_dataset(corpus_path());
  return data;
}

// `n` corpus SMILES drawn without replacement; all of them when n is 0.
inline std::vector<std::string> corpus_smiles(std::size_t n = 0, std::uint64_t seed = 1) {
  const auto& records = corpus().records;
  std::vector<std::string> out;
  if (n == 0 || n >= records.size()) {
    for (const auto& r : records) out.push_back(r.smiles);
    return out;
  }
  for (std::size_t i : sample_without_replacement(records.size(), n, seed)) {
    out.push_back(records[i].smiles);
  }
  return out;
}

}  // namespace molmetric::testing

#endif  // MOLMETRIC_TESTS_CORPUS_HPP
