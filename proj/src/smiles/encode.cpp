//
// molmetric - Copyright 2026 The molmetric Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>

#include "molmetric/smiles.hpp"

namespace molmetric::smiles {

Vocabulary::Vocabulary(std::vector<std::string> symbols)
    : symbols_(std::move(symbols)) {
  if (symbols_.empty()) {
    throw SmilesError(SmilesErrorKind::kEmptyVocabulary, 0,
                      "vocabulary has no symbols");
  }
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    if (symbols_[i] == kUnknown) {
      unknown_ = static_cast<int>(i);
    } else if (symbols_[i] == kEnd) {
      end_ = static_cast<int>(i);
    } else {
      if (symbols_[i].empty()) {
        throw InputError("vocabulary symbol " + std::to_string(i) +
                         " is empty");
      }
      max_symbol_len_ = std::max(max_symbol_len_, symbols_[i].size());
    }
  }
  if (unknown_ < 0 || end_ < 0) {
    throw InputError("vocabulary must contain UNKNOWN and END");
  }
}

const Vocabulary& Vocabulary::default_vocabulary() {
  static const Vocabulary vocab({
      "C", "c", "N", "n", "O", "o", "S", "s", "P", "F", "Cl", "Br", "I",
      "B", "(", ")", "[", "]", "=", "#", "/", "\\", "@", "+", "-", ".",
      "1", "2", "3", "4", "5", "6", "7", "8", "9", "%", "H",
      std::string(kUnknown), std::string(kEnd),
  });
  return vocab;
}

std::pair<int, std::size_t> Vocabulary::match(std::string_view text,
                                              std::size_t pos) const {
  int best = -1;
  std::size_t best_len = 0;
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    if (int(i) == unknown_ || int(i) == end_) continue;
    const std::string& sym = symbols_[i];
    if (sym.size() > best_len && text.substr(pos, sym.size()) == sym) {
      best = static_cast<int>(i);
      best_len = sym.size();
    }
  }
  if (best < 0) return {unknown_, 1};
  return {best, best_len};
}

TokenMatrix::TokenMatrix(std::vector<int> columns, int rows, int cols)
    : columns_(std::move(columns)), rows_(rows), cols_(cols) {
  if (static_cast<int>(columns_.size()) > rows_) {
    throw InputError("token matrix has more symbols than rows");
  }
}

TokenMatrix TokenMatrix::padded(int extra) const {
  return TokenMatrix(columns_, rows_ + extra, cols_);
}

TokenMatrix one_hot_encode(std::string_view smiles, const Vocabulary& vocab,
                           int max_len) {
  if (max_len < 1) throw InputError("max_len must be at least 1");
  std::vector<int> columns;
  const std::size_t limit = static_cast<std::size_t>(max_len - 1);
  std::size_t pos = 0;
  while (pos < smiles.size() && columns.size() < limit) {
    const auto [col, len] = vocab.match(smiles, pos);
    columns.push_back(col);
    pos += len;
  }
  columns.push_back(vocab.end_column());
  return TokenMatrix(std::move(columns), max_len,
                     static_cast<int>(vocab.size()));
}

}  // namespace molmetric::smiles
