//
// molmetric - Copyright 2026 The molmetric Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cctype>

#include "molmetric/smiles.hpp"

namespace molmetric::smiles {
namespace {

bool is_digit(char c) {
  return c >= '0' && c <= '9';
}

bool is_bracket_char(char c) {
  auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '+' || c == '-' || c == '@' || c == ':';
}

[[noreturn]] void unknown_character(std::string_view s, std::size_t pos) {
  auto c = static_cast<unsigned char>(s[pos]);
  std::string shown = std::isprint(c) ? std::string(1, s[pos])
                                      : "\\x" + std::to_string(int(c));
  throw SmilesError(SmilesErrorKind::kUnknownCharacter,
                    static_cast<std::ptrdiff_t>(pos),
                    "character '" + shown + "' is not part of SMILES");
}

}  // namespace

std::vector<Token> tokenize(std::string_view s) {
  if (s.empty()) {
    throw SmilesError(SmilesErrorKind::kEmptyInput, 0, "empty SMILES");
  }

  std::vector<Token> tokens;
  std::size_t i = 0;
  auto emit = [&](TokenKind kind, std::size_t len) {
    tokens.push_back({kind, std::string(s.substr(i, len)), i});
    i += len;
  };

  while (i < s.size()) {
    const char c = s[i];
    const char next = i + 1 < s.size() ? s[i + 1] : '\0';
    switch (c) {
    case 'B':
      emit(TokenKind::kAtomOrganic, next == 'r' ? 2 : 1);
      break;
    case 'C':
      emit(TokenKind::kAtomOrganic, next == 'l' ? 2 : 1);
      break;
    case 'N':
    case 'O':
    case 'P':
    case 'S':
    case 'F':
    case 'I':
    case 'b':
    case 'c':
    case 'n':
    case 'o':
    case 'p':
    case 's':
      emit(TokenKind::kAtomOrganic, 1);
      break;
    case '-':
    case '=':
    case '#':
    case ':':
    case '/':
    case '\\':
      emit(TokenKind::kBond, 1);
      break;
    case '(':
      emit(TokenKind::kBranchOpen, 1);
      break;
    case ')':
      emit(TokenKind::kBranchClose, 1);
      break;
    case '.':
      emit(TokenKind::kDot, 1);
      break;
    case '%':
      if (i + 2 < s.size() && is_digit(s[i + 1]) && is_digit(s[i + 2])) {
        emit(TokenKind::kRingClosure, 3);
      } else {
        unknown_character(s, i);
      }
      break;
    case '[': {
      std::size_t j = i + 1;
      while (j < s.size() && s[j] != ']') {
        if (!is_bracket_char(s[j])) unknown_character(s, j);
        ++j;
      }
      if (j == s.size()) {
        throw SmilesError(SmilesErrorKind::kUnterminatedBracket,
                          static_cast<std::ptrdiff_t>(i),
                          "'[' without matching ']'");
      }
      emit(TokenKind::kAtomBracket, j - i + 1);
      break;
    }
    default:
      if (is_digit(c)) {
        emit(TokenKind::kRingClosure, 1);
      } else {
        unknown_character(s, i);
      }
    }
  }
  return tokens;
}

}  // namespace molmetric::smiles
