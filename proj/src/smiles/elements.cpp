//
// molmetric - Copyright 2026 The molmetric Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <array>
#include <string>

#include "molmetric/smiles.hpp"

namespace molmetric::smiles {
namespace {

constexpr std::array<std::string_view, 119> kSymbols = {
    "*",  "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na",
    "Mg", "Al", "Si", "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",
    "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br",
    "Kr", "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag",
    "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr",
    "Nd", "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu",
    "Hf", "Ta", "W",  "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi",
    "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U",  "Np", "Pu", "Am",
    "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh",
    "Hs", "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og",
};

constexpr std::array<int, 1> kBoron = {3};
constexpr std::array<int, 1> kCarbon = {4};
constexpr std::array<int, 2> kNitrogen = {3, 5};
constexpr std::array<int, 1> kOxygen = {2};
constexpr std::array<int, 3> kSulfur = {2, 4, 6};
constexpr std::array<int, 1> kHalogen = {1};

}  // namespace

int atomic_number(std::string_view symbol) {
  for (std::size_t z = 1; z < kSymbols.size(); ++z) {
    if (kSymbols[z] == symbol) return static_cast<int>(z);
  }
  return 0;
}

std::string_view element_symbol(int z) {
  if (z < 0 || z >= static_cast<int>(kSymbols.size())) return "*";
  return kSymbols[z];
}

std::span<const int> allowed_valences(int z) {
  switch (z) {
  case 5:
    return kBoron;
  case 6:
    return kCarbon;
  case 7:
  case 15:
    return kNitrogen;
  case 8:
    return kOxygen;
  case 16:
    return kSulfur;
  case 9:
  case 17:
  case 35:
  case 53:
    return kHalogen;
  default:
    return {};
  }
}

std::string_view to_string(SmilesErrorKind kind) {
  switch (kind) {
  case SmilesErrorKind::kUnknownCharacter:
    return "UnknownCharacter";
  case SmilesErrorKind::kUnterminatedBracket:
    return "UnterminatedBracket";
  case SmilesErrorKind::kInvalidBracketAtom:
    return "InvalidBracketAtom";
  case SmilesErrorKind::kUnexpectedToken:
    return "UnexpectedToken";
  case SmilesErrorKind::kUnclosedBranch:
    return "UnclosedBranch";
  case SmilesErrorKind::kUnmatchedRingClosure:
    return "UnmatchedRingClosure";
  case SmilesErrorKind::kValenceViolation:
    return "ValenceViolation";
  case SmilesErrorKind::kSelfBond:
    return "SelfBond";
  case SmilesErrorKind::kDuplicateRingBond:
    return "DuplicateRingBond";
  case SmilesErrorKind::kAromaticOutsideRing:
    return "AromaticOutsideRing";
  case SmilesErrorKind::kEmptyInput:
    return "EmptyInput";
  case SmilesErrorKind::kEmptyVocabulary:
    return "EmptyVocabulary";
  }
  return "Unknown";
}

SmilesError::SmilesError(SmilesErrorKind kind, std::ptrdiff_t detail,
                         const std::string& message)
    : InputError(std::string(to_string(kind)) + "(" + std::to_string(detail) +
                 "): " + message),
      kind_(kind), detail_(detail) { }

}  // namespace molmetric::smiles
