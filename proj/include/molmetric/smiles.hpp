//
// molmetric - Copyright 2026 The molmetric Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLMETRIC_SMILES_HPP
#define MOLMETRIC_SMILES_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "molmetric/error.hpp"

namespace molmetric::smiles {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

enum class SmilesErrorKind {
  kUnknownCharacter,
  kUnterminatedBracket,
  kInvalidBracketAtom,
  kUnexpectedToken,
  kUnclosedBranch,
  kUnmatchedRingClosure,
  kValenceViolation,
  kSelfBond,
  kDuplicateRingBond,
  kAromaticOutsideRing,
  kEmptyInput,
  kEmptyVocabulary,
};

std::string_view to_string(SmilesErrorKind kind);

// `detail` is the character offset (tokenizer errors), the ring-closure number
// (kUnmatchedRingClosure) or the atom index (valence/aromaticity errors).
class SmilesError : public InputError {
 public:
  SmilesError(SmilesErrorKind kind, std::ptrdiff_t detail,
              const std::string& message);

  SmilesErrorKind kind() const noexcept { return kind_; }
  std::ptrdiff_t detail() const noexcept { return detail_; }

 private:
  SmilesErrorKind kind_;
  std::ptrdiff_t detail_;
};

// ---------------------------------------------------------------------------
// Elements
// ---------------------------------------------------------------------------

// Atomic number for a capitalized element symbol, 0 if unknown.
int atomic_number(std::string_view symbol);
std::string_view element_symbol(int atomic_number);

// Allowed valences for organic-subset elements; empty for everything else.
std::span<const int> allowed_valences(int atomic_number);

// ---------------------------------------------------------------------------
// Tokens
// ---------------------------------------------------------------------------

enum class TokenKind {
  kAtomOrganic,
  kAtomBracket,
  kBond,
  kBranchOpen,
  kBranchClose,
  kRingClosure,
  kDot,
};

struct Token {
  TokenKind kind;
  std::string text;
  std::size_t position;

  bool operator==(const Token&) const = default;
};

// Splits a SMILES string into tokens. Concatenating the token texts
// reproduces the input exactly.
std::vector<Token> tokenize(std::string_view smiles);

// ---------------------------------------------------------------------------
// Molecular graph
// ---------------------------------------------------------------------------

enum class BondOrder : std::uint8_t {
  kSingle = 1,
  kDouble = 2,
  kTriple = 3,
  kAromatic = 4,
};

struct Atom {
  int atomic_number = 0;
  bool aromatic = false;
  int formal_charge = 0;
  std::optional<int> explicit_h;  // bracket atoms only
  std::optional<int> isotope;     // bracket atoms only
  int index = 0;
  bool bracket = false;
  int implicit_h = 0;  // derived; equals explicit_h for bracket atoms

  std::string_view symbol() const { return element_symbol(atomic_number); }
  int total_h() const { return bracket ? explicit_h.value_or(0) : implicit_h; }
};

struct Bond {
  int begin = 0;
  int end = 0;
  BondOrder order = BondOrder::kSingle;

  int other(int atom) const { return atom == begin ? end : begin; }
};

struct Neighbor {
  int atom;
  int bond;
};

class Molecule {
 public:
  Molecule() = default;
  explicit Molecule(std::string source) : source_(std::move(source)) { }

  int add_atom(Atom atom);
  // Returns the bond index; throws SmilesError on self or duplicate bonds.
  int add_bond(int begin, int end, BondOrder order);

  std::size_t num_atoms() const { return atoms_.size(); }
  std::size_t num_bonds() const { return bonds_.size(); }

  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<Bond>& bonds() const { return bonds_; }
  const Atom& atom(int i) const { return atoms_[i]; }
  Atom& atom(int i) { return atoms_[i]; }
  const Bond& bond(int i) const { return bonds_[i]; }
  Bond& bond(int i) { return bonds_[i]; }

  std::span<const Neighbor> neighbors(int atom) const {
    return adjacency_[atom];
  }
  int degree(int atom) const {
    return static_cast<int>(adjacency_[atom].size());
  }
  std::optional<int> find_bond(int a, int b) const;

  const std::string& source() const { return source_; }

  // Per-bond and per-atom ring membership, computed from bridges.
  std::vector<bool> ring_bonds() const;
  std::vector<bool> ring_atoms() const;

  // Number of connected components.
  int num_components() const;

  // Returns a copy whose atom i is this molecule's atom perm[i]. Bond list
  // order is permuted by the same scheme (sorted by new endpoints).
  Molecule permuted(std::span<const int> perm) const;

 private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::string source_;
};

// Builds the attributed graph. Aromatic bonds outside rings are demoted to
// single bonds; implicit hydrogens are assigned and valences checked.
Molecule parse(std::span<const Token> tokens, std::string source = {});
Molecule parse_smiles(std::string_view smiles);

// Assigns implicit hydrogen counts and enforces the valence table. Exposed
// for graph-level constructions that bypass the parser.
void assign_hydrogens(Molecule& mol);

struct Validity {
  bool valid = false;
  std::optional<SmilesErrorKind> reason;
  std::string message;
};

// Total function: never throws.
Validity check_validity(std::string_view smiles) noexcept;

// Symmetry classes from iterative neighbourhood refinement. Equivalent atoms
// share a rank; ranks are dense, starting at 0.
std::vector<int> canonical_ranks(const Molecule& mol);

std::string write_smiles(const Molecule& mol);

// ---------------------------------------------------------------------------
// One-hot encoding
// ---------------------------------------------------------------------------

class Vocabulary {
 public:
  static constexpr std::string_view kUnknown = "UNKNOWN";
  static constexpr std::string_view kEnd = "END";

  // `symbols` is the ordered column list; it must contain kUnknown and kEnd.
  explicit Vocabulary(std::vector<std::string> symbols);

  static const Vocabulary& default_vocabulary();

  std::size_t size() const { return symbols_.size(); }
  const std::vector<std::string>& symbols() const { return symbols_; }
  int unknown_column() const { return unknown_; }
  int end_column() const { return end_; }

  // Longest vocabulary symbol matching at `text[pos]`: (column, length).
  // Unmatched characters map to (unknown_column(), 1).
  std::pair<int, std::size_t> match(std::string_view text,
                                    std::size_t pos) const;

 private:
  std::vector<std::string> symbols_;
  int unknown_ = -1;
  int end_ = -1;
  std::size_t max_symbol_len_ = 0;
};

inline constexpr int kDefaultMaxLen = 350;

// Sparse representation of a one-hot matrix: row r has a single 1 in column
// columns()[r] for r < columns().size(); later rows are all-zero padding.
class TokenMatrix {
 public:
  TokenMatrix(std::vector<int> columns, int rows, int cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  // Number of non-padding rows, END row included.
  int length() const { return static_cast<int>(columns_.size()); }
  std::span<const int> columns() const { return columns_; }

  double operator()(int r, int c) const {
    return r < length() && columns_[r] == c ? 1.0 : 0.0;
  }

  template <typename Scalar = double>
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> dense() const {
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m =
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(rows_,
                                                                    cols_);
    for (int r = 0; r < length(); ++r) m(r, columns_[r]) = Scalar(1);
    return m;
  }

  // Same content with `extra` additional padding rows.
  TokenMatrix padded(int extra) const;

  bool operator==(const TokenMatrix&) const = default;

 private:
  std::vector<int> columns_;
  int rows_;
  int cols_;
};

TokenMatrix one_hot_encode(std::string_view smiles, const Vocabulary& vocab,
                           int max_len = kDefaultMaxLen);

}  // namespace molmetric::smiles

#endif  // MOLMETRIC_SMILES_HPP
