//
// molmetric - Copyright 2026 The molmetric Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>

#include "molmetric/smiles.hpp"

namespace molmetric::smiles {

// ---------------------------------------------------------------------------
// Molecule
// ---------------------------------------------------------------------------

int Molecule::add_atom(Atom atom) {
  atom.index = static_cast<int>(atoms_.size());
  atoms_.push_back(atom);
  adjacency_.emplace_back();
  return atom.index;
}

int Molecule::add_bond(int begin, int end, BondOrder order) {
  if (begin == end) {
    throw SmilesError(SmilesErrorKind::kSelfBond, begin,
                      "atom bonded to itself");
  }
  if (find_bond(begin, end)) {
    throw SmilesError(SmilesErrorKind::kDuplicateRingBond, begin,
                      "atoms " + std::to_string(begin) + " and " +
                          std::to_string(end) + " are already bonded");
  }
  const int idx = static_cast<int>(bonds_.size());
  bonds_.push_back({begin, end, order});
  adjacency_[begin].push_back({end, idx});
  adjacency_[end].push_back({begin, idx});
  return idx;
}

std::optional<int> Molecule::find_bond(int a, int b) const {
  for (const Neighbor& nb : adjacency_[a]) {
    if (nb.atom == b) return nb.bond;
  }
  return std::nullopt;
}

std::vector<bool> Molecule::ring_bonds() const {
  // Iterative Tarjan bridge search; every non-bridge bond lies on a cycle.
  const int n = static_cast<int>(atoms_.size());
  std::vector<int> disc(n, -1), low(n, 0);
  std::vector<bool> in_ring(bonds_.size(), true);
  struct Frame {
    int atom;
    int parent_bond;
    std::size_t next;
  };
  std::vector<Frame> stack;
  int timer = 0;
  for (int root = 0; root < n; ++root) {
    if (disc[root] >= 0) continue;
    disc[root] = low[root] = timer++;
    stack.push_back({root, -1, 0});
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.next < adjacency_[f.atom].size()) {
        const Neighbor nb = adjacency_[f.atom][f.next++];
        if (nb.bond == f.parent_bond) continue;
        if (disc[nb.atom] < 0) {
          disc[nb.atom] = low[nb.atom] = timer++;
          stack.push_back({nb.atom, nb.bond, 0});
        } else {
          low[f.atom] = std::min(low[f.atom], disc[nb.atom]);
        }
      } else {
        const Frame done = f;
        stack.pop_back();
        if (!stack.empty()) {
          Frame& parent = stack.back();
          low[parent.atom] = std::min(low[parent.atom], low[done.atom]);
          if (low[done.atom] > disc[parent.atom]) {
            in_ring[done.parent_bond] = false;
          }
        }
      }
    }
  }
  return in_ring;
}

std::vector<bool> Molecule::ring_atoms() const {
  const std::vector<bool> rb = ring_bonds();
  std::vector<bool> ra(atoms_.size(), false);
  for (std::size_t b = 0; b < bonds_.size(); ++b) {
    if (rb[b]) ra[bonds_[b].begin] = ra[bonds_[b].end] = true;
  }
  return ra;
}

int Molecule::num_components() const {
  std::vector<int> parent(atoms_.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  int components = static_cast<int>(atoms_.size());
  for (const Bond& b : bonds_) {
    int x = find(b.begin), y = find(b.end);
    if (x != y) {
      parent[x] = y;
      --components;
    }
  }
  return components;
}

Molecule Molecule::permuted(std::span<const int> perm) const {
  std::vector<int> inverse(atoms_.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inverse[perm[i]] = int(i);

  Molecule out(source_);
  for (int old : perm) out.add_atom(atoms_[old]);

  std::vector<Bond> mapped;
  mapped.reserve(bonds_.size());
  for (const Bond& b : bonds_) {
    int x = inverse[b.begin], y = inverse[b.end];
    mapped.push_back({std::min(x, y), std::max(x, y), b.order});
  }
  std::sort(mapped.begin(), mapped.end(), [](const Bond& l, const Bond& r) {
    return std::tie(l.begin, l.end) < std::tie(r.begin, r.end);
  });
  for (const Bond& b : mapped) out.add_bond(b.begin, b.end, b.order);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void unexpected(const Token& t, const std::string& why) {
  throw SmilesError(SmilesErrorKind::kUnexpectedToken,
                    static_cast<std::ptrdiff_t>(t.position),
                    "unexpected '" + t.text + "': " + why);
}

[[noreturn]] void bad_bracket(const Token& t, const std::string& why) {
  throw SmilesError(SmilesErrorKind::kInvalidBracketAtom,
                    static_cast<std::ptrdiff_t>(t.position),
                    "bracket atom " + t.text + ": " + why);
}

Atom organic_atom(const Token& t) {
  Atom atom;
  const char c = t.text[0];
  if (std::islower(static_cast<unsigned char>(c))) {
    atom.aromatic = true;
    atom.atomic_number =
        atomic_number(std::string(1, static_cast<char>(std::toupper(c))));
  } else {
    atom.atomic_number = atomic_number(t.text);
  }
  return atom;
}

// [isotope? symbol chiral? hcount? charge? class?]
Atom bracket_atom(const Token& t) {
  const std::string_view body =
      std::string_view(t.text).substr(1, t.text.size() - 2);
  std::size_t i = 0;
  auto peek = [&]() { return i < body.size() ? body[i] : '\0'; };
  auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
  auto read_int = [&]() {
    int v = 0;
    while (is_digit(peek())) {
      v = std::min(v * 10 + (body[i] - '0'), 1000000);
      ++i;
    }
    return v;
  };

  Atom atom;
  atom.bracket = true;

  if (is_digit(peek())) {
    const int iso = read_int();
    if (iso <= 0) bad_bracket(t, "isotope must be positive");
    atom.isotope = iso;
  }

  const char c0 = peek();
  if (std::isupper(static_cast<unsigned char>(c0))) {
    const char c1 = i + 1 < body.size() ? body[i + 1] : '\0';
    if (std::islower(static_cast<unsigned char>(c1)) &&
        atomic_number(body.substr(i, 2)) != 0) {
      atom.atomic_number = atomic_number(body.substr(i, 2));
      i += 2;
    } else {
      atom.atomic_number = atomic_number(body.substr(i, 1));
      i += 1;
    }
  } else if (std::islower(static_cast<unsigned char>(c0))) {
    atom.aromatic = true;
    static constexpr std::string_view kTwo[] = {"se", "as", "te"};
    bool matched = false;
    for (std::string_view two : kTwo) {
      if (body.substr(i, 2) == two) {
        atom.atomic_number = atomic_number(std::string{
            static_cast<char>(std::toupper(two[0])), two[1]});
        i += 2;
        matched = true;
        break;
      }
    }
    if (!matched) {
      static constexpr std::string_view kOne = "bcnops";
      if (kOne.find(c0) == std::string_view::npos) {
        bad_bracket(t, "unknown aromatic symbol");
      }
      atom.atomic_number = atomic_number(
          std::string(1, static_cast<char>(std::toupper(c0))));
      i += 1;
    }
  }
  if (atom.atomic_number == 0) bad_bracket(t, "unknown element symbol");

  // Chirality is parsed and discarded.
  while (peek() == '@') ++i;
  if (i > 0 && body[i - 1] == '@' && std::isupper(static_cast<unsigned char>(
                                         peek())) && peek() != 'H') {
    while (std::isupper(static_cast<unsigned char>(peek()))) ++i;
    read_int();
  }

  if (peek() == 'H') {
    ++i;
    atom.explicit_h = is_digit(peek()) ? read_int() : 1;
  } else {
    atom.explicit_h = 0;
  }

  if (peek() == '+' || peek() == '-') {
    const char sign = body[i++];
    int magnitude = 1;
    if (is_digit(peek())) {
      magnitude = read_int();
    } else {
      while (peek() == sign) {
        ++magnitude;
        ++i;
      }
    }
    if (magnitude > 15) bad_bracket(t, "charge out of range");
    atom.formal_charge = sign == '+' ? magnitude : -magnitude;
  }

  if (peek() == ':') {
    ++i;
    if (!is_digit(peek())) bad_bracket(t, "atom class needs digits");
    read_int();
  }

  if (i != body.size()) bad_bracket(t, "trailing characters");
  return atom;
}

BondOrder bond_from_token(const Token& t) {
  switch (t.text[0]) {
  case '=':
    return BondOrder::kDouble;
  case '#':
    return BondOrder::kTriple;
  case ':':
    return BondOrder::kAromatic;
  default:  // '-', '/', '\'
    return BondOrder::kSingle;
  }
}

int bond_valence_floor(BondOrder order) {
  return order == BondOrder::kAromatic ? 1 : static_cast<int>(order);
}

}  // namespace

void assign_hydrogens(Molecule& mol) {
  for (std::size_t a = 0; a < mol.num_atoms(); ++a) {
    Atom& atom = mol.atom(int(a));
    int base = 0;
    int aromatic_bonds = 0;
    for (const Neighbor& nb : mol.neighbors(int(a))) {
      const BondOrder order = mol.bond(nb.bond).order;
      base += bond_valence_floor(order);
      aromatic_bonds += order == BondOrder::kAromatic;
    }
    const std::span<const int> valences = allowed_valences(atom.atomic_number);

    if (atom.bracket) {
      atom.implicit_h = atom.explicit_h.value_or(0);
      if (atom.formal_charge != 0 || valences.empty()) continue;
      if (base + atom.implicit_h > valences.back()) {
        throw SmilesError(SmilesErrorKind::kValenceViolation, int(a),
                          "bond order sum " +
                              std::to_string(base + atom.implicit_h) +
                              " exceeds allowed valence of " +
                              std::string(atom.symbol()));
      }
      continue;
    }

    auto target = std::find_if(valences.begin(), valences.end(),
                               [&](int v) { return v >= base; });
    if (target == valences.end()) {
      throw SmilesError(SmilesErrorKind::kValenceViolation, int(a),
                        "bond order sum " + std::to_string(base) +
                            " exceeds allowed valence of " +
                            std::string(atom.symbol()));
    }
    // An aromatic atom contributes one extra bond to the pi system when its
    // lowest fitting valence leaves room for it.
    const bool pi = atom.aromatic && aromatic_bonds > 0 && base + 1 <= *target;
    atom.implicit_h = *target - base - (pi ? 1 : 0);
  }
}

Molecule parse(std::span<const Token> tokens, std::string source) {
  if (tokens.empty()) {
    throw SmilesError(SmilesErrorKind::kEmptyInput, 0, "no tokens");
  }
  if (source.empty()) {
    for (const Token& t : tokens) source += t.text;
  }

  struct OpenRing {
    int atom;
    std::optional<BondOrder> order;
  };

  Molecule mol(std::move(source));
  std::optional<int> prev;
  std::optional<BondOrder> pending;
  std::vector<int> branches;
  std::map<int, OpenRing> rings;
  const Token* last = nullptr;

  auto default_order = [&](int a, int b) {
    return mol.atom(a).aromatic && mol.atom(b).aromatic ? BondOrder::kAromatic
                                                        : BondOrder::kSingle;
  };

  for (const Token& t : tokens) {
    switch (t.kind) {
    case TokenKind::kAtomOrganic:
    case TokenKind::kAtomBracket: {
      const int idx = mol.add_atom(t.kind == TokenKind::kAtomOrganic
                                       ? organic_atom(t)
                                       : bracket_atom(t));
      if (prev) mol.add_bond(*prev, idx, pending.value_or(default_order(*prev, idx)));
      prev = idx;
      pending.reset();
      break;
    }
    case TokenKind::kBond:
      if (!prev) unexpected(t, "bond without a preceding atom");
      if (pending) unexpected(t, "two consecutive bonds");
      pending = bond_from_token(t);
      break;
    case TokenKind::kRingClosure: {
      if (!prev) unexpected(t, "ring closure without a preceding atom");
      const int number =
          t.text[0] == '%' ? std::stoi(t.text.substr(1)) : t.text[0] - '0';
      auto it = rings.find(number);
      if (it == rings.end()) {
        rings.emplace(number, OpenRing{*prev, pending});
      } else {
        const OpenRing open = it->second;
        rings.erase(it);
        if (open.atom == *prev) {
          throw SmilesError(SmilesErrorKind::kSelfBond, *prev,
                            "ring closure " + t.text + " bonds an atom to itself");
        }
        if (open.order && pending && *open.order != *pending) {
          unexpected(t, "conflicting ring-closure bond orders");
        }
        const BondOrder order =
            pending ? *pending
                    : open.order.value_or(default_order(open.atom, *prev));
        mol.add_bond(open.atom, *prev, order);
      }
      pending.reset();
      break;
    }
    case TokenKind::kBranchOpen:
      if (!prev) unexpected(t, "branch without a preceding atom");
      if (pending) unexpected(t, "bond before branch");
      branches.push_back(*prev);
      break;
    case TokenKind::kBranchClose:
      if (branches.empty()) unexpected(t, "no open branch");
      if (pending) unexpected(t, "dangling bond");
      if (last && last->kind == TokenKind::kBranchOpen) {
        unexpected(t, "empty branch");
      }
      prev = branches.back();
      branches.pop_back();
      break;
    case TokenKind::kDot:
      if (!prev || pending) unexpected(t, "dot must separate two atoms");
      if (!branches.empty()) unexpected(t, "dot inside a branch");
      prev.reset();
      break;
    }
    last = &t;
  }

  if (pending || last->kind == TokenKind::kDot) {
    unexpected(*last, "input ends mid-bond");
  }
  if (!branches.empty()) {
    throw SmilesError(SmilesErrorKind::kUnclosedBranch,
                      static_cast<std::ptrdiff_t>(branches.size()),
                      "unclosed branch");
  }
  if (!rings.empty()) {
    throw SmilesError(SmilesErrorKind::kUnmatchedRingClosure,
                      rings.begin()->first,
                      "ring " + std::to_string(rings.begin()->first) +
                          " is never closed");
  }

  const std::vector<bool> ring_bond = mol.ring_bonds();
  for (std::size_t b = 0; b < mol.num_bonds(); ++b) {
    if (!ring_bond[b] && mol.bond(int(b)).order == BondOrder::kAromatic) {
      mol.bond(int(b)).order = BondOrder::kSingle;
    }
  }
  const std::vector<bool> ring_atom = mol.ring_atoms();
  for (std::size_t a = 0; a < mol.num_atoms(); ++a) {
    if (mol.atom(int(a)).aromatic && !ring_atom[a]) {
      throw SmilesError(SmilesErrorKind::kAromaticOutsideRing, int(a),
                        "aromatic atom outside any ring");
    }
  }
  assign_hydrogens(mol);
  return mol;
}

Molecule parse_smiles(std::string_view smiles) {
  return parse(tokenize(smiles), std::string(smiles));
}

Validity check_validity(std::string_view smiles) noexcept {
  try {
    parse_smiles(smiles);
    return {true, std::nullopt, {}};
  } catch (const SmilesError& e) {
    return {false, e.kind(), e.what()};
  } catch (const std::exception& e) {
    return {false, SmilesErrorKind::kUnexpectedToken, e.what()};
  } catch (...) {
    return {false, SmilesErrorKind::kUnexpectedToken, "unknown failure"};
  }
}

}  // namespace molmetric::smiles
