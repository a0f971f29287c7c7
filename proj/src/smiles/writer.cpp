//
// molmetric - Copyright 2026 The molmetric Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "molmetric/smiles.hpp"

namespace molmetric::smiles {
namespace {

// Neighbourhood refinement starting from `ranks`; returns dense ranks once
// the number of classes stops growing.
std::vector<int> refine(const Molecule& mol, std::vector<int> ranks) {
  const std::size_t n = ranks.size();
  using Signature = std::pair<int, std::vector<std::pair<int, int>>>;
  std::size_t classes = 0;
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
    std::vector<Signature> sorted = sig;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (std::size_t i = 0; i < n; ++i) {
      ranks[i] = static_cast<int>(
          std::lower_bound(sorted.begin(), sorted.end(), sig[i]) -
          sorted.begin());
    }
    if (sorted.size() == classes) return ranks;
    classes = sorted.size();
  }
}

// Refines symmetry classes into a total order by repeatedly splitting the
// lowest tied class on its lowest-index member.
std::vector<int> total_order(const Molecule& mol) {
  std::vector<int> ranks = canonical_ranks(mol);
  const std::size_t n = ranks.size();
  while (true) {
    std::vector<int> counts(n, 0);
    for (int r : ranks) ++counts[r];
    auto tied = std::find_if(counts.begin(), counts.end(),
                             [](int c) { return c > 1; });
    if (tied == counts.end()) return ranks;
    const int tied_rank = static_cast<int>(tied - counts.begin());

    std::vector<int> doubled(n);
    bool split = false;
    for (std::size_t i = 0; i < n; ++i) {
      doubled[i] = 2 * ranks[i] + 1;
      if (!split && ranks[i] == tied_rank) {
        doubled[i] = 2 * ranks[i];
        split = true;
      }
    }
    ranks = refine(mol, std::move(doubled));
  }
}

bool is_organic_subset(int z) {
  return !allowed_valences(z).empty();
}

std::string atom_text(const Atom& a) {
  std::string sym(a.symbol());
  if (a.aromatic) {
    for (char& c : sym) c = static_cast<char>(std::tolower(c));
  }
  if (!a.bracket && a.formal_charge == 0 && !a.isotope &&
      is_organic_subset(a.atomic_number)) {
    return sym;
  }
  std::string out = "[";
  if (a.isotope) out += std::to_string(*a.isotope);
  out += sym;
  const int h = a.total_h();
  if (h > 0) out += h == 1 ? std::string("H") : "H" + std::to_string(h);
  if (a.formal_charge != 0) {
    out += a.formal_charge > 0 ? '+' : '-';
    const int mag = std::abs(a.formal_charge);
    if (mag > 1) out += std::to_string(mag);
  }
  out += ']';
  return out;
}

std::string bond_text(const Molecule& mol, const Bond& b) {
  const bool both_aromatic = mol.atom(b.begin).aromatic && mol.atom(b.end).aromatic;
  switch (b.order) {
  case BondOrder::kSingle:
    return both_aromatic ? "-" : "";
  case BondOrder::kDouble:
    return "=";
  case BondOrder::kTriple:
    return "#";
  case BondOrder::kAromatic:
    return both_aromatic ? "" : ":";
  }
  return "";
}

std::string ring_label(int d) {
  return d < 10 ? std::to_string(d) : "%" + std::to_string(d);
}

class Writer {
 public:
  explicit Writer(const Molecule& mol)
      : mol_(mol), rank_(total_order(mol)), visited_(mol.num_atoms(), false),
        is_tree_(mol.num_bonds(), false), ring_opens_(mol.num_atoms()),
        ring_digit_(mol.num_bonds(), 0) { }

  std::string write() {
    std::vector<int> starts(mol_.num_atoms());
    for (std::size_t i = 0; i < starts.size(); ++i) starts[i] = int(i);
    std::sort(starts.begin(), starts.end(),
              [&](int a, int b) { return rank_[a] < rank_[b]; });

    std::string out;
    for (int s : starts) {
      if (visited_[s]) continue;
      discover(s, -1);
      if (!out.empty()) out += '.';
      emit(s, -1, out);
    }
    return out;
  }

 private:
  std::vector<Neighbor> sorted_neighbors(int atom) const {
    std::vector<Neighbor> nbs(mol_.neighbors(atom).begin(),
                              mol_.neighbors(atom).end());
    std::sort(nbs.begin(), nbs.end(), [&](const Neighbor& l, const Neighbor& r) {
      return rank_[l.atom] < rank_[r.atom];
    });
    return nbs;
  }

  // First pass: classify tree edges and ring-closure edges.
  void discover(int atom, int parent_bond) {
    visited_[atom] = true;
    order_.push_back(atom);
    for (const Neighbor& nb : sorted_neighbors(atom)) {
      if (nb.bond == parent_bond) continue;
      if (!visited_[nb.atom]) {
        is_tree_[nb.bond] = true;
        discover(nb.atom, nb.bond);
      } else if (!is_tree_[nb.bond] && !seen_ring_.count(nb.bond)) {
        // nb.atom was reached first, so the ring opens there.
        seen_ring_.insert(nb.bond);
        ring_opens_[nb.atom].push_back(nb.bond);
      }
    }
  }

  int allocate_digit() {
    for (int d = 1;; ++d) {
      if (!used_digits_.count(d)) {
        used_digits_.insert(d);
        return d;
      }
    }
  }

  void emit(int atom, int parent_bond, std::string& out) {
    out += atom_text(mol_.atom(atom));

    // Close rings that were opened at an earlier atom.
    for (const Neighbor& nb : sorted_neighbors(atom)) {
      if (nb.bond == parent_bond || is_tree_[nb.bond]) continue;
      const int d = ring_digit_[nb.bond];
      if (d != 0 && opened_at_.count(nb.bond) && opened_at_[nb.bond] != atom) {
        out += ring_label(d);
        used_digits_.erase(d);
        ring_digit_[nb.bond] = 0;
        opened_at_.erase(nb.bond);
      }
    }
    for (int b : ring_opens_[atom]) {
      const int d = allocate_digit();
      ring_digit_[b] = d;
      opened_at_[b] = atom;
      out += bond_text(mol_, mol_.bond(b));
      out += ring_label(d);
    }

    std::vector<Neighbor> children;
    for (const Neighbor& nb : sorted_neighbors(atom)) {
      if (nb.bond != parent_bond && is_tree_[nb.bond] &&
          !emitted_[nb.atom]) {
        children.push_back(nb);
      }
    }
    emitted_[atom] = true;
    for (std::size_t c = 0; c < children.size(); ++c) {
      const Neighbor nb = children[c];
      const bool branch = c + 1 < children.size();
      if (branch) out += '(';
      out += bond_text(mol_, mol_.bond(nb.bond));
      emit(nb.atom, nb.bond, out);
      if (branch) out += ')';
    }
  }

  const Molecule& mol_;
  std::vector<int> rank_;
  std::vector<bool> visited_;
  std::vector<bool> is_tree_;
  std::vector<std::vector<int>> ring_opens_;
  std::vector<int> ring_digit_;
  std::vector<int> order_;
  std::set<int> seen_ring_;
  std::set<int> used_digits_;
  std::map<int, int> opened_at_;
  std::map<int, bool> emitted_;
};

}  // namespace

std::string write_smiles(const Molecule& mol) {
  if (mol.num_atoms() == 0) return {};
  return Writer(mol).write();
}

}  // namespace molmetric::smiles
