//
// molmetric - Copyright 2026 The molmetric Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <algorithm>
#include <set>

#include "molmetric/smiles.hpp"
#include "support/corpus.hpp"
#include "support/oracles.hpp"

using namespace molmetric;
using namespace molmetric::smiles;

namespace {

SmilesErrorKind error_kind(std::string_view s) {
  try {
    parse_smiles(s);
  } catch (const SmilesError& e) {
    return e.kind();
  }
  FAIL("expected a SmilesError for " << s);
  return SmilesErrorKind::kEmptyInput;
}

std::ptrdiff_t error_detail(std::string_view s) {
  try {
    parse_smiles(s);
  } catch (const SmilesError& e) {
    return e.detail();
  }
  return -1;
}

std::string join(const std::vector<Token>& tokens) {
  std::string out;
  for (const Token& t : tokens) out += t.text;
  return out;
}

int count_kind(const std::vector<Token>& tokens, TokenKind kind) {
  return static_cast<int>(std::count_if(tokens.begin(), tokens.end(),
                                        [&](const Token& t) { return t.kind == kind; }));
}

}  // namespace

TEST_SUITE("smiles") {

TEST_CASE("tokenize splits atoms") {
  const auto t = tokenize("CC");
  REQUIRE(t.size() == 2);
  CHECK(t[0] == Token{TokenKind::kAtomOrganic, "C", 0});
  CHECK(t[1] == Token{TokenKind::kAtomOrganic, "C", 1});
}

TEST_CASE("two-letter organic symbols are single tokens") {
  const auto t = tokenize("CCl");
  REQUIRE(t.size() == 2);
  CHECK(t[1].text == "Cl");
  const auto b = tokenize("BrC[Cl-]");
  REQUIRE(b.size() == 3);
  CHECK(b[0].text == "Br");
  CHECK(b[2].kind == TokenKind::kAtomBracket);
  CHECK(b[2].text == "[Cl-]");
}

TEST_CASE("tokenizer errors carry the offset") {
  try {
    tokenize("C$C");
    FAIL("no error");
  } catch (const SmilesError& e) {
    CHECK(e.kind() == SmilesErrorKind::kUnknownCharacter);
    CHECK(e.detail() == 1);
  }
  CHECK_THROWS_AS(tokenize("C[NH"), SmilesError);
  CHECK(error_kind("C[NH") == SmilesErrorKind::kUnterminatedBracket);
}

TEST_CASE("token kinds") {
  const auto t = tokenize("C1=CC(Br)=CC%12.C%12#N");
  CHECK(join(t) == "C1=CC(Br)=CC%12.C%12#N");
  CHECK(count_kind(t, TokenKind::kRingClosure) == 3);
  CHECK(count_kind(t, TokenKind::kBranchOpen) == 1);
  CHECK(count_kind(t, TokenKind::kBranchClose) == 1);
  CHECK(count_kind(t, TokenKind::kDot) == 1);
  CHECK(count_kind(t, TokenKind::kBond) == 3);
  for (const Token& tok : t) {
    if (tok.kind == TokenKind::kRingClosure) {
      CHECK((tok.text.size() == 1 || (tok.text.size() == 3 && tok.text[0] == '%')));
    }
  }
}

TEST_CASE("parse ethanol") {
  const Molecule m = parse_smiles("CCO");
  REQUIRE(m.num_atoms() == 3);
  REQUIRE(m.num_bonds() == 2);
  for (const Bond& b : m.bonds()) CHECK(b.order == BondOrder::kSingle);
  CHECK(m.atom(2).atomic_number == 8);
  CHECK(m.atom(0).implicit_h == 3);
  CHECK(m.atom(1).implicit_h == 2);
  CHECK(m.atom(2).implicit_h == 1);
}

TEST_CASE("parse benzene") {
  const Molecule m = parse_smiles("c1ccccc1");
  REQUIRE(m.num_atoms() == 6);
  REQUIRE(m.num_bonds() == 6);
  for (const Atom& a : m.atoms()) {
    CHECK(a.aromatic);
    CHECK(a.atomic_number == 6);
    CHECK(a.implicit_h == 1);
  }
  for (const Bond& b : m.bonds()) CHECK(b.order == BondOrder::kAromatic);
  const auto ring = m.ring_atoms();
  CHECK(std::all_of(ring.begin(), ring.end(), [](bool r) { return r; }));
  for (int i = 0; i < 6; ++i) CHECK(m.degree(i) == 2);
}

TEST_CASE("parse errors") {
  CHECK(error_kind("C1CC") == SmilesErrorKind::kUnmatchedRingClosure);
  CHECK(error_detail("C1CC") == 1);
  CHECK(error_kind("C(") == SmilesErrorKind::kUnclosedBranch);
  CHECK(error_kind("C11") == SmilesErrorKind::kSelfBond);
  CHECK(error_kind("C12CCC12") == SmilesErrorKind::kDuplicateRingBond);
  CHECK(error_kind("C=O=C") == SmilesErrorKind::kValenceViolation);
  CHECK(error_detail("C=O=C") == 1);
  CHECK(error_kind("FC(F)(F)(F)F") == SmilesErrorKind::kValenceViolation);
  CHECK(error_kind("") == SmilesErrorKind::kEmptyInput);
}

TEST_CASE("valence table") {
  CHECK(check_validity("C(C)(C)(C)C").valid);
  CHECK(check_validity("CN(=O)=O").valid);        // N at valence 5
  CHECK(check_validity("CS(=O)(=O)C").valid);     // S at valence 6
  CHECK(check_validity("OP(=O)(O)O").valid);      // P at valence 5
  CHECK_FALSE(check_validity("ClCl=C").valid);
  CHECK_FALSE(check_validity("B(C)(C)(C)C").valid);
  // Charged bracket atoms are exempt.
  CHECK(check_validity("C[N+](C)(C)C").valid);
  CHECK(check_validity("[O-][N+](=O)c1ccccc1").valid);
}

TEST_CASE("check_validity examples") {
  CHECK(check_validity("CC").valid);
  const Validity open = check_validity("C(");
  CHECK_FALSE(open.valid);
  CHECK(open.reason == SmilesErrorKind::kUnclosedBranch);
  const Validity val = check_validity("C=O=C");
  CHECK_FALSE(val.valid);
  CHECK(val.reason == SmilesErrorKind::kValenceViolation);
  CHECK_FALSE(check_validity("").valid);
  CHECK_FALSE(check_validity(std::string_view("C\0C", 3)).valid);
}

TEST_CASE("bracket atoms") {
  const Molecule m = parse_smiles("[13CH4]");
  CHECK(m.atom(0).isotope == 13);
  CHECK(m.atom(0).explicit_h == 4);
  const Molecule n = parse_smiles("[NH4+]");
  CHECK(n.atom(0).formal_charge == 1);
  CHECK(n.atom(0).total_h() == 4);
  const Molecule o = parse_smiles("[O--]");
  CHECK(o.atom(0).formal_charge == -2);
  const Molecule fe = parse_smiles("[Fe+3]");
  CHECK(fe.atom(0).symbol() == "Fe");
  CHECK(fe.atom(0).formal_charge == 3);
  CHECK_FALSE(parse_smiles("C").atom(0).isotope.has_value());
  CHECK_FALSE(parse_smiles("C").atom(0).explicit_h.has_value());
}

TEST_CASE("stereo markers are discarded") {
  const Molecule a = parse_smiles("F/C=C/F");
  const Molecule b = parse_smiles("FC=CF");
  CHECK(testing::isomorphic(a, b));
  CHECK(testing::isomorphic(parse_smiles("N[C@@H](C)C(=O)O"),
                            parse_smiles("N[CH](C)C(=O)O")));
}

TEST_CASE("disconnected components need a dot") {
  CHECK(parse_smiles("CC.O").num_components() == 2);
  CHECK(parse_smiles("CCO").num_components() == 1);
  CHECK(parse_smiles("C1.C1").num_components() == 1);
}

TEST_CASE("canonical ranks") {
  const auto same = [](const std::vector<int>& r) {
    return std::set<int>(r.begin(), r.end()).size();
  };
  CHECK(same(canonical_ranks(parse_smiles("CC"))) == 1);
  CHECK(same(canonical_ranks(parse_smiles("CCO"))) == 3);
  CHECK(same(canonical_ranks(parse_smiles("c1ccccc1"))) == 1);
  CHECK(same(canonical_ranks(parse_smiles("CC(C)C"))) == 2);
}

TEST_CASE("canonical ranks follow atom permutations") {
  const Molecule m = parse_smiles("CC(=O)Nc1ccc(O)cc1");
  const auto ranks = canonical_ranks(m);
  SplitMix64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> perm(m.num_atoms());
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = perm.size() - 1; i > 0; --i) {
      std::swap(perm[i], perm[rng.below(i + 1)]);
    }
    const auto permuted = canonical_ranks(m.permuted(perm));
    for (std::size_t i = 0; i < perm.size(); ++i) CHECK(permuted[i] == ranks[perm[i]]);
  }
}

TEST_CASE("write_smiles round trips") {
  for (const char* s : {"OCC", "CC(C)C", "C1CCCCC1", "c1ccccc1", "C#N", "[NH4+].[Cl-]",
                        "CC(=O)Oc1ccccc1C(=O)O", "C1CC2CCC1CC2", "[13CH3]O",
                        "O=C1NC(=O)C2=C1C=CC=C2", "c1ccc2[nH]ccc2c1"}) {
    CAPTURE(s);
    const Molecule m = parse_smiles(s);
    const std::string out = write_smiles(m);
    CAPTURE(out);
    CHECK(testing::isomorphic(m, parse_smiles(out)));
    CHECK(write_smiles(parse_smiles(out)) == out);
  }
}

TEST_CASE("write_smiles examples") {
  const auto ring = tokenize(write_smiles(parse_smiles("C1CCCCC1")));
  CHECK(count_kind(ring, TokenKind::kRingClosure) == 2);

  const Molecule iso = parse_smiles(write_smiles(parse_smiles("CC(C)C")));
  std::vector<int> degrees;
  for (int i = 0; i < 4; ++i) degrees.push_back(iso.degree(i));
  std::sort(degrees.begin(), degrees.end());
  CHECK(degrees == std::vector<int>{1, 1, 1, 3});
}

TEST_CASE("write_smiles is independent of input atom order") {
  const Molecule m = parse_smiles("Cc1ccc(cc1)S(=O)(=O)N");
  const std::string ref = write_smiles(m);
  std::vector<int> perm(m.num_atoms());
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  CHECK(write_smiles(m.permuted(perm)) == ref);
}

TEST_CASE("one_hot_encode") {
  const Vocabulary vocab({"a", "b", "c", "d", "e", "C", "Cl", "UNKNOWN", "END"});
  const TokenMatrix m = one_hot_encode("CC", vocab, 4);
  CHECK(m.rows() == 4);
  CHECK(m.cols() == 9);
  REQUIRE(m.length() == 3);
  CHECK(m.columns()[0] == 5);
  CHECK(m.columns()[1] == 5);
  CHECK(m.columns()[2] == vocab.end_column());
  for (int c = 0; c < 9; ++c) CHECK(m(3, c) == 0.0);

  const TokenMatrix unk = one_hot_encode("CZ", vocab, 10);
  CHECK(unk.columns()[1] == vocab.unknown_column());

  const TokenMatrix cut = one_hot_encode("CCCCC", vocab, 3);
  CHECK(cut.length() == 3);
  CHECK(cut.columns()[2] == vocab.end_column());

  const TokenMatrix cl = one_hot_encode("CCl", vocab, 10);
  CHECK(cl.length() == 3);
  CHECK(cl.columns()[1] == 6);

  const Eigen::MatrixXd dense = one_hot_encode("CCl", vocab, 10).dense();
  const Eigen::VectorXd sums = dense.rowwise().sum();
  for (int r = 0; r < 10; ++r) CHECK((sums(r) == 0.0 || sums(r) == 1.0));
}

TEST_CASE("vocabulary validation") {
  CHECK_THROWS_AS(Vocabulary({}), InputError);
  CHECK_THROWS_AS(Vocabulary({"C", "END"}), InputError);
  const Vocabulary& v = Vocabulary::default_vocabulary();
  CHECK(v.size() == 39);
  CHECK(v.symbols().front() == "C");
  CHECK(v.symbols()[static_cast<std::size_t>(v.end_column())] == "END");
}

TEST_CASE("token matrix padding") {
  const TokenMatrix m = one_hot_encode("CCO", Vocabulary::default_vocabulary());
  CHECK(m.rows() == kDefaultMaxLen);
  const TokenMatrix p = m.padded(5);
  CHECK(p.rows() == m.rows() + 5);
  CHECK(p.length() == m.length());
}

TEST_CASE("check_validity is total on random bytes") {
  SplitMix64 rng(11);
  int valid = 0;
  for (int i = 0; i < 20000; ++i) {
    std::string s(1 + rng.below(24), '\0');
    for (char& ch : s) ch = static_cast<char>(rng.below(256));
    valid += check_validity(s).valid;
  }
  CHECK(valid >= 0);
}

TEST_CASE("corpus sample round trips") {
  const auto corpus = testing::corpus_smiles(2000);
  REQUIRE(corpus.size() == 2000);
  for (const std::string& s : corpus) {
    CAPTURE(s);
    const auto tokens = tokenize(s);
    CHECK(join(tokens) == s);
    CHECK(count_kind(tokens, TokenKind::kRingClosure) % 2 == 0);
    const Molecule m = parse(tokens, s);
    const std::string out = write_smiles(m);
    CHECK(testing::isomorphic(m, parse_smiles(out)));
  }
}

}  // TEST_SUITE
