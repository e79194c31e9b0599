#include "doctest.h"
#include "himol/chem/smiles.hpp"
#include "himol/chem/valence.hpp"
#include "himol/rng.hpp"

using namespace himol::chem;

namespace {
DefectKind parse_kind(std::string_view s) {
  try {
    parse(s);
  } catch (const ParseError& e) {
    return e.kind();
  }
  FAIL("expected ParseError for " << s);
  return DefectKind::Empty;
}

int total_h(const MolGraph& g) {
  int h = 0;
  for (const auto& a : g.atoms()) h += a.hydrogens;
  return h;
}
}  // namespace

TEST_CASE("parse: defect categories") {
  CHECK(parse_kind("CC)CCC") == DefectKind::UnmatchedBranchClose);
  CHECK(parse_kind("CC(CCC") == DefectKind::UnclosedBranch);
  CHECK(parse_kind("CC1CCC") == DefectKind::UnclosedRing);
  CHECK(parse_kind("C#C(=CC)C") == DefectKind::ValenceViolation);
  CHECK(parse_kind("CC1C1") == DefectKind::RingTooSmall);
  CHECK(parse_kind("C11") == DefectKind::RingTooSmall);
  CHECK(parse_kind("C12CCCC12") == DefectKind::DuplicateBond);
  CHECK(parse_kind("c1cccc1") == DefectKind::Aromaticity);
  CHECK(parse_kind("c1ccnc1") == DefectKind::Aromaticity);
  CHECK(parse_kind("cC") == DefectKind::Aromaticity);
  CHECK(parse_kind("C=") == DefectKind::Syntax);
  CHECK(parse_kind("C()C") == DefectKind::Syntax);
  CHECK(parse_kind("(C)C") == DefectKind::Syntax);
  CHECK(parse_kind("C=1CCC-1") == DefectKind::Syntax);
  CHECK(parse_kind("[Xe]") == DefectKind::UnknownElement);
  CHECK(parse_kind("") == DefectKind::Empty);
}

TEST_CASE("parse: valence error reports the atom index") {
  try {
    parse("C#C(=CC)C");
  } catch (const ParseError& e) {
    CHECK(e.atom() == 1);
  }
}

TEST_CASE("parse: cyclohexane") {
  const MolGraph g = parse("C1CCCCC1");
  CHECK(g.atom_count() == 6);
  CHECK(g.bond_count() == 6);
  for (const auto& b : g.bonds()) CHECK(b.order == BondOrder::Single);
  for (int i = 0; i < 6; ++i) CHECK(g.degree(i) == 2);
  CHECK(total_h(g) == 12);
}

TEST_CASE("parse: aromatic systems and hydrogens") {
  CHECK(total_h(parse("c1ccccc1")) == 6);
  CHECK(total_h(parse("c1ccncc1")) == 5);
  CHECK(total_h(parse("c1ccc2ccccc2c1")) == 8);
  CHECK(total_h(parse("c1cc[nH]c1")) == 5);
  CHECK(total_h(parse("c1ccsc1")) == 4);
  CHECK(total_h(parse("Cc1ccccc1")) == 8);
  // Inter-ring bond written without '-' is single, not aromatic.
  const MolGraph biphenyl = parse("c1ccccc1c1ccccc1");
  CHECK(biphenyl.bond(biphenyl.find_bond(5, 6)).order == BondOrder::Single);
}

TEST_CASE("parse: dots, charges and hypervalent elements") {
  const MolGraph salt = parse("[Na+].[Cl-]");
  CHECK(salt.atom_count() == 2);
  CHECK(salt.bond_count() == 0);
  CHECK(total_h(parse("C[N+](C)(C)C")) == 12);
  CHECK(is_valid("CS(=O)(=O)C"));
  CHECK(is_valid("OP(=O)(O)O"));
  CHECK(total_h(parse("CS(C)=O")) == 6);
  CHECK(!is_valid("C[N](C)(C)(C)C"));
  CHECK(!is_valid("O=O=O"));
  CHECK(is_valid("[NH4+]"));
  CHECK(!is_valid("[NH5+]"));
  CHECK(is_valid("F/C=C/F"));
  CHECK(is_valid("N[C@@H](C)C(=O)O"));
}

TEST_CASE("is_valid fixtures") {
  CHECK_FALSE(is_valid("C#C(=CC)C"));
  CHECK(is_valid("CCCC"));
  CHECK_FALSE(is_valid(""));
  CHECK(is_valid("C1CC1"));
  CHECK(is_valid("C%10CC%10"));
}

TEST_CASE("is_valid is total on arbitrary bytes") {
  himol::Rng rng(5);
  const std::string alphabet = "CNOScnos()[]=#%123456789+-@/\\.HBrl:$ \x01\xff";
  for (int iter = 0; iter < 20000; ++iter) {
    std::string s;
    const auto len = rng.index(24);
    for (std::uint64_t i = 0; i < len; ++i) s += alphabet[rng.index(alphabet.size())];
    CHECK_NOTHROW((void)is_valid(s));
  }
}

TEST_CASE("analyze keeps going past defects") {
  const Structure s = analyze("CC)C(C");
  CHECK(s.graph.atom_count() == 4);
  REQUIRE(s.defects.size() == 2);
  CHECK(s.first_defect()->kind == DefectKind::UnmatchedBranchClose);
}
