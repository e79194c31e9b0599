#include <set>

#include "doctest.h"
#include "himol/chem/canon.hpp"
#include "himol/chem/smiles.hpp"
#include "himol/chem/valence.hpp"
#include "oracles.hpp"
#include "toydata.hpp"

using namespace himol;
using namespace himol::chem;

TEST_CASE("canonical form ignores spelling") {
  CHECK(canonical_smiles("C(C)C") == canonical_smiles("CCC"));
  CHECK(canonical_smiles("OCC") == canonical_smiles("CCO"));
  CHECK(canonical_smiles("C1=CC=CC=C1") == canonical_smiles("C=1C=CC=CC=1"));
  CHECK(canonical_smiles("c1ccccc1") == canonical_smiles("c1ccccc1"));
  CHECK(canonical_smiles("[Cl-].[Na+]") == canonical_smiles("[Na+].[Cl-]"));
  CHECK(canonical_smiles("CCO") != canonical_smiles("COC"));
  CHECK(canonical_smiles("F/C=C/F") == canonical_smiles("FC=CF"));
}

TEST_CASE("canonicalize rejects valence-inconsistent graphs") {
  MolGraph g;
  Atom c;
  c.hydrogens = 5;
  g.add_atom(c);
  CHECK_THROWS_AS(canonicalize(g), InvalidGraph);
}

TEST_CASE("canonical equality matches brute-force isomorphism on small graphs") {
  Rng rng(2024);
  int iso_pairs = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const MolGraph a = testing::random_small_graph(rng, 7);
    MolGraph b;
    switch (trial % 3) {
      case 0: b = a.permuted(testing::random_permutation(rng, a.atom_count())); break;
      default: b = testing::random_small_graph(rng, 7); break;
    }
    const bool iso = testing::brute_force_isomorphic(a, b);
    iso_pairs += iso;
    CHECK((canonicalize(a) == canonicalize(b)) == iso);
  }
  CHECK(iso_pairs >= 100);
}

TEST_CASE("round trip through canonical SMILES preserves the graph") {
  Rng rng(8);
  for (const auto& s : testing::roundtrip_corpus()) {
    CAPTURE(s);
    const MolGraph g = parse(s);
    const std::string c = canonicalize(g);
    CHECK(testing::backtrack_isomorphic(parse(c), g));
    CHECK(canonical_smiles(testing::random_spelling(s, rng)) == c);
  }
}

TEST_CASE("symmetric cages canonicalize consistently") {
  Rng rng(3);
  const std::string cubane = "C12C3C4C1C5C2C3C45";
  const std::string c = canonical_smiles(cubane);
  for (int i = 0; i < 5; ++i) CHECK(canonical_smiles(testing::random_spelling(cubane, rng)) == c);
}

TEST_CASE("generic certificate distinguishes labels") {
  LabeledGraph path{{1, 1, 2}, {{0, 1, 1}, {1, 2, 1}}};
  LabeledGraph path2{{2, 1, 1}, {{0, 1, 1}, {1, 2, 1}}};
  LabeledGraph bent{{1, 2, 1}, {{0, 1, 1}, {1, 2, 1}}};
  CHECK(certificate(path) == certificate(path2));
  CHECK(certificate(path) != certificate(bent));
}
