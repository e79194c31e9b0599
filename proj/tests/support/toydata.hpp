#pragma once
// Synthetic molecule sets for tests and the acceptance suite.

#include <cstdint>
#include <string>
#include <vector>

#include "himol/rng.hpp"

namespace himol::testing {

enum class Family {
  Acyclic,     // short alkanes / alcohols / amines
  Carbocycle,  // cyclopentane / cyclohexane with side chains
  Aromatic,    // benzene / pyridine with side chains
  Mixed,
};

// One random valid SMILES (not canonicalized) from the family.
std::string random_molecule(Rng& rng, Family family);

// `n` distinct canonical SMILES from the family.
std::vector<std::string> corpus(Family family, std::size_t n, std::uint64_t seed);

// Canonical SMILES of ~200 hand-picked real molecules plus generated ones.
std::vector<std::string> roundtrip_corpus();

// Same molecule written with a random atom order.
std::string random_spelling(const std::string& smiles, Rng& rng);

}  // namespace himol::testing

namespace himol::testing {

// Corrupts a valid SMILES with 1-3 defects drawn from the repairable
// taxonomy (stray/missing branch tokens, dangling ring digits, valence
// overflow, 1- and 2-atom rings). Always returns an invalid string whose
// detected defects all belong to that taxonomy.
std::string fuzz_invalid(const std::string& valid, Rng& rng);

}  // namespace himol::testing
