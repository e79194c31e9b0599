#pragma once
// Scaffold split: molecules sharing a Bemis-Murcko scaffold stay together.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "himol/error.hpp"

namespace himol::split {

class TooFewScaffolds : public Error {
 public:
  using Error::Error;
};

struct Split {
  std::vector<std::string> train, valid, test;
};

struct SplitRatios {
  double train = 0.8;
  double valid = 0.1;
};

// Groups sorted by descending size (equal sizes in seeded random order) fill
// train until it holds >= ratios.train of the molecules, then valid until
// >= ratios.valid, and the rest go to test. Train takes at most m - 2 of the
// m groups and valid leaves at least one for test, so with positive ratios
// no split is empty.
// Input order is kept inside each split. Throws TooFewScaffolds for fewer
// than three groups and ParseError for invalid SMILES.
Split scaffold_split(std::span<const std::string> smiles, std::uint64_t seed, SplitRatios ratios = {});

struct SplitIndices {
  std::vector<std::size_t> train, valid, test;
};

// Same assignment as scaffold_split, as ascending input indices.
SplitIndices scaffold_split_indices(std::span<const std::string> smiles, std::uint64_t seed, SplitRatios ratios = {});

// Canonical SMILES of the scaffold; empty for acyclic molecules.
std::string scaffold_key(const std::string& smiles);

}  // namespace himol::split
