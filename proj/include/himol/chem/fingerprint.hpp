#pragma once
#include <cstdint>
#include <vector>

#include "himol/chem/molgraph.hpp"

namespace himol::chem {

class MismatchedParams : public Error {
 public:
  using Error::Error;
};

// Circular (ECFP-style) bit fingerprint.
struct Fingerprint {
  std::vector<std::uint64_t> words;
  int width = 2048;
  int radius = 2;

  bool test(std::size_t bit) const { return (words[bit / 64] >> (bit % 64)) & 1U; }
  void set(std::size_t bit) { words[bit / 64] |= std::uint64_t{1} << (bit % 64); }
  std::size_t count() const;
  bool operator==(const Fingerprint&) const = default;
};

// Width must be a power of two >= 64. Throws InvalidGraph for
// valence-inconsistent input, std::invalid_argument for bad parameters.
Fingerprint fingerprint(const MolGraph& graph, int radius = 2, int width = 2048);

// |a & b| / |a | b|, 1.0 when both are empty.
double tanimoto(const Fingerprint& a, const Fingerprint& b);

}  // namespace himol::chem
