#pragma once
#include "himol/chem/molgraph.hpp"

namespace himol::chem {

// Bemis-Murcko scaffold: repeatedly strip degree-1 atoms that are not in a
// ring. Hydrogen counts of the survivors absorb the removed bonds; acyclic
// molecules give the empty graph. Throws InvalidGraph when not
// valence-consistent.
MolGraph scaffold(const MolGraph& graph);

}  // namespace himol::chem
