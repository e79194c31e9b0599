#pragma once
#include <vector>

#include "himol/chem/molgraph.hpp"

namespace himol::chem {

// Sum of bond valences for an atom, aromatic bonds counted as 1.
int explicit_valence(const MolGraph& graph, int atom);
int aromatic_bond_count(const MolGraph& graph, int atom);

// Implicit hydrogens an organic-subset atom gets from its bonds.
int implicit_hydrogens(const MolGraph& graph, int atom);

// Atoms whose bonds + hydrogens exceed the largest allowed valence.
std::vector<int> overvalent_atoms(const MolGraph& graph);

// Aromatic atoms that need a double bond in a Kekulé structure.
std::vector<bool> needs_double_bond(const MolGraph& graph);

// Aromatic sanity: every aromatic atom is in a ring, every aromatic bond is a
// ring bond between aromatic atoms, and a Kekulé assignment exists.
// Returns the index of an offending atom, or -1 if consistent.
int aromatic_defect(const MolGraph& graph);

bool valence_consistent(const MolGraph& graph);

}  // namespace himol::chem
