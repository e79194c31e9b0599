#pragma once
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "himol/error.hpp"

namespace himol::chem {

enum class BondOrder : std::uint8_t { Single = 1, Double = 2, Triple = 3, Aromatic = 4 };

// Contribution of a non-aromatic bond to valence; aromatic bonds count 1
// here and are completed by the Kekulé check in valence.hpp.
inline int bond_valence(BondOrder order) {
  return order == BondOrder::Aromatic ? 1 : static_cast<int>(order);
}

struct Atom {
  int atomic_number = 6;
  int charge = 0;
  int hydrogens = 0;  // total attached hydrogens (implicit ones resolved)
  bool aromatic = false;
  int isotope = 0;

  bool operator==(const Atom&) const = default;
};

struct Bond {
  int a = 0;
  int b = 0;
  BondOrder order = BondOrder::Single;

  int other(int atom) const { return atom == a ? b : a; }
  bool operator==(const Bond&) const = default;
};

class InvalidGraph : public Error {
 public:
  using Error::Error;
};

struct Neighbor {
  int atom;
  int bond;
};

class MolGraph {
 public:
  int add_atom(const Atom& atom);
  // Throws InvalidGraph on self-loops, duplicate pairs or out-of-range indices.
  int add_bond(int a, int b, BondOrder order);

  std::size_t atom_count() const { return atoms_.size(); }
  std::size_t bond_count() const { return bonds_.size(); }
  bool empty() const { return atoms_.empty(); }

  const Atom& atom(int i) const { return atoms_[static_cast<std::size_t>(i)]; }
  Atom& atom(int i) { return atoms_[static_cast<std::size_t>(i)]; }
  const Bond& bond(int i) const { return bonds_[static_cast<std::size_t>(i)]; }
  Bond& bond(int i) { return bonds_[static_cast<std::size_t>(i)]; }
  std::span<const Atom> atoms() const { return atoms_; }
  std::span<const Bond> bonds() const { return bonds_; }
  std::span<const Neighbor> neighbors(int atom) const { return adjacency_[static_cast<std::size_t>(atom)]; }
  int degree(int atom) const { return static_cast<int>(neighbors(atom).size()); }
  // Bond index between a and b, or -1.
  int find_bond(int a, int b) const;

  // Induced subgraph on `keep` (indices into this graph, any order); the
  // new atom i is keep[i].
  MolGraph induced(std::span<const int> keep) const;
  // Same molecule with atoms renumbered: new index of old atom i is perm[i].
  MolGraph permuted(std::span<const int> perm) const;

  // Connected components as lists of atom indices (ascending).
  std::vector<std::vector<int>> components() const;

 private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<Neighbor>> adjacency_;
};

// Bonds that lie on at least one cycle (non-bridges).
std::vector<bool> ring_bonds(const MolGraph& graph);
std::vector<bool> ring_atoms(const MolGraph& graph);
// All-pairs shortest path lengths in bonds; -1 when disconnected.
std::vector<std::vector<int>> distance_matrix(const MolGraph& graph);

}  // namespace himol::chem
