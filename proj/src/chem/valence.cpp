#include "himol/chem/valence.hpp"

#include "himol/chem/element.hpp"

namespace himol::chem {

int explicit_valence(const MolGraph& graph, int atom) {
  int v = 0;
  for (const auto& nb : graph.neighbors(atom)) v += bond_valence(graph.bond(nb.bond).order);
  return v;
}

int aromatic_bond_count(const MolGraph& graph, int atom) {
  int n = 0;
  for (const auto& nb : graph.neighbors(atom)) n += graph.bond(nb.bond).order == BondOrder::Aromatic;
  return n;
}

int implicit_hydrogens(const MolGraph& graph, int atom) {
  const Atom& a = graph.atom(atom);
  const Valences allowed = allowed_valences(a.atomic_number, a.charge);
  if (allowed.empty()) return 0;
  const int used = explicit_valence(graph, atom);
  if (a.aromatic) {
    // One aromatic bond per atom is promoted to double in the Kekulé form;
    // lowercase atoms take hydrogens only from their lowest valence.
    const int h = allowed.values[0] - (used + (aromatic_bond_count(graph, atom) > 0 ? 1 : 0));
    return h > 0 ? h : 0;
  }
  for (int v : allowed) {
    if (v >= used) return v - used;
  }
  return 0;
}

std::vector<int> overvalent_atoms(const MolGraph& graph) {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(graph.atom_count()); ++i) {
    const Atom& a = graph.atom(i);
    const Valences allowed = allowed_valences(a.atomic_number, a.charge);
    if (allowed.empty()) continue;  // reported separately as an unknown element
    if (explicit_valence(graph, i) + a.hydrogens > allowed.max()) out.push_back(i);
  }
  return out;
}

std::vector<bool> needs_double_bond(const MolGraph& graph) {
  std::vector<bool> out(graph.atom_count(), false);
  for (int i = 0; i < static_cast<int>(graph.atom_count()); ++i) {
    const Atom& a = graph.atom(i);
    if (!a.aromatic || aromatic_bond_count(graph, i) == 0) continue;
    const Valences allowed = allowed_valences(a.atomic_number, a.charge);
    const int base = explicit_valence(graph, i) + a.hydrogens;
    out[static_cast<std::size_t>(i)] = !allowed.contains(base) && allowed.contains(base + 1);
  }
  return out;
}

namespace {

// Perfect matching over aromatic bonds between atoms that need a double
// bond. Backtracking with a step cap; aromatic systems are small.
bool match_from(const MolGraph& graph, const std::vector<bool>& need, std::vector<int>& mate,
                std::size_t& steps) {
  if (++steps > 200000) return false;
  int u = -1;
  for (int i = 0; i < static_cast<int>(need.size()); ++i) {
    if (need[static_cast<std::size_t>(i)] && mate[static_cast<std::size_t>(i)] < 0) {
      u = i;
      break;
    }
  }
  if (u < 0) return true;
  for (const auto& nb : graph.neighbors(u)) {
    const auto v = static_cast<std::size_t>(nb.atom);
    if (graph.bond(nb.bond).order != BondOrder::Aromatic || !need[v] || mate[v] >= 0) continue;
    mate[static_cast<std::size_t>(u)] = nb.atom;
    mate[v] = u;
    if (match_from(graph, need, mate, steps)) return true;
    mate[static_cast<std::size_t>(u)] = -1;
    mate[v] = -1;
  }
  return false;
}

}  // namespace

int aromatic_defect(const MolGraph& graph) {
  const auto rb = ring_bonds(graph);
  for (int i = 0; i < static_cast<int>(graph.bond_count()); ++i) {
    const Bond& b = graph.bond(i);
    if (b.order != BondOrder::Aromatic) continue;
    if (!rb[static_cast<std::size_t>(i)] || !graph.atom(b.a).aromatic || !graph.atom(b.b).aromatic) {
      return b.a;
    }
  }
  const auto in_ring = ring_atoms(graph);
  for (int i = 0; i < static_cast<int>(graph.atom_count()); ++i) {
    if (graph.atom(i).aromatic && !in_ring[static_cast<std::size_t>(i)]) return i;
  }
  const auto need = needs_double_bond(graph);
  for (int i = 0; i < static_cast<int>(graph.atom_count()); ++i) {
    const Atom& a = graph.atom(i);
    if (!a.aromatic || need[static_cast<std::size_t>(i)]) continue;
    const Valences allowed = allowed_valences(a.atomic_number, a.charge);
    if (!allowed.contains(explicit_valence(graph, i) + a.hydrogens)) return i;
  }
  std::vector<int> mate(graph.atom_count(), -1);
  std::size_t steps = 0;
  if (!match_from(graph, need, mate, steps)) {
    for (std::size_t i = 0; i < need.size(); ++i) {
      if (need[i] && mate[i] < 0) return static_cast<int>(i);
    }
    return 0;
  }
  return -1;
}

bool valence_consistent(const MolGraph& graph) {
  for (const auto& a : graph.atoms()) {
    if (allowed_valences(a.atomic_number, a.charge).empty()) return false;
  }
  return overvalent_atoms(graph).empty() && aromatic_defect(graph) < 0;
}

}  // namespace himol::chem
