#include "himol/chem/scaffold.hpp"

#include "himol/chem/valence.hpp"

namespace himol::chem {

MolGraph scaffold(const MolGraph& graph) {
  if (!valence_consistent(graph)) throw InvalidGraph("scaffold: graph is not valence-consistent");
  const auto in_ring = ring_atoms(graph);
  const std::size_t n = graph.atom_count();
  std::vector<bool> alive(n, true);
  std::vector<int> degree(n);
  std::vector<int> extra_h(n, 0);
  for (std::size_t i = 0; i < n; ++i) degree[i] = graph.degree(static_cast<int>(i));

  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (!alive[i] || in_ring[i] || degree[i] > 1) continue;
      // Degree 0 here means the atom's last neighbour was stripped; it goes too.
      alive[i] = false;
      changed = true;
      for (const auto& nb : graph.neighbors(static_cast<int>(i))) {
        const auto j = static_cast<std::size_t>(nb.atom);
        if (!alive[j]) continue;
        --degree[j];
        extra_h[j] += bond_valence(graph.bond(nb.bond).order);
      }
    }
  }
  std::vector<int> keep;
  for (std::size_t i = 0; i < n; ++i) {
    if (alive[i]) keep.push_back(static_cast<int>(i));
  }
  MolGraph out = graph.induced(keep);
  for (std::size_t k = 0; k < keep.size(); ++k) {
    out.atom(static_cast<int>(k)).hydrogens += extra_h[static_cast<std::size_t>(keep[k])];
  }
  return out;
}

}  // namespace himol::chem
