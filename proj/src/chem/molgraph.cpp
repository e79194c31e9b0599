#include "himol/chem/molgraph.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <string>

namespace himol::chem {

int MolGraph::add_atom(const Atom& atom) {
  atoms_.push_back(atom);
  adjacency_.emplace_back();
  return static_cast<int>(atoms_.size()) - 1;
}

int MolGraph::add_bond(int a, int b, BondOrder order) {
  const int n = static_cast<int>(atoms_.size());
  if (a < 0 || b < 0 || a >= n || b >= n) {
    throw InvalidGraph("bond references atom out of range");
  }
  if (a == b) throw InvalidGraph("self-loop on atom " + std::to_string(a));
  if (find_bond(a, b) >= 0) {
    throw InvalidGraph("duplicate bond " + std::to_string(a) + "-" + std::to_string(b));
  }
  const int index = static_cast<int>(bonds_.size());
  bonds_.push_back(Bond{a, b, order});
  adjacency_[static_cast<std::size_t>(a)].push_back({b, index});
  adjacency_[static_cast<std::size_t>(b)].push_back({a, index});
  return index;
}

int MolGraph::find_bond(int a, int b) const {
  for (const auto& nb : neighbors(a)) {
    if (nb.atom == b) return nb.bond;
  }
  return -1;
}

MolGraph MolGraph::induced(std::span<const int> keep) const {
  std::vector<int> remap(atoms_.size(), -1);
  MolGraph out;
  for (int old : keep) remap[static_cast<std::size_t>(old)] = out.add_atom(atom(old));
  for (const auto& b : bonds_) {
    const int na = remap[static_cast<std::size_t>(b.a)];
    const int nb = remap[static_cast<std::size_t>(b.b)];
    if (na >= 0 && nb >= 0) out.add_bond(na, nb, b.order);
  }
  return out;
}

MolGraph MolGraph::permuted(std::span<const int> perm) const {
  std::vector<int> order(atoms_.size());
  for (std::size_t i = 0; i < perm.size(); ++i) order[static_cast<std::size_t>(perm[i])] = static_cast<int>(i);
  MolGraph out;
  for (int old : order) out.add_atom(atom(old));
  for (const auto& b : bonds_) {
    out.add_bond(perm[static_cast<std::size_t>(b.a)], perm[static_cast<std::size_t>(b.b)], b.order);
  }
  return out;
}

std::vector<std::vector<int>> MolGraph::components() const {
  std::vector<int> label(atoms_.size(), -1);
  std::vector<std::vector<int>> out;
  for (int start = 0; start < static_cast<int>(atoms_.size()); ++start) {
    if (label[static_cast<std::size_t>(start)] >= 0) continue;
    const int id = static_cast<int>(out.size());
    out.emplace_back();
    std::vector<int> stack{start};
    label[static_cast<std::size_t>(start)] = id;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      out.back().push_back(u);
      for (const auto& nb : neighbors(u)) {
        if (label[static_cast<std::size_t>(nb.atom)] < 0) {
          label[static_cast<std::size_t>(nb.atom)] = id;
          stack.push_back(nb.atom);
        }
      }
    }
    std::sort(out.back().begin(), out.back().end());
  }
  return out;
}

std::vector<bool> ring_bonds(const MolGraph& graph) {
  // Tarjan bridge finding; a bond is a ring bond iff it is not a bridge.
  const int n = static_cast<int>(graph.atom_count());
  std::vector<int> disc(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), 0);
  std::vector<bool> in_ring(graph.bond_count(), true);
  int timer = 0;
  struct Frame {
    int atom;
    int via_bond;
    std::size_t next;
  };
  for (int root = 0; root < n; ++root) {
    if (disc[static_cast<std::size_t>(root)] >= 0) continue;
    std::vector<Frame> stack{{root, -1, 0}};
    disc[static_cast<std::size_t>(root)] = low[static_cast<std::size_t>(root)] = timer++;
    while (!stack.empty()) {
      Frame& f = stack.back();
      const auto nbs = graph.neighbors(f.atom);
      if (f.next < nbs.size()) {
        const Neighbor nb = nbs[f.next++];
        if (nb.bond == f.via_bond) continue;
        auto& d = disc[static_cast<std::size_t>(nb.atom)];
        if (d < 0) {
          d = low[static_cast<std::size_t>(nb.atom)] = timer++;
          stack.push_back({nb.atom, nb.bond, 0});
        } else {
          low[static_cast<std::size_t>(f.atom)] = std::min(low[static_cast<std::size_t>(f.atom)], d);
        }
      } else {
        const Frame done = f;
        stack.pop_back();
        if (!stack.empty()) {
          const int parent = stack.back().atom;
          low[static_cast<std::size_t>(parent)] =
              std::min(low[static_cast<std::size_t>(parent)], low[static_cast<std::size_t>(done.atom)]);
          if (low[static_cast<std::size_t>(done.atom)] > disc[static_cast<std::size_t>(parent)]) {
            in_ring[static_cast<std::size_t>(done.via_bond)] = false;
          }
        }
      }
    }
  }
  return in_ring;
}

std::vector<bool> ring_atoms(const MolGraph& graph) {
  const auto rb = ring_bonds(graph);
  std::vector<bool> out(graph.atom_count(), false);
  for (std::size_t i = 0; i < rb.size(); ++i) {
    if (rb[i]) {
      out[static_cast<std::size_t>(graph.bond(static_cast<int>(i)).a)] = true;
      out[static_cast<std::size_t>(graph.bond(static_cast<int>(i)).b)] = true;
    }
  }
  return out;
}

std::vector<std::vector<int>> distance_matrix(const MolGraph& graph) {
  const std::size_t n = graph.atom_count();
  std::vector<std::vector<int>> dist(n, std::vector<int>(n, -1));
  for (std::size_t s = 0; s < n; ++s) {
    auto& row = dist[s];
    std::queue<int> q;
    row[s] = 0;
    q.push(static_cast<int>(s));
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (const auto& nb : graph.neighbors(u)) {
        if (row[static_cast<std::size_t>(nb.atom)] < 0) {
          row[static_cast<std::size_t>(nb.atom)] = row[static_cast<std::size_t>(u)] + 1;
          q.push(nb.atom);
        }
      }
    }
  }
  return dist;
}

}  // namespace himol::chem
