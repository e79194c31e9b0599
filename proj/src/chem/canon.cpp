#include "himol/chem/canon.hpp"

#include <algorithm>
#include <numeric>
#include <optional>

#include "himol/chem/element.hpp"
#include "himol/chem/smiles.hpp"
#include "himol/chem/valence.hpp"

namespace himol::chem {
namespace {

struct AdjEntry {
  int vertex;
  int label;
};

using Adjacency = std::vector<std::vector<AdjEntry>>;

Adjacency build_adjacency(const LabeledGraph& g) {
  Adjacency adj(g.labels.size());
  for (const auto& e : g.edges) {
    adj[static_cast<std::size_t>(e[0])].push_back({e[1], e[2]});
    adj[static_cast<std::size_t>(e[1])].push_back({e[0], e[2]});
  }
  return adj;
}

// Ranks where tied vertices share the same value (= count of strictly smaller keys).
template <typename Key>
std::vector<int> rank_by(const std::vector<Key>& keys) {
  const std::size_t n = keys.size();
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return keys[static_cast<std::size_t>(a)] < keys[static_cast<std::size_t>(b)]; });
  std::vector<int> rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = static_cast<std::size_t>(idx[i]);
    if (i > 0 && keys[static_cast<std::size_t>(idx[i - 1])] == keys[v]) {
      rank[v] = rank[static_cast<std::size_t>(idx[i - 1])];
    } else {
      rank[v] = static_cast<int>(i);
    }
  }
  return rank;
}

int class_count(const std::vector<int>& rank) {
  std::vector<int> r(rank);
  std::sort(r.begin(), r.end());
  return static_cast<int>(std::unique(r.begin(), r.end()) - r.begin());
}

// Iterated neighbourhood refinement until the partition stops splitting.
std::vector<int> refine(const Adjacency& adj, std::vector<int> rank) {
  int classes = class_count(rank);
  for (;;) {
    std::vector<std::pair<int, std::vector<std::pair<int, int>>>> keys(rank.size());
    for (std::size_t v = 0; v < rank.size(); ++v) {
      keys[v].first = rank[v];
      auto& nbs = keys[v].second;
      for (const auto& e : adj[v]) nbs.emplace_back(e.label, rank[static_cast<std::size_t>(e.vertex)]);
      std::sort(nbs.begin(), nbs.end());
    }
    std::vector<int> next = rank_by(keys);
    const int next_classes = class_count(next);
    rank = std::move(next);
    if (next_classes == classes) return rank;
    classes = next_classes;
  }
}

struct Search {
  const Adjacency& adj;
  const OrderEncoder& encode;
  std::size_t budget;
  std::size_t leaves = 0;
  std::optional<std::string> best;

  void run(const std::vector<int>& rank) {
    if (leaves >= budget && best) return;
    // First (lowest-rank) non-singleton cell.
    const std::size_t n = rank.size();
    std::vector<int> count(n, 0);
    for (int r : rank) ++count[static_cast<std::size_t>(r)];
    int target = -1;
    for (std::size_t r = 0; r < n; ++r) {
      if (count[r] > 1) {
        target = static_cast<int>(r);
        break;
      }
    }
    if (target < 0) {
      ++leaves;
      std::string s = encode(rank);
      if (!best || s < *best) best = std::move(s);
      return;
    }
    for (std::size_t v = 0; v < n; ++v) {
      if (rank[v] != target) continue;
      std::vector<std::pair<int, int>> keys(n);
      for (std::size_t u = 0; u < n; ++u) keys[u] = {rank[u], rank[u] == target && u != v ? 1 : 0};
      run(refine(adj, rank_by(keys)));
      if (leaves >= budget && best) return;
    }
  }
};

std::uint64_t atom_label(const Atom& a) {
  return static_cast<std::uint64_t>(a.atomic_number) | (static_cast<std::uint64_t>(a.aromatic) << 8) |
         (static_cast<std::uint64_t>(a.charge + 32) << 9) | (static_cast<std::uint64_t>(a.hydrogens) << 16) |
         (static_cast<std::uint64_t>(a.isotope) << 24);
}

std::string atom_text(const MolGraph& g, int i) {
  const Atom& a = g.atom(i);
  const std::string_view sym = element_symbol(a.atomic_number);
  std::string base(sym);
  if (a.aromatic) base[0] = static_cast<char>(base[0] - 'A' + 'a');
  const bool organic = in_organic_subset(a.atomic_number) && a.charge == 0 && a.isotope == 0 &&
                       (!a.aromatic || can_be_aromatic(a.atomic_number, false)) &&
                       a.hydrogens == implicit_hydrogens(g, i);
  if (organic) return base;
  std::string s = "[";
  if (a.isotope) s += std::to_string(a.isotope);
  s += base;
  if (a.hydrogens > 0) {
    s += 'H';
    if (a.hydrogens > 1) s += std::to_string(a.hydrogens);
  }
  if (a.charge != 0) {
    s += a.charge > 0 ? '+' : '-';
    const int m = a.charge > 0 ? a.charge : -a.charge;
    if (m > 1) s += std::to_string(m);
  }
  s += ']';
  return s;
}

std::string bond_text(const MolGraph& g, const Bond& b) {
  const bool both_aromatic = g.atom(b.a).aromatic && g.atom(b.b).aromatic;
  switch (b.order) {
    case BondOrder::Single: return both_aromatic ? "-" : "";
    case BondOrder::Double: return "=";
    case BondOrder::Triple: return "#";
    case BondOrder::Aromatic: return both_aromatic ? "" : ":";
  }
  return "";
}

std::string ring_label(int digit) {
  return digit < 10 ? std::to_string(digit) : "%" + std::to_string(digit);
}

}  // namespace

std::string canonical_min(const LabeledGraph& graph, const OrderEncoder& encode, CanonOptions options) {
  const Adjacency adj = build_adjacency(graph);
  Search search{adj, encode, options.leaf_budget, 0, std::nullopt};
  search.run(refine(adj, rank_by(graph.labels)));
  return search.best.value_or(std::string());
}

std::string certificate(const LabeledGraph& graph) {
  return canonical_min(graph, [&](std::span<const int> order) {
    const std::size_t n = order.size();
    std::vector<std::uint64_t> labels(n);
    for (std::size_t v = 0; v < n; ++v) labels[static_cast<std::size_t>(order[v])] = graph.labels[v];
    std::vector<std::array<int, 3>> edges;
    for (const auto& e : graph.edges) {
      int a = order[static_cast<std::size_t>(e[0])], b = order[static_cast<std::size_t>(e[1])];
      if (a > b) std::swap(a, b);
      edges.push_back({a, b, e[2]});
    }
    std::sort(edges.begin(), edges.end());
    std::string s = std::to_string(n) + ":";
    for (auto l : labels) s += std::to_string(l) + ",";
    s += "|";
    for (const auto& e : edges) s += std::to_string(e[0]) + "-" + std::to_string(e[1]) + "/" + std::to_string(e[2]) + ",";
    return s;
  });
}

LabeledGraph labeled(const MolGraph& graph) {
  LabeledGraph out;
  for (const auto& a : graph.atoms()) out.labels.push_back(atom_label(a));
  for (const auto& b : graph.bonds()) out.edges.push_back({b.a, b.b, static_cast<int>(b.order)});
  return out;
}

std::string write_smiles(const MolGraph& g, std::span<const int> order) {
  const int n = static_cast<int>(g.atom_count());
  std::vector<int> by_order(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) by_order[static_cast<std::size_t>(order[static_cast<std::size_t>(v)])] = v;

  auto sorted_neighbors = [&](int u) {
    std::vector<Neighbor> nbs(g.neighbors(u).begin(), g.neighbors(u).end());
    std::sort(nbs.begin(), nbs.end(), [&](const Neighbor& x, const Neighbor& y) {
      return order[static_cast<std::size_t>(x.atom)] < order[static_cast<std::size_t>(y.atom)];
    });
    return nbs;
  };

  // Pass 1: DFS tree; non-tree bonds become ring closures opened at the
  // earlier-visited atom.
  std::vector<int> visit(static_cast<std::size_t>(n), -1);
  std::vector<bool> tree_bond(g.bond_count(), false);
  std::vector<std::vector<int>> children(static_cast<std::size_t>(n));
  std::vector<std::vector<int>> ring_at(static_cast<std::size_t>(n));  // ring bonds in visit order of partner
  std::vector<int> roots;
  int clock = 0;
  for (int start : by_order) {
    if (visit[static_cast<std::size_t>(start)] >= 0) continue;
    roots.push_back(start);
    std::function<void(int, int)> dfs = [&](int u, int via) {
      visit[static_cast<std::size_t>(u)] = clock++;
      for (const auto& nb : sorted_neighbors(u)) {
        if (nb.bond == via) continue;
        if (visit[static_cast<std::size_t>(nb.atom)] < 0) {
          tree_bond[static_cast<std::size_t>(nb.bond)] = true;
          children[static_cast<std::size_t>(u)].push_back(nb.bond);
          dfs(nb.atom, nb.bond);
        } else if (!tree_bond[static_cast<std::size_t>(nb.bond)] &&
                   std::find(ring_at[static_cast<std::size_t>(u)].begin(), ring_at[static_cast<std::size_t>(u)].end(),
                             nb.bond) == ring_at[static_cast<std::size_t>(u)].end()) {
          ring_at[static_cast<std::size_t>(u)].push_back(nb.bond);
          ring_at[static_cast<std::size_t>(nb.atom)].push_back(nb.bond);
        }
      }
    };
    dfs(start, -1);
  }
  // Ring bonds at each atom: closures (partner visited earlier) first, then
  // openings, each group by partner visit time.
  for (int u = 0; u < n; ++u) {
    auto& rs = ring_at[static_cast<std::size_t>(u)];
    std::sort(rs.begin(), rs.end(), [&](int x, int y) {
      const int px = g.bond(x).other(u), py = g.bond(y).other(u);
      const bool cx = visit[static_cast<std::size_t>(px)] < visit[static_cast<std::size_t>(u)];
      const bool cy = visit[static_cast<std::size_t>(py)] < visit[static_cast<std::size_t>(u)];
      if (cx != cy) return cx;
      return visit[static_cast<std::size_t>(px)] < visit[static_cast<std::size_t>(py)];
    });
  }

  // Pass 2: emit.
  std::vector<int> digit_of(g.bond_count(), 0);
  std::vector<bool> digit_used(100, false);
  std::string out;
  std::function<void(int)> emit = [&](int u) {
    out += atom_text(g, u);
    for (int b : ring_at[static_cast<std::size_t>(u)]) {
      const int partner = g.bond(b).other(u);
      if (visit[static_cast<std::size_t>(partner)] < visit[static_cast<std::size_t>(u)]) {
        const int d = digit_of[static_cast<std::size_t>(b)];
        digit_used[static_cast<std::size_t>(d)] = false;
        out += ring_label(d);
      } else {
        int d = 1;
        while (digit_used[static_cast<std::size_t>(d)]) ++d;
        digit_used[static_cast<std::size_t>(d)] = true;
        digit_of[static_cast<std::size_t>(b)] = d;
        out += bond_text(g, g.bond(b)) + ring_label(d);
      }
    }
    const auto& kids = children[static_cast<std::size_t>(u)];
    for (std::size_t k = 0; k < kids.size(); ++k) {
      const Bond& b = g.bond(kids[k]);
      const bool branch = k + 1 < kids.size();
      if (branch) out += '(';
      out += bond_text(g, b);
      emit(b.other(u));
      if (branch) out += ')';
    }
  };
  for (std::size_t r = 0; r < roots.size(); ++r) {
    if (r) out += '.';
    emit(roots[r]);
  }
  return out;
}

std::string canonicalize(const MolGraph& graph) {
  if (!valence_consistent(graph)) throw InvalidGraph("canonicalize: graph is not valence-consistent");
  std::vector<std::string> parts;
  for (const auto& comp : graph.components()) {
    const MolGraph sub = graph.induced(comp);
    const LabeledGraph lg = labeled(sub);
    parts.push_back(canonical_min(lg, [&](std::span<const int> order) { return write_smiles(sub, order); }));
  }
  std::sort(parts.begin(), parts.end());
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += '.';
    out += parts[i];
  }
  return out;
}

std::string canonical_smiles(std::string_view smiles) { return canonicalize(parse(smiles)); }

}  // namespace himol::chem
