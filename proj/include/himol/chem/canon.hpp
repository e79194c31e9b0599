#pragma once
#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "himol/chem/molgraph.hpp"

namespace himol::chem {

// Vertex- and edge-labelled graph, the input of the generic canonical search.
struct LabeledGraph {
  std::vector<std::uint64_t> labels;
  std::vector<std::array<int, 3>> edges;  // (a, b, label)
};

// Receives a total order (order[v] = position of vertex v, 0..n-1) and
// returns the string it induces. The canonical form is the minimum over all
// orders reachable by refinement + individualization, so it depends only on
// the isomorphism class of the labelled graph.
using OrderEncoder = std::function<std::string(std::span<const int> order)>;

struct CanonOptions {
  // Cap on explored leaves; only reached by graphs with very large
  // automorphism groups.
  std::size_t leaf_budget = 100000;
};

std::string canonical_min(const LabeledGraph& graph, const OrderEncoder& encode, CanonOptions options = {});

// Label/adjacency certificate: equal iff the labelled graphs are isomorphic.
std::string certificate(const LabeledGraph& graph);

LabeledGraph labeled(const MolGraph& graph);

// SMILES for `graph` visiting atoms by ascending `order` (DFS from the
// lowest-ordered atom of each component, branches in order).
std::string write_smiles(const MolGraph& graph, std::span<const int> order);

// Canonical SMILES; stereo is not represented. Throws InvalidGraph when the
// graph is not valence-consistent.
std::string canonicalize(const MolGraph& graph);

// parse + canonicalize; throws like parse.
std::string canonical_smiles(std::string_view smiles);

}  // namespace himol::chem
