#include "himol/chem/fingerprint.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

#include "himol/chem/valence.hpp"
#include "himol/hash.hpp"
#include "himol/kernels.hpp"
#include "himol/rng.hpp"

namespace himol::chem {

std::size_t Fingerprint::count() const {
  return static_cast<std::size_t>(kernels::active().popcount(words.data(), words.size()));
}

Fingerprint fingerprint(const MolGraph& graph, int radius, int width) {
  if (radius < 0) throw std::invalid_argument("fingerprint radius must be non-negative");
  if (width < 64 || !std::has_single_bit(static_cast<unsigned>(width))) {
    throw std::invalid_argument("fingerprint width must be a power of two >= 64");
  }
  if (!valence_consistent(graph)) throw InvalidGraph("fingerprint: graph is not valence-consistent");

  Fingerprint fp;
  fp.width = width;
  fp.radius = radius;
  fp.words.assign(static_cast<std::size_t>(width / 64), 0);
  const std::size_t n = graph.atom_count();
  std::vector<std::uint64_t> ids(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Atom& a = graph.atom(static_cast<int>(i));
    std::uint64_t h = splitmix64(static_cast<std::uint64_t>(a.atomic_number));
    h = hash_combine(h, static_cast<std::uint64_t>(a.charge + 64));
    h = hash_combine(h, static_cast<std::uint64_t>(graph.degree(static_cast<int>(i))));
    h = hash_combine(h, static_cast<std::uint64_t>(a.hydrogens));
    ids[i] = splitmix64(h);
    fp.set(ids[i] % static_cast<std::uint64_t>(width));
  }
  for (int layer = 1; layer <= radius; ++layer) {
    std::vector<std::uint64_t> next(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::pair<int, std::uint64_t>> env;
      for (const auto& nb : graph.neighbors(static_cast<int>(i))) {
        env.emplace_back(static_cast<int>(graph.bond(nb.bond).order), ids[static_cast<std::size_t>(nb.atom)]);
      }
      std::sort(env.begin(), env.end());
      std::uint64_t h = hash_combine(splitmix64(static_cast<std::uint64_t>(layer)), ids[i]);
      for (const auto& [order, id] : env) h = hash_combine(hash_combine(h, static_cast<std::uint64_t>(order)), id);
      next[i] = splitmix64(h);
      fp.set(next[i] % static_cast<std::uint64_t>(width));
    }
    ids = std::move(next);
  }
  return fp;
}

double tanimoto(const Fingerprint& a, const Fingerprint& b) {
  if (a.width != b.width || a.radius != b.radius || a.words.size() != b.words.size()) {
    throw MismatchedParams("tanimoto: fingerprints differ in width or radius");
  }
  const auto& k = kernels::active();
  const std::uint64_t uni = k.popcount_or(a.words.data(), b.words.data(), a.words.size());
  if (uni == 0) return 1.0;
  const std::uint64_t inter = k.popcount_and(a.words.data(), b.words.data(), a.words.size());
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace himol::chem
