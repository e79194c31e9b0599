#include "himol/split.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "himol/chem/canon.hpp"
#include "himol/chem/scaffold.hpp"
#include "himol/chem/smiles.hpp"
#include "himol/rng.hpp"

namespace himol::split {

std::string scaffold_key(const std::string& smiles) {
  const auto s = chem::scaffold(chem::parse(smiles));
  return s.empty() ? std::string() : chem::canonicalize(s);
}

SplitIndices scaffold_split_indices(std::span<const std::string> smiles, std::uint64_t seed, SplitRatios ratios) {
  if (ratios.train < 0 || ratios.valid < 0 || ratios.train + ratios.valid > 1.0) {
    throw ConfigError("split ratios must be non-negative and sum to at most 1");
  }
  std::map<std::string, std::vector<std::size_t>> by_key;
  for (std::size_t n = 0; n < smiles.size(); ++n) by_key[scaffold_key(smiles[n])].push_back(n);
  if (by_key.size() < 3) {
    throw TooFewScaffolds("need at least 3 scaffold groups, found " + std::to_string(by_key.size()));
  }
  std::vector<const std::vector<std::size_t>*> groups;
  for (const auto& [key, members] : by_key) groups.push_back(&members);
  Rng rng(seed);
  rng.shuffle(std::span(groups));
  std::stable_sort(groups.begin(), groups.end(), [](auto a, auto b) { return a->size() > b->size(); });

  const double total = static_cast<double>(smiles.size());
  const std::size_t m = groups.size();
  std::vector<int> where(smiles.size(), 2);
  std::size_t g = 0, train_n = 0, valid_n = 0;
  while (g < m - 2 && static_cast<double>(train_n) < ratios.train * total) {
    for (std::size_t n : *groups[g]) where[n] = 0;
    train_n += groups[g++]->size();
  }
  while (g < m - 1 && static_cast<double>(valid_n) < ratios.valid * total) {
    for (std::size_t n : *groups[g]) where[n] = 1;
    valid_n += groups[g++]->size();
  }
  SplitIndices out;
  for (std::size_t n = 0; n < smiles.size(); ++n) {
    (where[n] == 0 ? out.train : where[n] == 1 ? out.valid : out.test).push_back(n);
  }
  return out;
}

Split scaffold_split(std::span<const std::string> smiles, std::uint64_t seed, SplitRatios ratios) {
  const auto idx = scaffold_split_indices(smiles, seed, ratios);
  Split out;
  for (std::size_t n : idx.train) out.train.push_back(smiles[n]);
  for (std::size_t n : idx.valid) out.valid.push_back(smiles[n]);
  for (std::size_t n : idx.test) out.test.push_back(smiles[n]);
  return out;
}

}  // namespace himol::split
