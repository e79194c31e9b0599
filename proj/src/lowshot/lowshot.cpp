#include "himol/lowshot.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_set>

#include "himol/chem/canon.hpp"
#include "himol/chem/molfile.hpp"
#include "himol/chem/smiles.hpp"
#include "himol/parallel.hpp"
#include "himol/rng.hpp"
#include "json.hpp"

namespace himol::lowshot {

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ConfigError("scores and labels differ in length");
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Sum of mid-ranks of the positives.
  double rank_sum = 0.0;
  std::size_t pos = 0;
  for (std::size_t start = 0; start < idx.size();) {
    std::size_t end = start;
    while (end < idx.size() && scores[idx[end]] == scores[idx[start]]) ++end;
    const double mid = 0.5 * static_cast<double>(start + 1 + end);
    for (std::size_t t = start; t < end; ++t) {
      if (labels[idx[t]] != 0) {
        rank_sum += mid;
        ++pos;
      }
    }
    start = end;
  }
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw ConfigError("ROC-AUC needs both classes");
  const double p = static_cast<double>(pos);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

WeightedKnn::WeightedKnn(std::span<const Labelled> train, int k) : k_(k) {
  if (train.empty()) throw ConfigError("scorer needs training molecules");
  if (k < 1) throw ConfigError("k must be at least 1");
  std::set<std::pair<std::string, bool>> seen;
  for (const auto& [smiles, label] : train) {
    const auto g = chem::parse(smiles);
    if (!seen.insert({chem::canonicalize(g), label}).second) continue;
    fps_.push_back(chem::fingerprint(g));
    labels_.push_back(label);
  }
}

double WeightedKnn::score(const chem::MolGraph& graph) const {
  const auto fp = chem::fingerprint(graph);
  std::vector<std::pair<double, std::size_t>> sims(fps_.size());
  for (std::size_t t = 0; t < fps_.size(); ++t) sims[t] = {-chem::tanimoto(fp, fps_[t]), t};
  const auto k = std::min(static_cast<std::size_t>(k_), sims.size());
  std::partial_sort(sims.begin(), sims.begin() + static_cast<std::ptrdiff_t>(k), sims.end());
  double yes = 0.0, total = 0.0;
  for (std::size_t t = 0; t < k; ++t) {
    const double w = -sims[t].first;
    total += w;
    if (labels_[sims[t].second]) yes += w;
  }
  return total > 0.0 ? yes / total : 0.5;
}

Generator inversion_generator(const seq::Backbone& model, inversion::InversionConfig inv,
                              sampler::SamplerConfig sampling) {
  inversion::validate(inv);
  sampler::validate(sampling);
  return [&model, inv, sampling](std::span<const std::string> shots, bool, std::size_t count, std::uint64_t seed) {
    auto ic = inv;
    ic.seed = derive_seed(seed, 0);
    // Keep K below the number of molecules.
    ic.k = std::max(1, std::min(ic.k, static_cast<int>(shots.size()) - 1));
    const auto state = inversion::train(shots, model, ic).state;
    auto sc = sampling;
    sc.seed = derive_seed(seed, 1);
    sc.max_samples = static_cast<int>(count);
    sc.strict = true;
    const auto batch = sampler::sample(state, model, sc, sampler::canonical_set(shots));
    std::vector<std::string> out;
    for (const auto& r : batch.records) out.push_back(*r.canonical);
    return out;
  };
}

namespace {

struct ClassPools {
  std::vector<std::string> pos, neg;
};

SeedOutcome run_seed(const LowShotTask& task, const ClassPools& pools, const Generator& generate,
                     const AugmentConfig& config, std::uint64_t seed) {
  SeedOutcome out;
  out.seed = seed;
  Rng rng(derive_seed(seed, 0));
  const auto k = static_cast<std::size_t>(task.shots);
  const auto draw = [&](const std::vector<std::string>& pool) {
    std::vector<std::size_t> idx(pool.size());
    std::iota(idx.begin(), idx.end(), 0);
    rng.shuffle(std::span<std::size_t>(idx));
    std::vector<std::string> shots;
    for (std::size_t t = 0; t < k; ++t) shots.push_back(pool[idx[t]]);
    return shots;
  };
  const auto pos = draw(pools.pos);
  const auto neg = draw(pools.neg);
  std::vector<Labelled> base;
  for (const auto& s : pos) base.emplace_back(s, true);
  for (const auto& s : neg) base.emplace_back(s, false);

  std::vector<Labelled> augmented = base;
  const std::size_t want = k * static_cast<std::size_t>(config.multiplier);
  try {
    for (const bool label : {true, false}) {
      const auto gen = generate(label ? pos : neg, label, want, derive_seed(seed, label ? 1 : 2));
      for (const auto& s : gen) {
        if (!chem::is_valid(s)) throw Error("generator returned an invalid molecule");
        augmented.emplace_back(s, label);
      }
      out.generated += gen.size();
    }
  } catch (const std::exception& e) {
    out.skipped = true;
    out.warning = "seed " + std::to_string(seed) + " skipped: " + e.what();
    return out;
  }

  std::vector<chem::MolGraph> test_graphs;
  std::vector<int> test_labels;
  for (const auto& [s, l] : task.test) {
    test_graphs.push_back(chem::parse(s));
    test_labels.push_back(l ? 1 : 0);
  }
  const auto auc = [&](const std::vector<Labelled>& train) {
    const WeightedKnn knn(train, config.knn_k);
    std::vector<double> scores;
    for (const auto& g : test_graphs) scores.push_back(knn.score(g));
    return roc_auc(scores, test_labels);
  };
  out.auc_base = auc(base);
  out.auc_augmented = auc(augmented);
  out.delta = out.auc_augmented - out.auc_base;
  return out;
}

}  // namespace

LowShotResult run_augmentation(const LowShotTask& task, const Generator& generate, const AugmentConfig& config) {
  if (task.shots < 1) throw ConfigError("shots must be positive");
  if (config.multiplier < 0) throw ConfigError("multiplier must be non-negative");
  if (task.seeds.empty()) throw ConfigError("no seeds given");
  ClassPools pools;
  std::unordered_set<std::string> pool_canon;
  for (const auto& [s, l] : task.pool) {
    pool_canon.insert(chem::canonical_smiles(s));
    (l ? pools.pos : pools.neg).push_back(s);
  }
  const auto k = static_cast<std::size_t>(task.shots);
  if (pools.pos.size() < k || pools.neg.size() < k) {
    throw InsufficientPool("pool has " + std::to_string(pools.pos.size()) + " active and " +
                           std::to_string(pools.neg.size()) + " inactive molecules; " + std::to_string(k) +
                           " shots per class requested");
  }
  bool test_pos = false, test_neg = false;
  for (const auto& [s, l] : task.test) {
    if (pool_canon.contains(chem::canonical_smiles(s))) throw ConfigError("test molecule " + s + " is in the pool");
    (l ? test_pos : test_neg) = true;
  }
  if (!test_pos || !test_neg) throw ConfigError("test set needs both classes");

  LowShotResult result;
  result.seeds.resize(task.seeds.size());
  parallel_for(task.seeds.size(), [&](std::size_t n) {
    result.seeds[n] = run_seed(task, pools, generate, config, task.seeds[n]);
  });
  std::vector<double> deltas;
  for (const auto& s : result.seeds) {
    if (s.skipped) {
      result.warnings.push_back(s.warning);
    } else {
      deltas.push_back(s.delta);
    }
  }
  if (deltas.empty()) throw Error("every seed was skipped; first: " + result.warnings.front());
  result.used = deltas.size();
  const double n = static_cast<double>(deltas.size());
  result.mean_delta = std::accumulate(deltas.begin(), deltas.end(), 0.0) / n;
  result.ci_low = result.ci_high = result.mean_delta;
  if (deltas.size() >= 2) {
    double ss = 0.0;
    for (double d : deltas) ss += (d - result.mean_delta) * (d - result.mean_delta);
    const double sd = std::sqrt(ss / (n - 1.0));
    const boost::math::students_t dist(n - 1.0);
    const double half = boost::math::quantile(dist, 0.975) * sd / std::sqrt(n);
    result.ci_low -= half;
    result.ci_high += half;
  } else {
    result.warnings.push_back("one usable seed; confidence interval is degenerate");
  }
  return result;
}

std::string to_json(const LowShotResult& r, const LowShotTask& task) {
  nlohmann::ordered_json j;
  j["format"] = "himol-lowshot";
  j["version"] = 1;
  j["shots"] = task.shots;
  j["pool"] = task.pool.size();
  j["test"] = task.test.size();
  j["seeds_used"] = r.used;
  j["mean_delta_auc"] = r.mean_delta;
  j["ci95_low"] = r.ci_low;
  j["ci95_high"] = r.ci_high;
  auto& per = j["per_seed"] = nlohmann::ordered_json::array();
  for (const auto& s : r.seeds) {
    nlohmann::ordered_json e;
    e["seed"] = s.seed;
    e["skipped"] = s.skipped;
    e["auc_base"] = s.auc_base;
    e["auc_augmented"] = s.auc_augmented;
    e["delta"] = s.delta;
    e["generated"] = s.generated;
    if (s.skipped) e["warning"] = s.warning;
    per.push_back(e);
  }
  j["warnings"] = r.warnings;
  return j.dump(2);
}

std::vector<Labelled> read_labelled(const std::filesystem::path& path) {
  std::vector<Labelled> out;
  for (const auto& r : chem::read_molecules(path)) {
    if (!r.label) throw FormatError(path.string() + ": molecule " + r.smiles + " has no label");
    out.emplace_back(r.smiles, *r.label == 1);
  }
  return out;
}

}  // namespace himol::lowshot
