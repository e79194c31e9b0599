#pragma once
// Low-shot augmentation: score a molecule classifier trained on k shots per
// class with and without generated molecules of the same class, and report
// the ROC-AUC change over seeds.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "himol/chem/fingerprint.hpp"
#include "himol/inversion.hpp"
#include "himol/sampler.hpp"
#include "himol/seq/backbone.hpp"

namespace himol::lowshot {

using Labelled = std::pair<std::string, bool>;

// Mann-Whitney AUC with half credit for ties; labels are 0 or 1. Throws
// ConfigError when a class is missing or the lengths differ.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

// Continuous activity score in [0, 1].
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual double score(const chem::MolGraph& graph) const = 0;
};

// Similarity-weighted vote of the k most Tanimoto-similar training molecules.
// Entries with the same canonical form and label are merged, so duplicating
// the training set leaves every score unchanged. Zero total weight gives 0.5.
class WeightedKnn : public Scorer {
 public:
  WeightedKnn(std::span<const Labelled> train, int k = 5);
  double score(const chem::MolGraph& graph) const override;

 private:
  std::vector<chem::Fingerprint> fps_;
  std::vector<bool> labels_;
  int k_;
};

struct LowShotTask {
  int shots = 16;  // per class
  std::vector<Labelled> pool;
  std::vector<Labelled> test;
  std::vector<std::uint64_t> seeds;
};

class InsufficientPool : public Error {
 public:
  using Error::Error;
};

// Produces `count` molecules of the class that `shots` belong to.
using Generator = std::function<std::vector<std::string>(std::span<const std::string> shots, bool label,
                                                         std::size_t count, std::uint64_t seed)>;

// Trains one inversion state on the shots and samples in strict mode.
Generator inversion_generator(const seq::Backbone& model, inversion::InversionConfig inversion,
                              sampler::SamplerConfig sampling);

struct AugmentConfig {
  int multiplier = 3;  // generated molecules per shot
  int knn_k = 5;
};

struct SeedOutcome {
  std::uint64_t seed = 0;
  bool skipped = false;
  std::string warning;
  double auc_base = 0.0;
  double auc_augmented = 0.0;
  double delta = 0.0;
  std::size_t generated = 0;
};

struct LowShotResult {
  std::vector<SeedOutcome> seeds;
  std::size_t used = 0;
  double mean_delta = 0.0;
  double ci_low = 0.0;  // 95% Student-t interval; collapses to the mean for one seed
  double ci_high = 0.0;
  std::vector<std::string> warnings;
};

// Throws InsufficientPool when a class has fewer than `shots` pool entries,
// ConfigError when test overlaps pool or lacks a class, and Error when every
// seed is skipped.
LowShotResult run_augmentation(const LowShotTask& task, const Generator& generate, const AugmentConfig& config = {});

std::string to_json(const LowShotResult& result, const LowShotTask& task);

// Molecule file in which every entry carries a 0/1 label.
std::vector<Labelled> read_labelled(const std::filesystem::path& path);

}  // namespace himol::lowshot
