#pragma once
// Generation metrics: validity, uniqueness, novelty, active ratio, NSPDK
// MMD and the Frechet distance between activation statistics.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "himol/chem/fingerprint.hpp"
#include "himol/chem/molgraph.hpp"
#include "himol/seq/backbone.hpp"
#include "himol/seq/model.hpp"

namespace himol::metrics {

// Percentages in [0, 100]. An empty denominator gives 0.
double validity(std::span<const std::string> gen);
double uniqueness(std::span<const std::string> gen);
double novelty(std::span<const std::string> gen, std::span<const std::string> train);

class ClassifierFailure : public Error {
 public:
  using Error::Error;
};

// Binary activity predictor. May throw ClassifierFailure for a molecule.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual bool predict(const chem::MolGraph& graph) const = 0;
};

// Majority vote of the k most Tanimoto-similar labelled molecules; ties in
// similarity go to the earlier training entry, ties in the vote to the
// nearest neighbour.
class KnnTanimoto : public Classifier {
 public:
  // Throws ConfigError when empty or k < 1; invalid SMILES are rejected.
  KnnTanimoto(std::span<const std::pair<std::string, bool>> labelled, int k = 5);
  bool predict(const chem::MolGraph& graph) const override;

 private:
  std::vector<chem::Fingerprint> fps_;
  std::vector<bool> labels_;
  int k_;
};

struct ActiveRatio {
  double percent = 0.0;
  std::size_t active = 0;
  std::size_t scored = 0;
  std::size_t failures = 0;  // excluded from the denominator
};

ActiveRatio active_ratio(std::span<const std::string> gen, const Classifier& classifier);

struct NspdkConfig {
  int radius = 2;
  int distance = 4;
  std::uint32_t width = 1u << 20;  // power of two
  bool operator==(const NspdkConfig&) const = default;
};

// Sorted (index, count) pairs.
using SparseVector = std::vector<std::pair<std::uint32_t, double>>;

// Pairs {u, v} at distance <= D (u == v included) and radii r <= R; the
// feature is the hash of (r, d, sorted pair of rooted-neighbourhood
// certificates).
SparseVector nspdk_features(const chem::MolGraph& graph, const NspdkConfig& config = {});

// Normalized kernel; 0 when either vector is empty.
double nspdk_kernel(const SparseVector& a, const SparseVector& b);

// Biased MMD^2 with the normalized kernel, clamped at 0. Throws ConfigError
// if either side is empty.
double nspdk_mmd(std::span<const chem::MolGraph> gen, std::span<const chem::MolGraph> test,
                 const NspdkConfig& config = {});

// |m_a - m_b|^2 + Tr(C_a + C_b - 2 (C_a C_b)^{1/2}).
double frechet(const seq::ActivationStats& a, const seq::ActivationStats& b);

struct Counts {
  std::size_t generated = 0;
  std::size_t valid = 0;
  std::size_t unique = 0;
  std::size_t novel = 0;
};

struct MetricsReport {
  double validity = 0.0;
  double uniqueness = 0.0;
  double novelty = 0.0;
  std::optional<double> active;
  std::optional<double> nspdk_mmd;
  std::optional<double> frechet;
  Counts counts;
  std::vector<std::string> warnings;
  std::map<std::string, std::string> errors;  // metric -> failure message
};

struct EvalConfig {
  NspdkConfig nspdk;
  bool repair = false;  // also report a variant with every sample repaired
  std::uint64_t repair_seed = 0;
};

struct EvalResult {
  MetricsReport raw;
  std::optional<MetricsReport> repaired;
  EvalConfig config;
};

// Per-metric failures land in MetricsReport::errors. Frechet is skipped
// without a backbone, active ratio without a classifier.
EvalResult evaluate(std::span<const std::string> gen, std::span<const std::string> train,
                    std::span<const std::string> test, const seq::Backbone* backbone,
                    const Classifier* classifier, const EvalConfig& config = {});

// Flat JSON object; the repaired variant uses "repaired_" prefixed keys.
std::string to_json(const EvalResult& result);

}  // namespace himol::metrics
