#pragma once
// Interpolation sampling: pick two training molecules, mix their
// intermediate and detail tokens, decode under "A similar chemical of
// [s][i][d]", optionally repair and optionally keep only valid, unique,
// novel outputs.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "himol/inversion.hpp"
#include "himol/seq/backbone.hpp"
#include "himol/seq/model.hpp"

namespace himol::sampler {

using seq::Embedding;

// Which levels are mixed; an unmixed level takes molecule i's token.
struct InterpolationMask {
  bool intermediate = true;
  bool detail = true;
  bool operator==(const InterpolationMask&) const = default;
};

struct SamplerConfig {
  double l = 0.0;  // lambda ~ Uniform(l, 1 - l)
  double temperature = 1.0;
  int max_samples = 100;
  int max_len = 100;
  std::uint64_t seed = 0;
  bool strict = false;
  bool repair = false;
  int budget_factor = 100;  // strict mode gives up after budget_factor * max_samples draws
  InterpolationMask mask;
  // Overrides for diagnostics.
  std::optional<double> fixed_lambda;
  std::optional<std::pair<std::size_t, std::size_t>> fixed_pair;
  bool greedy = false;

  bool operator==(const SamplerConfig&) const = default;
};

// Defaults for the non-interpolating baseline path.
SamplerConfig baseline_defaults();

struct SampleRecord {
  std::string raw;
  std::optional<std::string> repaired;
  bool valid = false;
  bool repair_failed = false;
  std::optional<std::size_t> i;  // 0-based source molecules
  std::optional<std::size_t> j;
  std::optional<double> lambda;
  std::uint64_t seed = 0;
  bool truncated = false;
  std::optional<std::string> canonical;  // set when valid

  // The repaired string when repair ran and succeeded, else the raw one.
  const std::string& final_smiles() const { return repaired ? *repaired : raw; }
  bool operator==(const SampleRecord&) const = default;
};

struct SampleBatch {
  std::vector<SampleRecord> records;
  SamplerConfig config;
  std::size_t draws = 0;

  double resampling_ratio() const;
  bool operator==(const SampleBatch&) const = default;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

class StrictExhausted : public Error {
 public:
  StrictExhausted(const std::string& what, SampleBatch partial) : Error(what), partial_(std::move(partial)) {}
  const SampleBatch& partial() const { return partial_; }

 private:
  SampleBatch partial_;
};

struct Interpolated {
  Embedding intermediate;
  Embedding detail;
};

// lambda * (i_{c_i}, d_i) + (1 - lambda) * (i_{c_j}, d_j); indices 0-based.
Interpolated interpolate(const inversion::HierarchicalEmbeddings& state, std::size_t i, std::size_t j, double lambda,
                         const InterpolationMask& mask = {});

// "A similar chemical of [s][i][d]".
seq::Prompt sampling_prompt(const seq::Backbone& model, const inversion::HierarchicalEmbeddings& state,
                            const Interpolated& mixed);

struct DrawSpec {
  std::size_t i = 0;
  std::size_t j = 0;
  double lambda = 1.0;
  std::uint64_t seed = 0;  // per-draw seed, derived from (config seed, draw index)
};

// Pair and lambda of draw number `index` over `n` molecules.
DrawSpec draw_spec(std::size_t n, const SamplerConfig& config, std::uint64_t index);

// Throws ConfigError on an out-of-range field.
void validate(const SamplerConfig& config);

// `training` holds the canonical forms rejected as non-novel in strict mode.
SampleBatch sample(const inversion::HierarchicalEmbeddings& state, const seq::Backbone& model,
                   const SamplerConfig& config, const std::unordered_set<std::string>& training = {});

// Decodes from a fixed prompt with no interpolation.
SampleBatch sample_baseline(const seq::Backbone& model, const seq::Prompt& prompt, const SamplerConfig& config,
                            const std::unordered_set<std::string>& training = {}, const double* head = nullptr);

// Canonical forms of the valid entries of `smiles`.
std::unordered_set<std::string> canonical_set(std::span<const std::string> smiles);

// One JSON object per record.
std::string to_json_line(const SampleRecord& record);

}  // namespace himol::sampler
