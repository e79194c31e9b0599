#pragma once
// Prompt-conditioned scoring, decoding and pooled activations on a frozen
// backbone. A prompt is a list of E-vectors: embedded words followed by
// free pseudo-token embeddings.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "himol/seq/backbone.hpp"

namespace himol::seq {

using Embedding = std::vector<double>;
using Prompt = std::vector<Embedding>;

inline constexpr std::string_view kTrainWords = "The molecule is a";
inline constexpr std::string_view kSampleWords = "A similar chemical of";

// words followed by the given pseudo-token embeddings.
Prompt make_prompt(const Backbone& model, std::string_view words, std::span<const Embedding> pseudo);

struct LossOptions {
  const double* head = nullptr;  // output-head override (head_w then head_b)
  double* head_grad = nullptr;   // accumulates head grads when set
};

struct PromptLoss {
  double loss = 0.0;
  std::vector<Embedding> grads;  // one per prompt embedding
};

// Mean cross-entropy of target tokens and EOS given prompt + BOS. Backbone
// weights are never modified.
PromptLoss prompt_loss(const Backbone& model, const Prompt& prompt, std::string_view target,
                       const LossOptions& options = {});
PromptLoss prompt_loss(const Backbone& model, const Prompt& prompt, std::span<const int> target,
                       const LossOptions& options = {});
// Loss only, no reverse pass.
double prompt_loss_value(const Backbone& model, const Prompt& prompt, std::span<const int> target,
                         const double* head = nullptr);

struct DecodeConfig {
  double temperature = 1.0;
  int max_len = 100;
  std::uint64_t seed = 0;
  bool greedy = false;
};

struct DecodeResult {
  std::string smiles;
  std::vector<int> tokens;
  bool truncated = false;
};

// Receives the sampling distribution over the vocabulary at each step.
using StepObserver = std::function<void(std::span<const double>)>;

// Tokens outside the emittable set get probability 0.
DecodeResult decode(const Backbone& model, const Prompt& prompt, const DecodeConfig& config,
                    const double* head = nullptr, const StepObserver& observer = {});

// Mean final-layer-norm state over the SMILES token positions under
// "The molecule is a <GEN>".
std::vector<double> activations(const Backbone& model, std::string_view smiles);

struct ActivationStats {
  std::vector<double> mean;
  std::vector<double> cov;  // dim x dim row-major, unbiased
  std::size_t count = 0;
  std::size_t dim() const { return mean.size(); }
};

// Needs at least two vectors of equal length.
ActivationStats activation_stats(std::span<const std::vector<double>> vectors);

}  // namespace himol::seq
