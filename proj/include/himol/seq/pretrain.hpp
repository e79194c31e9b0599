#pragma once
// Teacher-forced pretraining of the backbone together with the generic
// pseudo-token <GEN>. Each example is "<words> <GEN>xR BOS smiles EOS"
// where the words are "The molecule is a" or "A similar chemical of" and
// R is 1 or 3, so both the inversion and the sampling prompt shapes are
// seen during training.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "himol/seq/backbone.hpp"

namespace himol::seq {

struct PretrainConfig {
  Hyper hyper;
  int epochs = 30;
  int batch = 16;
  double lr = 3e-4;
  double weight_decay = 0.01;
  double clip = 1.0;
  std::uint64_t seed = 0;
  // false: always "The molecule is a <GEN>".
  bool prompt_variants = true;
};

struct PretrainResult {
  Backbone model;
  std::vector<double> loss_history;  // mean loss per epoch
};

class EmptyCorpus : public Error {
 public:
  using Error::Error;
};

// The returned backbone is frozen.
PretrainResult pretrain(std::span<const std::string> corpus, const PretrainConfig& config);

}  // namespace himol::seq
