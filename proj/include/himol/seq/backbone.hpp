#pragma once
// Small pre-LN causal transformer decoder. All weights live in one flat
// vector; Layout gives the offset of every tensor. Matrices are stored
// row-major as (in x out) so that y = x W.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "himol/seq/vocab.hpp"

namespace himol::seq {

struct Hyper {
  int embed = 64;
  int layers = 2;
  int heads = 4;
  int context = 128;
  int mlp = 256;

  bool operator==(const Hyper&) const = default;
};

struct LayerLayout {
  std::size_t ln1_g, ln1_b, w_qkv, b_qkv, w_o, b_o, ln2_g, ln2_b, w_1, b_1, w_2, b_2;
};

struct Layout {
  Layout(const Hyper& h, std::size_t vocab);

  std::size_t tok_emb, pos_emb;
  std::vector<LayerLayout> layers;
  std::size_t lnf_g, lnf_b, head_w, head_b;
  std::size_t head_size;  // head_w + head_b entries, contiguous from head_w
  std::size_t total;
};

class Backbone {
 public:
  Backbone(Vocab vocab, Hyper hyper, std::uint64_t seed);
  Backbone(Vocab vocab, Hyper hyper, std::vector<double> params, bool frozen);

  const Vocab& vocab() const { return vocab_; }
  const Hyper& hyper() const { return hyper_; }
  const Layout& layout() const { return layout_; }
  int embed() const { return hyper_.embed; }

  std::span<const double> params() const { return params_; }
  // Writable weights; only legal before freeze().
  std::span<double> mutable_params();
  bool frozen() const { return frozen_; }
  void freeze() { frozen_ = true; }

  std::span<const double> token_embedding(int id) const;
  std::vector<std::vector<double>> embed_words(std::string_view words) const;
  std::span<const double> head() const;

  bool operator==(const Backbone& other) const;

 private:
  Vocab vocab_;
  Hyper hyper_;
  Layout layout_;
  std::vector<double> params_;
  bool frozen_ = false;
};

class FrozenViolation : public Error {
 public:
  using Error::Error;
};

std::vector<std::uint8_t> serialize(const Backbone& model);
Backbone deserialize(std::span<const std::uint8_t> bytes);
void save(const Backbone& model, const std::filesystem::path& path);
Backbone load_backbone(const std::filesystem::path& path);

}  // namespace himol::seq
