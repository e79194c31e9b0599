#include "himol/seq/backbone.hpp"

#include <algorithm>
#include <cmath>

#include "himol/binio.hpp"
#include "himol/rng.hpp"

namespace himol::seq {
namespace {

constexpr binio::Magic kMagic = {'H', 'I', 'M', 'O', 'L', 'B', 'K', 'B'};
constexpr std::uint32_t kVersion = 1;
constexpr double kInitStd = 0.02;
// Unit-scale input embeddings so that prompt-embedding step sizes are
// comparable to those used with large pretrained text models.
constexpr double kEmbedStd = 1.0;

void check_hyper(const Hyper& h) {
  if (h.embed <= 0 || h.layers <= 0 || h.heads <= 0 || h.context <= 1 || h.mlp <= 0) {
    throw ConfigError("model sizes must be positive");
  }
  if (h.embed % h.heads != 0) throw ConfigError("embed width must be divisible by the head count");
}

}  // namespace

Layout::Layout(const Hyper& h, std::size_t vocab) {
  const auto e = static_cast<std::size_t>(h.embed);
  const auto m = static_cast<std::size_t>(h.mlp);
  std::size_t at = 0;
  auto take = [&at](std::size_t n) {
    const std::size_t start = at;
    at += n;
    return start;
  };
  tok_emb = take(vocab * e);
  pos_emb = take(static_cast<std::size_t>(h.context) * e);
  for (int l = 0; l < h.layers; ++l) {
    LayerLayout L{};
    L.ln1_g = take(e);
    L.ln1_b = take(e);
    L.w_qkv = take(e * 3 * e);
    L.b_qkv = take(3 * e);
    L.w_o = take(e * e);
    L.b_o = take(e);
    L.ln2_g = take(e);
    L.ln2_b = take(e);
    L.w_1 = take(e * m);
    L.b_1 = take(m);
    L.w_2 = take(m * e);
    L.b_2 = take(e);
    layers.push_back(L);
  }
  lnf_g = take(e);
  lnf_b = take(e);
  head_w = take(e * vocab);
  head_b = take(vocab);
  head_size = at - head_w;
  total = at;
}

Backbone::Backbone(Vocab vocab, Hyper hyper, std::uint64_t seed)
    : vocab_(std::move(vocab)), hyper_(hyper), layout_((check_hyper(hyper_), hyper_), vocab_.size()) {
  params_.assign(layout_.total, 0.0);
  Rng rng(seed);
  auto fill = [&](std::size_t at, std::size_t n, double std) {
    for (std::size_t i = 0; i < n; ++i) params_[at + i] = std * rng.normal();
  };
  auto ones = [&](std::size_t at) { std::fill_n(params_.begin() + static_cast<std::ptrdiff_t>(at), hyper_.embed, 1.0); };
  const auto e = static_cast<std::size_t>(hyper_.embed);
  const auto m = static_cast<std::size_t>(hyper_.mlp);
  const double resid_std = kInitStd / std::sqrt(2.0 * hyper_.layers);
  fill(layout_.tok_emb, vocab_.size() * e, kEmbedStd);
  fill(layout_.pos_emb, static_cast<std::size_t>(hyper_.context) * e, kEmbedStd);
  for (const auto& L : layout_.layers) {
    ones(L.ln1_g);
    ones(L.ln2_g);
    fill(L.w_qkv, e * 3 * e, kInitStd);
    fill(L.w_o, e * e, resid_std);
    fill(L.w_1, e * m, kInitStd);
    fill(L.w_2, m * e, resid_std);
  }
  ones(layout_.lnf_g);
  fill(layout_.head_w, e * vocab_.size(), kInitStd);
}

Backbone::Backbone(Vocab vocab, Hyper hyper, std::vector<double> params, bool frozen)
    : vocab_(std::move(vocab)),
      hyper_(hyper),
      layout_((check_hyper(hyper_), hyper_), vocab_.size()),
      params_(std::move(params)),
      frozen_(frozen) {
  if (params_.size() != layout_.total) throw FormatError("backbone weight count does not match its sizes");
}

std::span<double> Backbone::mutable_params() {
  if (frozen_) throw FrozenViolation("backbone is frozen");
  return params_;
}

std::span<const double> Backbone::token_embedding(int id) const {
  const auto e = static_cast<std::size_t>(hyper_.embed);
  if (id < 0 || static_cast<std::size_t>(id) >= vocab_.size()) throw UnknownToken("token id out of range");
  return std::span<const double>(params_).subspan(layout_.tok_emb + static_cast<std::size_t>(id) * e, e);
}

std::vector<std::vector<double>> Backbone::embed_words(std::string_view words) const {
  std::vector<std::vector<double>> out;
  for (int id : vocab_.encode_words(words)) {
    const auto row = token_embedding(id);
    out.emplace_back(row.begin(), row.end());
  }
  return out;
}

std::span<const double> Backbone::head() const {
  return std::span<const double>(params_).subspan(layout_.head_w, layout_.head_size);
}

bool Backbone::operator==(const Backbone& other) const {
  return vocab_ == other.vocab_ && hyper_ == other.hyper_ && params_ == other.params_ && frozen_ == other.frozen_;
}

std::vector<std::uint8_t> serialize(const Backbone& model) {
  binio::Writer w;
  const auto& entries = model.vocab().entries();
  w.u64(entries.size());
  for (const auto& t : entries) w.str(t);
  const Hyper& h = model.hyper();
  for (int v : {h.embed, h.layers, h.heads, h.context, h.mlp}) w.u64(static_cast<std::uint64_t>(v));
  w.u32(model.frozen() ? 1 : 0);
  w.u64(model.params().size());
  w.f64s(model.params());
  return binio::seal(kMagic, kVersion, w);
}

Backbone deserialize(std::span<const std::uint8_t> bytes) {
  const auto payload = binio::unseal(bytes, kMagic, kVersion, "backbone checkpoint");
  binio::Reader r(payload);
  const auto n = r.u64();
  if (n > 1'000'000) throw FormatError("backbone checkpoint: implausible vocabulary size");
  std::vector<std::string> entries;
  for (std::uint64_t i = 0; i < n; ++i) entries.push_back(r.str());
  Hyper h;
  for (int* f : {&h.embed, &h.layers, &h.heads, &h.context, &h.mlp}) {
    const auto v = r.u64();
    if (v == 0 || v > 1'000'000) throw FormatError("backbone checkpoint: implausible size field");
    *f = static_cast<int>(v);
  }
  const bool frozen = r.u32() != 0;
  const auto count = r.u64();
  if (count > 1'000'000'000) throw FormatError("backbone checkpoint: implausible weight count");
  auto params = r.f64s(count);
  if (!r.done()) throw FormatError("backbone checkpoint: trailing bytes");
  return Backbone(Vocab::from_entries(std::move(entries)), h, std::move(params), frozen);
}

void save(const Backbone& model, const std::filesystem::path& path) { binio::write_file(path, serialize(model)); }

Backbone load_backbone(const std::filesystem::path& path) { return deserialize(binio::read_file(path)); }

}  // namespace himol::seq
