#include "himol/inversion.hpp"

#include <cmath>

#include "himol/binio.hpp"
#include "himol/hash.hpp"
#include "himol/parallel.hpp"
#include "himol/rng.hpp"
#include "himol/seq/optim.hpp"

namespace himol::inversion {
namespace {

constexpr binio::Magic kMagic = {'H', 'I', 'M', 'O', 'L', 'E', 'M', 'B'};
constexpr std::uint32_t kVersion = 1;

void check_dataset(std::span<const std::string> dataset, const seq::Backbone& model, int k) {
  if (dataset.empty()) throw EmptyDataset("inversion dataset is empty");
  if (k < 1) throw ConfigError("K must be at least 1");
  if (static_cast<std::size_t>(k) >= dataset.size()) {
    throw KTooLarge("K = " + std::to_string(k) + " must be smaller than N = " + std::to_string(dataset.size()));
  }
  for (const auto& s : dataset) model.vocab().encode_smiles(s);
}

void check_state(const HierarchicalEmbeddings& st, const seq::Backbone& model) {
  const auto E = static_cast<std::size_t>(model.embed());
  if (st.s.size() != E) throw Error("embedding width does not match the backbone");
  if (st.c.size() != st.n()) throw Error("assignment count does not match N");
  for (int c : st.c) {
    if (c < 0 || static_cast<std::size_t>(c) >= st.k()) throw Error("cluster assignment out of range");
  }
}

// Offsets into the flat parameter vector [s | i_0..i_{K-1} | d_0..d_{N-1}].
struct Flat {
  std::size_t E, K, N;
  std::size_t s() const { return 0; }
  std::size_t i(std::size_t k) const { return E * (1 + k); }
  std::size_t d(std::size_t n) const { return E * (1 + K + n); }
  std::size_t size() const { return E * (1 + K + N); }
};

std::vector<double> flatten(const HierarchicalEmbeddings& st) {
  std::vector<double> v(st.s);
  for (const auto& r : st.i) v.insert(v.end(), r.begin(), r.end());
  for (const auto& r : st.d) v.insert(v.end(), r.begin(), r.end());
  return v;
}

void unflatten(const std::vector<double>& v, HierarchicalEmbeddings& st) {
  const Flat f{st.embed(), st.k(), st.n()};
  auto row = [&](std::size_t at, Embedding& out) {
    std::copy_n(v.begin() + static_cast<std::ptrdiff_t>(at), f.E, out.begin());
  };
  row(f.s(), st.s);
  for (std::size_t k = 0; k < f.K; ++k) row(f.i(k), st.i[k]);
  for (std::size_t n = 0; n < f.N; ++n) row(f.d(n), st.d[n]);
}

}  // namespace

HierarchicalEmbeddings init(std::span<const std::string> dataset, const seq::Backbone& model,
                            const InversionConfig& config) {
  check_dataset(dataset, model, config.k);
  const auto gen = model.token_embedding(model.vocab().gen());
  double ms = 0.0;
  for (double v : gen) ms += v * v;
  const double sigma = 0.01 * std::sqrt(ms / static_cast<double>(gen.size()));
  Rng rng(derive_seed(config.seed, 0));
  auto noisy = [&] {
    Embedding e(gen.begin(), gen.end());
    for (auto& v : e) v += sigma * rng.normal();
    return e;
  };
  HierarchicalEmbeddings st;
  st.seed = config.seed;
  st.s = noisy();
  for (int k = 0; k < config.k; ++k) st.i.push_back(noisy());
  for (std::size_t n = 0; n < dataset.size(); ++n) st.d.push_back(noisy());
  for (std::size_t n = 0; n < dataset.size(); ++n) {
    st.c.push_back(static_cast<int>(rng.index(static_cast<std::uint64_t>(config.k))));
  }
  if (config.update_head) st.head.emplace(model.head().begin(), model.head().end());
  return st;
}

seq::Prompt training_prompt(const seq::Backbone& model, const HierarchicalEmbeddings& state, std::size_t k,
                            std::size_t n) {
  const Embedding pseudo[] = {state.s, state.i.at(k), state.d.at(n)};
  return seq::make_prompt(model, seq::kTrainWords, pseudo);
}

std::vector<double> assignment_losses(const HierarchicalEmbeddings& state, const seq::Backbone& model,
                                      std::span<const std::string> dataset) {
  check_state(state, model);
  if (dataset.size() != state.n()) throw Error("dataset size does not match N");
  const std::size_t K = state.k();
  std::vector<double> losses(state.n() * K);
  parallel_for(losses.size(), [&](std::size_t idx) {
    const std::size_t n = idx / K;
    const std::size_t k = idx % K;
    const auto ids = model.vocab().encode_smiles(dataset[n]);
    losses[idx] = seq::prompt_loss_value(model, training_prompt(model, state, k, n), ids, state.head_ptr());
  });
  return losses;
}

namespace {

std::vector<int> argmin_rows(const std::vector<double>& losses, std::size_t n, std::size_t k) {
  std::vector<int> c(n, 0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 1; j < k; ++j) {
      if (losses[r * k + j] < losses[r * k + static_cast<std::size_t>(c[r])]) c[r] = static_cast<int>(j);
    }
  }
  return c;
}

}  // namespace

std::vector<int> assign_clusters(const HierarchicalEmbeddings& state, const seq::Backbone& model,
                                 std::span<const std::string> dataset) {
  return argmin_rows(assignment_losses(state, model, dataset), state.n(), state.k());
}

void validate(const InversionConfig& config) {
  if (config.epochs < 1 || config.batch < 1) throw ConfigError("epochs and batch must be positive");
  if (config.assign_epochs < 0 || config.assign_epochs > config.epochs) {
    throw ConfigError("assignment epochs (" + std::to_string(config.assign_epochs) + ") must be in [0, epochs = " +
                      std::to_string(config.epochs) + "]");
  }
  if (config.k < 1) throw ConfigError("K must be at least 1");
  if (!(config.lr > 0.0) || !(config.clip > 0.0) || !(config.head_lr > 0.0)) {
    throw ConfigError("learning rates and clip must be positive");
  }
}

TrainResult train(std::span<const std::string> dataset, const seq::Backbone& model, const InversionConfig& config) {
  validate(config);
  TrainResult out;
  out.state = init(dataset, model, config);
  HierarchicalEmbeddings& st = out.state;
  const Flat f{st.embed(), st.k(), st.n()};
  const auto E = f.E;
  std::vector<std::vector<int>> encoded;
  for (const auto& s : dataset) encoded.push_back(model.vocab().encode_smiles(s));

  std::vector<double> theta = flatten(st);
  seq::AdamW opt(theta.size(), {});
  std::optional<seq::AdamW> head_opt;
  if (st.head) head_opt.emplace(st.head->size(), seq::AdamWConfig{});

  Rng rng(derive_seed(config.seed, 1));
  std::vector<std::size_t> order(f.N);
  for (std::size_t n = 0; n < f.N; ++n) order[n] = n;
  const auto B = static_cast<std::size_t>(config.batch);
  const std::size_t steps_per_epoch = (f.N + B - 1) / B;
  const std::size_t total_steps = steps_per_epoch * static_cast<std::size_t>(config.epochs);
  std::size_t step = 0;
  std::vector<double> grad(theta.size());
  std::vector<double> head_grad;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (epoch < config.assign_epochs) {
      out.last_assignment_losses = assignment_losses(st, model, dataset);
      st.c = argmin_rows(out.last_assignment_losses, f.N, f.K);
      out.last_assignment_state = st;
      out.assignment_history.push_back(st.c);
    }
    rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < f.N; start += B) {
      const std::size_t count = std::min(B, f.N - start);
      std::vector<seq::PromptLoss> results(count);
      std::vector<std::vector<double>> head_slots(count);
      parallel_for(count, [&](std::size_t b) {
        const std::size_t n = order[start + b];
        seq::LossOptions lo;
        if (st.head) {
          head_slots[b].assign(st.head->size(), 0.0);
          lo.head = st.head->data();
          lo.head_grad = head_slots[b].data();
        }
        results[b] = seq::prompt_loss(model, training_prompt(model, st, static_cast<std::size_t>(st.c[n]), n),
                                      encoded[n], lo);
      });
      std::fill(grad.begin(), grad.end(), 0.0);
      if (st.head) head_grad.assign(st.head->size(), 0.0);
      const double inv = 1.0 / static_cast<double>(count);
      const std::size_t P = results.front().grads.size();  // words + 3 pseudo tokens
      for (std::size_t b = 0; b < count; ++b) {
        const std::size_t n = order[start + b];
        const auto& g = results[b].grads;
        if (!std::isfinite(results[b].loss)) throw DivergedLoss("inversion loss is not finite");
        epoch_loss += results[b].loss;
        const std::size_t at[3] = {f.s(), f.i(static_cast<std::size_t>(st.c[n])), f.d(n)};
        for (std::size_t r = 0; r < 3; ++r) {
          for (std::size_t e = 0; e < E; ++e) grad[at[r] + e] += inv * g[P - 3 + r][e];
        }
        if (st.head) {
          for (std::size_t e = 0; e < head_grad.size(); ++e) head_grad[e] += inv * head_slots[b][e];
        }
      }
      seq::clip_grad_norm(grad, config.clip);
      opt.step(theta, grad, seq::linear_decay(config.lr, step, total_steps));
      if (st.head) {
        seq::clip_grad_norm(head_grad, config.clip);
        head_opt->step(*st.head, head_grad, seq::linear_decay(config.head_lr, step, total_steps));
      }
      unflatten(theta, st);
      ++step;
    }
    const double mean = epoch_loss / static_cast<double>(f.N);
    if (!std::isfinite(mean)) throw DivergedLoss("inversion loss is not finite");
    out.loss_history.push_back(mean);
  }
  return out;
}

SharedResult train_shared(std::span<const std::string> dataset, const seq::Backbone& model,
                          const InversionConfig& config) {
  validate(config);
  if (dataset.empty()) throw EmptyDataset("inversion dataset is empty");
  std::vector<std::vector<int>> encoded;
  for (const auto& s : dataset) encoded.push_back(model.vocab().encode_smiles(s));
  InversionConfig one = config;
  one.k = 1;
  one.update_head = false;
  // Same draw as the hierarchical shared token; init needs K < N.
  const std::string pair[] = {dataset[0], dataset[0]};
  SharedResult out;
  out.s = init(pair, model, one).s;
  seq::AdamW opt(out.s.size(), {});
  Rng rng(derive_seed(config.seed, 1));
  const std::size_t N = dataset.size();
  std::vector<std::size_t> order(N);
  for (std::size_t n = 0; n < N; ++n) order[n] = n;
  const auto B = static_cast<std::size_t>(config.batch);
  const std::size_t total_steps = (N + B - 1) / B * static_cast<std::size_t>(config.epochs);
  std::size_t step = 0;
  std::vector<double> grad(out.s.size());
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < N; start += B) {
      const std::size_t count = std::min(B, N - start);
      std::vector<seq::PromptLoss> results(count);
      const Embedding pseudo[] = {out.s};
      const seq::Prompt prompt = seq::make_prompt(model, seq::kTrainWords, pseudo);
      parallel_for(count, [&](std::size_t b) { results[b] = seq::prompt_loss(model, prompt, encoded[order[start + b]]); });
      std::fill(grad.begin(), grad.end(), 0.0);
      const double inv = 1.0 / static_cast<double>(count);
      for (const auto& r : results) {
        if (!std::isfinite(r.loss)) throw DivergedLoss("inversion loss is not finite");
        epoch_loss += r.loss;
        for (std::size_t e = 0; e < grad.size(); ++e) grad[e] += inv * r.grads.back()[e];
      }
      seq::clip_grad_norm(grad, config.clip);
      opt.step(out.s, grad, seq::linear_decay(config.lr, step, total_steps));
      ++step;
    }
    out.loss_history.push_back(epoch_loss / static_cast<double>(N));
  }
  return out;
}

std::uint64_t dataset_hash(std::span<const std::string> dataset) {
  std::uint64_t h = fnv1a("himol-dataset");
  for (const auto& s : dataset) h = fnv1a(s, fnv1a("\n", h));
  return h;
}

std::vector<std::uint8_t> serialize(const EmbeddingCheckpoint& ckpt) {
  const auto& st = ckpt.state;
  const auto& c = ckpt.config;
  binio::Writer w;
  w.u64(st.k());
  w.u64(st.n());
  w.u64(st.embed());
  w.u64(st.seed);
  w.f64s(st.s);
  for (const auto& r : st.i) w.f64s(r);
  for (const auto& r : st.d) w.f64s(r);
  for (int v : st.c) w.u64(static_cast<std::uint64_t>(v));
  w.u32(st.head ? 1 : 0);
  if (st.head) {
    w.u64(st.head->size());
    w.f64s(*st.head);
  }
  w.i64(c.epochs);
  w.i64(c.batch);
  w.f64(c.lr);
  w.f64(c.clip);
  w.i64(c.assign_epochs);
  w.i64(c.k);
  w.u64(c.seed);
  w.u32(c.update_head ? 1 : 0);
  w.f64(c.head_lr);
  w.u64(ckpt.dataset_hash);
  w.u64(ckpt.dataset.size());
  for (const auto& m : ckpt.dataset) w.str(m);
  return binio::seal(kMagic, kVersion, w);
}

EmbeddingCheckpoint deserialize_embeddings(std::span<const std::uint8_t> bytes) {
  const auto payload = binio::unseal(bytes, kMagic, kVersion, "embedding checkpoint");
  binio::Reader r(payload);
  EmbeddingCheckpoint out;
  auto& st = out.state;
  const auto K = r.u64();
  const auto N = r.u64();
  const auto E = r.u64();
  if (K == 0 || N == 0 || E == 0 || K >= N || N > 10'000'000 || E > 100'000) {
    throw FormatError("embedding checkpoint: implausible sizes");
  }
  st.seed = r.u64();
  st.s = r.f64s(E);
  for (std::uint64_t k = 0; k < K; ++k) st.i.push_back(r.f64s(E));
  for (std::uint64_t n = 0; n < N; ++n) st.d.push_back(r.f64s(E));
  for (std::uint64_t n = 0; n < N; ++n) {
    const auto c = r.u64();
    if (c >= K) throw FormatError("embedding checkpoint: assignment out of range");
    st.c.push_back(static_cast<int>(c));
  }
  if (r.u32() != 0) {
    const auto h = r.u64();
    if (h > 1'000'000'000) throw FormatError("embedding checkpoint: implausible head size");
    st.head = r.f64s(h);
  }
  auto& c = out.config;
  c.epochs = static_cast<int>(r.i64());
  c.batch = static_cast<int>(r.i64());
  c.lr = r.f64();
  c.clip = r.f64();
  c.assign_epochs = static_cast<int>(r.i64());
  c.k = static_cast<int>(r.i64());
  c.seed = r.u64();
  c.update_head = r.u32() != 0;
  c.head_lr = r.f64();
  out.dataset_hash = r.u64();
  const auto count = r.u64();
  if (count != 0 && count != N) throw FormatError("embedding checkpoint: dataset size does not match N");
  for (std::uint64_t n = 0; n < count; ++n) out.dataset.push_back(r.str());
  if (count != 0 && dataset_hash(out.dataset) != out.dataset_hash) {
    throw FormatError("embedding checkpoint: dataset does not match its hash");
  }
  if (!r.done()) throw FormatError("embedding checkpoint: trailing bytes");
  return out;
}

void save(const EmbeddingCheckpoint& ckpt, const std::filesystem::path& path) {
  binio::write_file(path, serialize(ckpt));
}

EmbeddingCheckpoint load_embeddings(const std::filesystem::path& path) {
  return deserialize_embeddings(binio::read_file(path));
}

}  // namespace himol::inversion
