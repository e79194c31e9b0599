#include "himol/seq/model.hpp"

#include <algorithm>
#include <cmath>

#include "himol/rng.hpp"
#include "transformer.hpp"

namespace himol::seq {
namespace {

std::vector<double> flatten(const Backbone& model, const Prompt& prompt) {
  const auto E = static_cast<std::size_t>(model.embed());
  std::vector<double> flat;
  flat.reserve((prompt.size() + 1) * E);
  for (const auto& e : prompt) {
    if (e.size() != E) throw Error("prompt embedding has the wrong width");
    flat.insert(flat.end(), e.begin(), e.end());
  }
  const auto bos = model.token_embedding(kBos);
  flat.insert(flat.end(), bos.begin(), bos.end());
  return flat;
}

void append_tokens(const Backbone& model, std::span<const int> ids, std::vector<double>& flat) {
  for (int id : ids) {
    const auto row = model.token_embedding(id);
    flat.insert(flat.end(), row.begin(), row.end());
  }
}

void check_length(const Backbone& model, std::size_t positions) {
  if (positions > static_cast<std::size_t>(model.hyper().context)) {
    throw Error("prompt plus target exceeds the model context length");
  }
}

}  // namespace

Prompt make_prompt(const Backbone& model, std::string_view words, std::span<const Embedding> pseudo) {
  Prompt p = model.embed_words(words);
  p.insert(p.end(), pseudo.begin(), pseudo.end());
  return p;
}

PromptLoss prompt_loss(const Backbone& model, const Prompt& prompt, std::string_view target,
                       const LossOptions& options) {
  return prompt_loss(model, prompt, model.vocab().encode_smiles(target), options);
}

PromptLoss prompt_loss(const Backbone& model, const Prompt& prompt, std::span<const int> target,
                       const LossOptions& options) {
  const auto E = static_cast<std::size_t>(model.embed());
  const std::size_t V = model.vocab().size();
  std::vector<double> flat = flatten(model, prompt);
  append_tokens(model, target, flat);
  const std::size_t n = flat.size() / E;
  check_length(model, n);
  detail::Tape tape;
  detail::forward(model, tape, flat, options.head);
  std::vector<int> ys(target.begin(), target.end());
  ys.push_back(kEos);
  std::vector<double> dlogits(n * V, 0.0);
  PromptLoss out;
  out.loss = detail::cross_entropy(model, tape, prompt.size(), ys, dlogits);
  std::vector<double> dinputs(n * E);
  detail::backward(model, tape, dlogits, {dinputs, nullptr, options.head_grad}, options.head);
  for (std::size_t p = 0; p < prompt.size(); ++p) {
    out.grads.emplace_back(dinputs.begin() + static_cast<std::ptrdiff_t>(p * E),
                           dinputs.begin() + static_cast<std::ptrdiff_t>((p + 1) * E));
  }
  return out;
}

double prompt_loss_value(const Backbone& model, const Prompt& prompt, std::span<const int> target,
                         const double* head) {
  std::vector<double> flat = flatten(model, prompt);
  append_tokens(model, target, flat);
  check_length(model, flat.size() / static_cast<std::size_t>(model.embed()));
  detail::Tape tape;
  detail::forward(model, tape, flat, head);
  std::vector<int> ys(target.begin(), target.end());
  ys.push_back(kEos);
  return detail::cross_entropy(model, tape, prompt.size(), ys, {});
}

DecodeResult decode(const Backbone& model, const Prompt& prompt, const DecodeConfig& config, const double* head,
                    const StepObserver& observer) {
  if (!(config.temperature > 0.0) && !config.greedy) throw ConfigError("temperature must be positive");
  const int room = model.hyper().context - static_cast<int>(prompt.size()) - 1;
  if (config.max_len < 1 || config.max_len > room) {
    throw ConfigError("max_len must be in [1, " + std::to_string(room) + "] for this prompt");
  }
  const Vocab& vocab = model.vocab();
  const std::size_t V = vocab.size();
  Rng rng(config.seed);
  detail::Tape tape;
  detail::forward(model, tape, flatten(model, prompt), head);
  DecodeResult out;
  std::vector<double> probs(V);
  for (;;) {
    const double* row = tape.logits.data() + static_cast<std::size_t>(tape.n - 1) * V;
    int pick = -1;
    if (config.greedy) {
      for (std::size_t v = 0; v < V; ++v) {
        if (vocab.emittable(static_cast<int>(v)) && (pick < 0 || row[v] > row[pick])) pick = static_cast<int>(v);
      }
      if (observer) {
        std::fill(probs.begin(), probs.end(), 0.0);
        probs[static_cast<std::size_t>(pick)] = 1.0;
        observer(probs);
      }
    } else {
      double mx = -INFINITY;
      for (std::size_t v = 0; v < V; ++v) {
        if (vocab.emittable(static_cast<int>(v))) mx = std::max(mx, row[v] / config.temperature);
      }
      double z = 0.0;
      for (std::size_t v = 0; v < V; ++v) {
        probs[v] = vocab.emittable(static_cast<int>(v)) ? std::exp(row[v] / config.temperature - mx) : 0.0;
        z += probs[v];
      }
      for (auto& p : probs) p /= z;
      if (observer) observer(probs);
      const double u = rng.uniform();
      double acc = 0.0;
      for (std::size_t v = 0; v < V; ++v) {
        if (probs[v] == 0.0) continue;
        acc += probs[v];
        pick = static_cast<int>(v);
        if (u < acc) break;
      }
    }
    if (pick == kEos) break;
    out.tokens.push_back(pick);
    if (static_cast<int>(out.tokens.size()) == config.max_len) {
      out.truncated = true;
      break;
    }
    detail::forward(model, tape, model.token_embedding(pick), head);
  }
  out.smiles = vocab.decode_smiles(out.tokens);
  return out;
}

std::vector<double> activations(const Backbone& model, std::string_view smiles) {
  const auto ids = model.vocab().encode_smiles(smiles);
  if (ids.empty()) throw UnknownToken("activations need at least one SMILES token");
  const auto E = static_cast<std::size_t>(model.embed());
  const Embedding gen(model.token_embedding(model.vocab().gen()).begin(),
                      model.token_embedding(model.vocab().gen()).end());
  const Prompt prompt = make_prompt(model, kTrainWords, std::span<const Embedding>(&gen, 1));
  std::vector<double> flat = flatten(model, prompt);
  append_tokens(model, ids, flat);
  check_length(model, flat.size() / E);
  detail::Tape tape;
  detail::forward(model, tape, flat);
  std::vector<double> mean(E, 0.0);
  const std::size_t first = prompt.size() + 1;
  for (std::size_t t = first; t < first + ids.size(); ++t) {
    for (std::size_t i = 0; i < E; ++i) mean[i] += tape.z[t * E + i];
  }
  for (auto& v : mean) v /= static_cast<double>(ids.size());
  return mean;
}

ActivationStats activation_stats(std::span<const std::vector<double>> vectors) {
  if (vectors.size() < 2) throw NumericalError("activation statistics need at least two vectors");
  const std::size_t d = vectors[0].size();
  ActivationStats s;
  s.count = vectors.size();
  s.mean.assign(d, 0.0);
  for (const auto& v : vectors) {
    if (v.size() != d) throw NumericalError("activation vectors differ in length");
    for (std::size_t i = 0; i < d; ++i) s.mean[i] += v[i];
  }
  for (auto& m : s.mean) m /= static_cast<double>(s.count);
  s.cov.assign(d * d, 0.0);
  for (const auto& v : vectors) {
    for (std::size_t i = 0; i < d; ++i) {
      const double di = v[i] - s.mean[i];
      for (std::size_t j = i; j < d; ++j) s.cov[i * d + j] += di * (v[j] - s.mean[j]);
    }
  }
  const double inv = 1.0 / static_cast<double>(s.count - 1);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) s.cov[j * d + i] = s.cov[i * d + j] = s.cov[i * d + j] * inv;
  }
  return s;
}

}  // namespace himol::seq
