#include "himol/seq/pretrain.hpp"

#include <cmath>

#include "himol/chem/smiles.hpp"
#include "himol/parallel.hpp"
#include "himol/rng.hpp"
#include "himol/seq/model.hpp"
#include "himol/seq/optim.hpp"
#include "transformer.hpp"

namespace himol::seq {
namespace {

// Loss of one example; accumulates parameter grads (including the embedding
// rows of every input token) into grad.
double example_grad(const Backbone& model, std::span<const int> input_ids, std::size_t first,
                    std::span<const int> targets, std::vector<double>& grad) {
  const auto E = static_cast<std::size_t>(model.embed());
  const std::size_t V = model.vocab().size();
  const std::size_t n = input_ids.size();
  std::vector<double> flat;
  flat.reserve(n * E);
  for (int id : input_ids) {
    const auto row = model.token_embedding(id);
    flat.insert(flat.end(), row.begin(), row.end());
  }
  detail::Tape tape;
  detail::forward(model, tape, flat);
  std::vector<double> dlogits(n * V, 0.0);
  const double loss = detail::cross_entropy(model, tape, first, targets, dlogits);
  std::vector<double> dinputs(n * E);
  detail::backward(model, tape, dlogits, {dinputs, grad.data(), nullptr});
  const std::size_t tok = model.layout().tok_emb;
  for (std::size_t t = 0; t < n; ++t) {
    double* row = grad.data() + tok + static_cast<std::size_t>(input_ids[t]) * E;
    for (std::size_t i = 0; i < E; ++i) row[i] += dinputs[t * E + i];
  }
  return loss;
}

}  // namespace

PretrainResult pretrain(std::span<const std::string> corpus, const PretrainConfig& config) {
  if (corpus.empty()) throw EmptyCorpus("pretraining corpus is empty");
  if (config.epochs < 1 || config.batch < 1) throw ConfigError("epochs and batch must be positive");
  for (const auto& s : corpus) {
    chem::parse(s);
  }
  Vocab vocab = Vocab::build(corpus);
  Backbone model(vocab, config.hyper, derive_seed(config.seed, 0));
  const std::vector<std::vector<int>> words = {vocab.encode_words(kTrainWords), vocab.encode_words(kSampleWords)};
  std::vector<std::vector<int>> encoded;
  for (const auto& s : corpus) encoded.push_back(vocab.encode_smiles(s));

  const std::size_t P = model.params().size();
  AdamW opt(P, {0.9, 0.999, 1e-8, config.weight_decay});
  Rng rng(derive_seed(config.seed, 1));
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const auto B = static_cast<std::size_t>(config.batch);

  PretrainResult result{model, {}};
  Backbone& m = result.model;
  std::vector<double> grad(P);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += B) {
      const std::size_t count = std::min(B, order.size() - start);
      // Prompt shape per example, drawn serially for determinism.
      std::vector<std::pair<std::size_t, std::size_t>> shape(count);
      for (auto& [w, r] : shape) {
        w = config.prompt_variants ? rng.index(2) : 0;
        r = config.prompt_variants && rng.index(2) == 1 ? 3 : 1;
      }
      std::vector<std::vector<double>> slot(count, std::vector<double>(P, 0.0));
      std::vector<double> losses(count);
      parallel_for(count, [&](std::size_t b) {
        const auto& ys = encoded[order[start + b]];
        std::vector<int> ids = words[shape[b].first];
        ids.insert(ids.end(), shape[b].second, vocab.gen());
        const std::size_t first = ids.size();
        ids.push_back(kBos);
        ids.insert(ids.end(), ys.begin(), ys.end());
        if (ids.size() > static_cast<std::size_t>(m.hyper().context)) {
          throw ConfigError("corpus molecule is longer than the model context");
        }
        std::vector<int> targets = ys;
        targets.push_back(kEos);
        losses[b] = example_grad(m, ids, first, targets, slot[b]);
      });
      std::fill(grad.begin(), grad.end(), 0.0);
      double batch_loss = 0.0;
      for (std::size_t b = 0; b < count; ++b) {
        batch_loss += losses[b];
        for (std::size_t i = 0; i < P; ++i) grad[i] += slot[b][i];
      }
      if (!std::isfinite(batch_loss)) throw DivergedLoss("pretraining loss is not finite");
      for (auto& g : grad) g /= static_cast<double>(count);
      clip_grad_norm(grad, config.clip);
      opt.step(m.mutable_params(), grad, config.lr);
      epoch_loss += batch_loss;
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(order.size()));
  }
  m.freeze();
  return result;
}

}  // namespace himol::seq
