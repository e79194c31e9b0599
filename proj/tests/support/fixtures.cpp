#include "fixtures.hpp"

#include "himol/seq/pretrain.hpp"
#include "toydata.hpp"

namespace himol::testing {

const seq::Backbone& small_backbone() {
  static const seq::Backbone model = [] {
    const auto data = corpus(Family::Mixed, 60, 21);
    seq::PretrainConfig cfg;
    cfg.hyper = {32, 2, 4, 64, 64};
    cfg.epochs = 4;
    cfg.lr = 2e-3;
    return seq::pretrain(data, cfg).model;
  }();
  return model;
}

std::vector<std::string> small_dataset(std::size_t n) { return corpus(Family::Acyclic, n, 8); }

const inversion::HierarchicalEmbeddings& small_state() {
  static const inversion::HierarchicalEmbeddings state = [] {
    inversion::InversionConfig cfg;
    cfg.k = 3;
    cfg.epochs = 6;
    cfg.assign_epochs = 2;
    cfg.seed = 2;
    return inversion::train(small_dataset(8), small_backbone(), cfg).state;
  }();
  return state;
}

}  // namespace himol::testing
