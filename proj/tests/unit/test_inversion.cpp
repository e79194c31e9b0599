#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "himol/binio.hpp"
#include "himol/inversion.hpp"
#include "fixtures.hpp"

using namespace himol;
using namespace himol::inversion;

using testing::small_backbone;

namespace {

std::vector<std::string> toy_set(std::size_t n) { return testing::small_dataset(n); }

}  // namespace

TEST_CASE("init: shapes, distinct intermediates, preconditions, determinism") {
  const auto& m = small_backbone();
  const auto data = toy_set(30);
  InversionConfig cfg;
  cfg.k = 10;
  const auto st = init(data, m, cfg);
  CHECK(st.k() == 10);
  CHECK(st.n() == 30);
  CHECK(st.embed() == 32);
  for (std::size_t a = 0; a < st.k(); ++a) {
    for (std::size_t b = a + 1; b < st.k(); ++b) CHECK(st.i[a] != st.i[b]);
  }
  for (int c : st.c) CHECK((c >= 0 && c < 10));
  CHECK(init(data, m, cfg) == st);
  cfg.k = 30;
  CHECK_THROWS_AS(init(data, m, cfg), KTooLarge);
  CHECK_THROWS_AS(init(std::vector<std::string>{}, m, cfg), EmptyDataset);
  cfg.k = 2;
  CHECK_THROWS_AS(init(std::vector<std::string>{"CCO", "CC", "[Fe]"}, m, cfg), seq::UnknownToken);
}

TEST_CASE("assign_clusters: single cluster, tie rule, argmin") {
  const auto& m = small_backbone();
  const auto data = toy_set(8);
  InversionConfig cfg;
  cfg.k = 1;
  auto st = init(data, m, cfg);
  CHECK(assign_clusters(st, m, data) == std::vector<int>(8, 0));
  cfg.k = 3;
  st = init(data, m, cfg);
  st.i[1] = st.i[0];
  st.i[2] = st.i[0];
  CHECK(assign_clusters(st, m, data) == std::vector<int>(8, 0));
  st = init(data, m, cfg);
  const auto losses = assignment_losses(st, m, data);
  REQUIRE(losses.size() == 24);
  const auto c = assign_clusters(st, m, data);
  for (std::size_t n = 0; n < 8; ++n) {
    for (std::size_t k = 0; k < 3; ++k) CHECK(losses[n * 3 + static_cast<std::size_t>(c[n])] <= losses[n * 3 + k]);
  }
}

TEST_CASE("train: loss decreases, backbone untouched, assignment optimal at freeze, deterministic") {
  const auto& m = small_backbone();
  const auto before = seq::serialize(m);
  const auto data = toy_set(8);
  InversionConfig cfg;
  cfg.k = 3;
  cfg.epochs = 12;
  cfg.assign_epochs = 3;
  cfg.seed = 4;
  const auto r = train(data, m, cfg);
  CHECK(seq::serialize(m) == before);
  REQUIRE(r.loss_history.size() == 12);
  CHECK(r.loss_history.back() < r.loss_history.front());
  for (double l : r.loss_history) CHECK(std::isfinite(l));
  CHECK(r.assignment_history.size() == 3);
  CHECK(r.state.c == r.assignment_history.back());
  // Independent recomputation through the gradient path.
  const auto& snap = r.last_assignment_state;
  for (std::size_t n = 0; n < snap.n(); ++n) {
    const double own = seq::prompt_loss(m, training_prompt(m, snap, static_cast<std::size_t>(snap.c[n]), n), data[n]).loss;
    for (std::size_t k = 0; k < snap.k(); ++k) {
      CHECK(own <= seq::prompt_loss(m, training_prompt(m, snap, k, n), data[n]).loss + 1e-9);
    }
  }
  const auto again = train(data, m, cfg);
  CHECK(again.state == r.state);
  CHECK(again.loss_history == r.loss_history);
}

TEST_CASE("train: intermediate tokens of empty clusters keep their initial values") {
  const auto& m = small_backbone();
  const auto data = toy_set(6);
  InversionConfig cfg;
  cfg.k = 5;
  cfg.epochs = 4;
  cfg.assign_epochs = 4;
  const auto start = init(data, m, cfg);
  const auto r = train(data, m, cfg);
  std::vector<bool> used(cfg.k, false);
  for (const auto& h : r.assignment_history) {
    for (int c : h) used[static_cast<std::size_t>(c)] = true;
  }
  for (std::size_t k = 0; k < used.size(); ++k) {
    if (!used[k]) CHECK(r.state.i[k] == start.i[k]);
    if (used[k]) CHECK(r.state.i[k] != start.i[k]);
  }
}

TEST_CASE("train: head update switch keeps the head in the state") {
  const auto& m = small_backbone();
  const auto before = seq::serialize(m);
  const auto data = toy_set(5);
  InversionConfig cfg;
  cfg.k = 2;
  cfg.epochs = 3;
  cfg.assign_epochs = 1;
  cfg.update_head = true;
  const auto r = train(data, m, cfg);
  REQUIRE(r.state.head.has_value());
  CHECK(*r.state.head != std::vector<double>(m.head().begin(), m.head().end()));
  CHECK(seq::serialize(m) == before);
}

TEST_CASE("train_shared: single token, loss decreases, shared init, deterministic") {
  const auto& m = small_backbone();
  const auto before = seq::serialize(m);
  const auto data = toy_set(6);
  InversionConfig cfg;
  cfg.epochs = 10;
  cfg.seed = 9;
  const auto r = train_shared(data, m, cfg);
  CHECK(r.s.size() == static_cast<std::size_t>(m.embed()));
  REQUIRE(r.loss_history.size() == 10);
  CHECK(r.loss_history.back() < r.loss_history.front());
  CHECK(seq::serialize(m) == before);
  const auto again = train_shared(data, m, cfg);
  CHECK(again.s == r.s);
  CHECK(again.loss_history == r.loss_history);
  CHECK_THROWS_AS(train_shared(std::vector<std::string>{}, m, cfg), EmptyDataset);
  cfg.epochs = 0;
  CHECK_THROWS_AS(train_shared(data, m, cfg), ConfigError);
}

TEST_CASE("train: a repeated molecule decodes identically from every detail token") {
  const auto& m = small_backbone();
  const std::vector<std::string> data(5, "CCCO");
  InversionConfig cfg;
  cfg.k = 2;
  cfg.epochs = 40;
  cfg.assign_epochs = 2;
  const auto r = train(data, m, cfg);
  seq::DecodeConfig dc;
  dc.greedy = true;
  dc.max_len = 20;
  const auto first = seq::decode(m, training_prompt(m, r.state, static_cast<std::size_t>(r.state.c[0]), 0), dc);
  CHECK(r.loss_history.back() < r.loss_history.front());
  for (std::size_t n = 1; n < r.state.n(); ++n) {
    CHECK(seq::decode(m, training_prompt(m, r.state, static_cast<std::size_t>(r.state.c[n]), n), dc).smiles ==
          first.smiles);
  }
}

TEST_CASE("embedding checkpoint round trip") {
  const auto& m = small_backbone();
  const auto data = toy_set(6);
  InversionConfig cfg;
  cfg.k = 2;
  cfg.update_head = true;
  EmbeddingCheckpoint ck{init(data, m, cfg), cfg, dataset_hash(data), data};
  const auto path = std::filesystem::temp_directory_path() / "himol_test_emb.ckpt";
  save(ck, path);
  const auto back = load_embeddings(path);
  CHECK(back.state == ck.state);
  CHECK(back.config == ck.config);
  CHECK(back.dataset_hash == ck.dataset_hash);
  CHECK(back.dataset == data);
  auto tampered = ck;
  tampered.dataset[0] = "CCCCCCCCCC";
  CHECK_THROWS_AS(deserialize_embeddings(serialize(tampered)), FormatError);
  auto bytes = binio::read_file(path);
  bytes[20] ^= 1;
  CHECK_THROWS_AS(deserialize_embeddings(bytes), FormatError);
  CHECK_THROWS_AS(seq::deserialize(binio::read_file(path)), FormatError);
  std::filesystem::remove(path);
  CHECK(dataset_hash(data) != dataset_hash(toy_set(7)));
}
