#pragma once
// Hierarchical textual inversion: a shared token s, K intermediate tokens
// i_k and N per-molecule detail tokens d_n are learned against a frozen
// backbone with the prompt "The molecule is a [s][i_{c_n}][d_n]". Cluster
// assignments c_n (0-based here) pick the intermediate token with the
// lowest loss and are refreshed during the first few epochs only.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "himol/seq/backbone.hpp"
#include "himol/seq/model.hpp"

namespace himol::inversion {

using seq::Embedding;

struct InversionConfig {
  int epochs = 1000;
  int batch = 4;
  double lr = 0.3;
  double clip = 1.0;
  int assign_epochs = 5;
  int k = 10;
  std::uint64_t seed = 0;
  // Also learn a copy of the output head (kept in the state).
  bool update_head = false;
  double head_lr = 1e-3;

  bool operator==(const InversionConfig&) const = default;
};

struct HierarchicalEmbeddings {
  Embedding s;
  std::vector<Embedding> i;  // K rows
  std::vector<Embedding> d;  // N rows
  std::vector<int> c;        // N entries in [0, K)
  std::uint64_t seed = 0;
  std::optional<std::vector<double>> head;  // learned head when update_head

  std::size_t k() const { return i.size(); }
  std::size_t n() const { return d.size(); }
  std::size_t embed() const { return s.size(); }
  const double* head_ptr() const { return head ? head->data() : nullptr; }

  bool operator==(const HierarchicalEmbeddings&) const = default;
};

class KTooLarge : public Error {
 public:
  using Error::Error;
};

class EmptyDataset : public Error {
 public:
  using Error::Error;
};

HierarchicalEmbeddings init(std::span<const std::string> dataset, const seq::Backbone& model,
                            const InversionConfig& config);

// The training prompt for molecule n with intermediate token k.
seq::Prompt training_prompt(const seq::Backbone& model, const HierarchicalEmbeddings& state, std::size_t k,
                            std::size_t n);

// N x K matrix (row-major) of prompt losses; fans out across workers.
std::vector<double> assignment_losses(const HierarchicalEmbeddings& state, const seq::Backbone& model,
                                      std::span<const std::string> dataset);

// argmin over k per molecule, ties toward the smallest k.
std::vector<int> assign_clusters(const HierarchicalEmbeddings& state, const seq::Backbone& model,
                                 std::span<const std::string> dataset);

struct TrainResult {
  HierarchicalEmbeddings state;
  std::vector<double> loss_history;  // mean loss per epoch
  std::vector<std::vector<int>> assignment_history;  // one entry per assignment epoch
  // State and loss matrix right after the last assignment update.
  HierarchicalEmbeddings last_assignment_state;
  std::vector<double> last_assignment_losses;
};

// Throws ConfigError on an out-of-range field.
void validate(const InversionConfig& config);

TrainResult train(std::span<const std::string> dataset, const seq::Backbone& model, const InversionConfig& config);

// Single shared token only ("The molecule is a [s]"): the ablation without
// intermediate and detail tokens. Uses epochs, batch, lr, clip and seed.
struct SharedResult {
  Embedding s;
  std::vector<double> loss_history;
};
SharedResult train_shared(std::span<const std::string> dataset, const seq::Backbone& model,
                          const InversionConfig& config);

std::uint64_t dataset_hash(std::span<const std::string> dataset);

struct EmbeddingCheckpoint {
  HierarchicalEmbeddings state;
  InversionConfig config;
  std::uint64_t dataset_hash = 0;
  // Training molecules (empty or N entries); used for novelty checks.
  std::vector<std::string> dataset;
};

std::vector<std::uint8_t> serialize(const EmbeddingCheckpoint& ckpt);
EmbeddingCheckpoint deserialize_embeddings(std::span<const std::uint8_t> bytes);
void save(const EmbeddingCheckpoint& ckpt, const std::filesystem::path& path);
EmbeddingCheckpoint load_embeddings(const std::filesystem::path& path);

}  // namespace himol::inversion
