#pragma once
// Forward pass with a recorded tape, and the matching reverse pass. Positions
// are appended one at a time so full-sequence scoring and incremental
// decoding run the same code.

#include <span>
#include <vector>

#include "himol/seq/backbone.hpp"

namespace himol::seq::detail {

struct LayerTape {
  std::vector<double> x, a, qkv, o, h, m, u, g;
  std::vector<double> mu1, rs1, mu2, rs2;
  std::vector<std::vector<double>> p;  // attention weights, index t * heads + head
};

struct Tape {
  int n = 0;
  std::vector<LayerTape> layers;
  std::vector<double> xf, z, muf, rsf, logits;
};

// Appends inputs.size() / E positions. `head` overrides the output head
// (head_w followed by head_b); null uses the backbone's own.
void forward(const Backbone& model, Tape& tape, std::span<const double> inputs, const double* head = nullptr);

struct Grads {
  std::span<double> inputs;  // n x E, overwritten
  double* params = nullptr;  // accumulates into Layout-shaped buffer when set
  double* head = nullptr;    // accumulates output-head grads when set
};

// dlogits is n x V. Positions with an all-zero row skip the head.
void backward(const Backbone& model, const Tape& tape, std::span<const double> dlogits, Grads grads,
              const double* head = nullptr);

}  // namespace himol::seq::detail

namespace himol::seq::detail {

// Mean cross-entropy of targets[j] predicted at position first + j. When
// dlogits (n x V) is non-empty its rows for those positions receive the
// gradient of the mean; other rows are left untouched.
double cross_entropy(const Backbone& model, const Tape& tape, std::size_t first, std::span<const int> targets,
                     std::span<double> dlogits);

}  // namespace himol::seq::detail
