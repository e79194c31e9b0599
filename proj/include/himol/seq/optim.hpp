#pragma once
// AdamW with decoupled weight decay and global-norm clipping.

#include <cstddef>
#include <span>
#include <vector>

namespace himol::seq {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

class AdamW {
 public:
  AdamW(std::size_t size, AdamWConfig config) : config_(config), m_(size, 0.0), v_(size, 0.0) {}
  void step(std::span<double> params, std::span<const double> grads, double lr);
  std::size_t steps() const { return t_; }

 private:
  AdamWConfig config_;
  std::vector<double> m_, v_;
  std::size_t t_ = 0;
};

// Scales grads so their L2 norm is at most max_norm; returns the norm before scaling.
double clip_grad_norm(std::span<double> grads, double max_norm);

// Linear decay from lr to 0 over total steps (step counted from 0).
double linear_decay(double lr, std::size_t step, std::size_t total);

}  // namespace himol::seq
