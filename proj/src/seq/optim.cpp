#include "himol/seq/optim.hpp"

#include <cmath>

#include "himol/error.hpp"
#include "himol/kernels.hpp"

namespace himol::seq {

void AdamW::step(std::span<double> params, std::span<const double> grads, double lr) {
  if (params.size() != m_.size() || grads.size() != m_.size()) throw Error("optimizer size mismatch");
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * grads[i];
    v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * grads[i] * grads[i];
    const double mhat = m_[i] / c1;
    const double vhat = v_[i] / c2;
    params[i] -= lr * (mhat / (std::sqrt(vhat) + config_.eps) + config_.weight_decay * params[i]);
  }
}

double clip_grad_norm(std::span<double> grads, double max_norm) {
  const double norm = std::sqrt(kernels::sum_squares(grads));
  if (!std::isfinite(norm)) throw DivergedLoss("non-finite gradient norm");
  if (max_norm > 0.0 && norm > max_norm) kernels::scale(max_norm / norm, grads);
  return norm;
}

double linear_decay(double lr, std::size_t step, std::size_t total) {
  if (total == 0) return lr;
  return lr * (1.0 - static_cast<double>(step) / static_cast<double>(total));
}

}  // namespace himol::seq
