#include <arm_neon.h>

#include "himol/kernels.hpp"

namespace himol::kernels::detail {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_neon(double alpha, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vmulq_f64(va, vld1q_f64(y + i)));
  for (; i < n; ++i) y[i] *= alpha;
}

double sum_squares_neon(const double* x, std::size_t n) { return dot_neon(x, x, n); }

inline std::uint64_t count_u64x2(uint64x2_t v) {
  return vaddlvq_u8(vcntq_u8(vreinterpretq_u8_u64(v)));
}

std::uint64_t popcount_neon(const std::uint64_t* a, std::size_t n) {
  std::uint64_t c = 0;
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) c += count_u64x2(vld1q_u64(a + i));
  for (; i < n; ++i) c += static_cast<std::uint64_t>(__builtin_popcountll(a[i]));
  return c;
}

std::uint64_t popcount_and_neon(const std::uint64_t* a, const std::uint64_t* b, std::size_t n) {
  std::uint64_t c = 0;
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) c += count_u64x2(vandq_u64(vld1q_u64(a + i), vld1q_u64(b + i)));
  for (; i < n; ++i) c += static_cast<std::uint64_t>(__builtin_popcountll(a[i] & b[i]));
  return c;
}

std::uint64_t popcount_or_neon(const std::uint64_t* a, const std::uint64_t* b, std::size_t n) {
  std::uint64_t c = 0;
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) c += count_u64x2(vorrq_u64(vld1q_u64(a + i), vld1q_u64(b + i)));
  for (; i < n; ++i) c += static_cast<std::uint64_t>(__builtin_popcountll(a[i] | b[i]));
  return c;
}

}  // namespace

const Table kNeon{Isa::Neon,        dot_neon,      axpy_neon,         scale_neon,
                  sum_squares_neon, popcount_neon, popcount_and_neon, popcount_or_neon};

}  // namespace himol::kernels::detail
