// Built with -mavx2 -mfma; only reached after a cpuid check.
#include <immintrin.h>

#include "himol/kernels.hpp"

namespace himol::kernels::detail {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_avx2(double alpha, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(y + i, _mm256_mul_pd(va, _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] *= alpha;
}

double sum_squares_avx2(const double* x, std::size_t n) { return dot_avx2(x, x, n); }

// Nibble-lookup popcount (Mula et al.), summed with SAD against zero.
inline __m256i popcount_bytes(__m256i v) {
  const __m256i lut = _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4,
                                       0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4);
  const __m256i low_mask = _mm256_set1_epi8(0x0f);
  __m256i lo = _mm256_and_si256(v, low_mask);
  __m256i hi = _mm256_and_si256(_mm256_srli_epi16(v, 4), low_mask);
  return _mm256_add_epi8(_mm256_shuffle_epi8(lut, lo), _mm256_shuffle_epi8(lut, hi));
}

inline std::uint64_t reduce_counts(__m256i acc) {
  alignas(32) std::uint64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
  return lanes[0] + lanes[1] + lanes[2] + lanes[3];
}

template <typename VecOp, typename WordOp>
std::uint64_t popcount_combined(const std::uint64_t* a, const std::uint64_t* b, std::size_t n,
                                VecOp vec_op, WordOp word_op) {
  __m256i acc = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    acc = _mm256_add_epi64(acc, _mm256_sad_epu8(popcount_bytes(vec_op(va, vb)), _mm256_setzero_si256()));
  }
  std::uint64_t c = reduce_counts(acc);
  for (; i < n; ++i) c += static_cast<std::uint64_t>(__builtin_popcountll(word_op(a[i], b[i])));
  return c;
}

std::uint64_t popcount_avx2(const std::uint64_t* a, std::size_t n) {
  return popcount_combined(
      a, a, n, [](__m256i x, __m256i) { return x; }, [](std::uint64_t x, std::uint64_t) { return x; });
}

std::uint64_t popcount_and_avx2(const std::uint64_t* a, const std::uint64_t* b, std::size_t n) {
  return popcount_combined(
      a, b, n, [](__m256i x, __m256i y) { return _mm256_and_si256(x, y); },
      [](std::uint64_t x, std::uint64_t y) { return x & y; });
}

std::uint64_t popcount_or_avx2(const std::uint64_t* a, const std::uint64_t* b, std::size_t n) {
  return popcount_combined(
      a, b, n, [](__m256i x, __m256i y) { return _mm256_or_si256(x, y); },
      [](std::uint64_t x, std::uint64_t y) { return x | y; });
}

}  // namespace

const Table kAvx2{Isa::Avx2,       dot_avx2,        axpy_avx2,         scale_avx2,
                  sum_squares_avx2, popcount_avx2,  popcount_and_avx2, popcount_or_avx2};

}  // namespace himol::kernels::detail
