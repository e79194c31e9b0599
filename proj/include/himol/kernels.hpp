#pragma once
// Dense inner-loop kernels. Every routine has a scalar reference; vector
// variants (AVX2+FMA on x86-64, NEON on aarch64) are picked once at startup.
// HIMOL_SIMD=scalar in the environment forces the reference path.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace himol::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa);

struct Table {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y = alpha * y
  void (*scale)(double alpha, double* y, std::size_t n);
  double (*sum_squares)(const double* x, std::size_t n);
  std::uint64_t (*popcount)(const std::uint64_t* a, std::size_t n);
  std::uint64_t (*popcount_and)(const std::uint64_t* a, const std::uint64_t* b, std::size_t n);
  std::uint64_t (*popcount_or)(const std::uint64_t* a, const std::uint64_t* b, std::size_t n);
};

bool supported(Isa isa);
// Throws std::invalid_argument if the ISA is not compiled in or not supported by this CPU.
const Table& table_for(Isa isa);
const Table& active();

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}
inline void scale(double alpha, std::span<double> y) { active().scale(alpha, y.data(), y.size()); }
inline double sum_squares(std::span<const double> x) { return active().sum_squares(x.data(), x.size()); }

namespace detail {
extern const Table kScalar;
#if defined(__x86_64__) || defined(_M_X64)
extern const Table kAvx2;
#endif
#if defined(__aarch64__)
extern const Table kNeon;
#endif
}  // namespace detail

}  // namespace himol::kernels
