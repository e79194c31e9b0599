#include <bit>

#include "himol/kernels.hpp"

namespace himol::kernels::detail {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_scalar(double alpha, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] *= alpha;
}

double sum_squares_scalar(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
  return s;
}

std::uint64_t popcount_scalar(const std::uint64_t* a, std::size_t n) {
  std::uint64_t c = 0;
  for (std::size_t i = 0; i < n; ++i) c += static_cast<std::uint64_t>(std::popcount(a[i]));
  return c;
}

std::uint64_t popcount_and_scalar(const std::uint64_t* a, const std::uint64_t* b, std::size_t n) {
  std::uint64_t c = 0;
  for (std::size_t i = 0; i < n; ++i) c += static_cast<std::uint64_t>(std::popcount(a[i] & b[i]));
  return c;
}

std::uint64_t popcount_or_scalar(const std::uint64_t* a, const std::uint64_t* b, std::size_t n) {
  std::uint64_t c = 0;
  for (std::size_t i = 0; i < n; ++i) c += static_cast<std::uint64_t>(std::popcount(a[i] | b[i]));
  return c;
}

}  // namespace

const Table kScalar{Isa::Scalar,        dot_scalar,          axpy_scalar,        scale_scalar,
                    sum_squares_scalar, popcount_scalar,     popcount_and_scalar, popcount_or_scalar};

}  // namespace himol::kernels::detail
