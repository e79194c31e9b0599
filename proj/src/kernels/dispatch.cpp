#include <cstdlib>
#include <stdexcept>
#include <string>

#include "himol/kernels.hpp"

namespace himol::kernels {

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

bool supported(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const Table& table_for(Isa isa) {
  if (!supported(isa)) {
    throw std::invalid_argument("kernel ISA not available: " + std::string(isa_name(isa)));
  }
  switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::Avx2: return detail::kAvx2;
#endif
#if defined(__aarch64__)
    case Isa::Neon: return detail::kNeon;
#endif
    default: return detail::kScalar;
  }
}

namespace {

const Table& select() {
  if (const char* env = std::getenv("HIMOL_SIMD"); env && std::string_view(env) == "scalar") {
    return detail::kScalar;
  }
  if (supported(Isa::Avx2)) return table_for(Isa::Avx2);
  if (supported(Isa::Neon)) return table_for(Isa::Neon);
  return detail::kScalar;
}

}  // namespace

const Table& active() {
  static const Table& chosen = select();
  return chosen;
}

}  // namespace himol::kernels
