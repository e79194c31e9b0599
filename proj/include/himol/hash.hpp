#pragma once
#include <cstdint>
#include <string_view>

namespace himol {

// FNV-1a, 64 bit. Stable across platforms; used for content hashes and
// feature hashing where std::hash would not be reproducible.
inline std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) {
  return seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 12) + (seed >> 4));
}

}  // namespace himol
