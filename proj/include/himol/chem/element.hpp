#pragma once
#include <array>
#include <optional>
#include <string_view>

namespace himol::chem {

// Atomic number for a capitalized symbol ("C", "Cl", "Se"); nullopt if unknown.
std::optional<int> atomic_number(std::string_view symbol);
std::string_view element_symbol(int atomic_number);

// Elements that may appear outside brackets (B C N O P S F Cl Br I).
bool in_organic_subset(int atomic_number);
// Elements that may be written lowercase (aromatic): b c n o p s, plus se/as in brackets.
bool can_be_aromatic(int atomic_number, bool bracket);

struct Valences {
  std::array<int, 3> values{};
  int count = 0;

  const int* begin() const { return values.data(); }
  const int* end() const { return values.data() + count; }
  bool empty() const { return count == 0; }
  int max() const { return count ? values[static_cast<std::size_t>(count - 1)] : -1; }
  bool contains(int v) const;
};

// Allowed valences in ascending order for an element with a formal charge.
// Empty when the element has no entry in the valence table.
Valences allowed_valences(int atomic_number, int charge);

}  // namespace himol::chem
