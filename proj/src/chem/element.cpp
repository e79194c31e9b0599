#include "himol/chem/element.hpp"

#include <algorithm>

namespace himol::chem {
namespace {

constexpr std::array<std::string_view, 119> kSymbols{
    "*",  "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg", "Al", "Si",
    "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",  "Cr", "Mn", "Fe", "Co", "Ni", "Cu",
    "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru",
    "Rh", "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr",
    "Nd", "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W",
    "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac",
    "Th", "Pa", "U",  "Np", "Pu", "Am", "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf",
    "Db", "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og"};

struct Entry {
  int z;
  std::array<int, 3> base;
  int count;
  bool charge_adds;  // valence moves with the sign of the charge (N, O, P, S, ...)
};

// Neutral valences. Charged forms: charge_adds elements shift by +charge,
// the rest lose |charge|.
constexpr std::array<Entry, 19> kValenceTable{{
    {1, {1, 0, 0}, 1, false},   // H
    {3, {1, 0, 0}, 1, false},   // Li
    {5, {3, 0, 0}, 1, false},   // B
    {6, {4, 0, 0}, 1, false},   // C
    {7, {3, 0, 0}, 1, true},    // N
    {8, {2, 0, 0}, 1, true},    // O
    {9, {1, 0, 0}, 1, false},   // F
    {11, {1, 0, 0}, 1, false},  // Na
    {12, {2, 0, 0}, 1, false},  // Mg
    {13, {3, 0, 0}, 1, false},  // Al
    {14, {4, 0, 0}, 1, false},  // Si
    {15, {3, 5, 0}, 2, true},   // P
    {16, {2, 4, 6}, 3, true},   // S
    {17, {1, 0, 0}, 1, false},  // Cl
    {19, {1, 0, 0}, 1, false},  // K
    {20, {2, 0, 0}, 1, false},  // Ca
    {30, {2, 0, 0}, 1, false},  // Zn
    {33, {3, 5, 0}, 2, true},   // As
    {34, {2, 4, 6}, 3, true},   // Se
}};

}  // namespace

bool Valences::contains(int v) const { return std::find(begin(), end(), v) != end(); }

std::optional<int> atomic_number(std::string_view symbol) {
  for (std::size_t z = 1; z < kSymbols.size(); ++z) {
    if (kSymbols[z] == symbol) return static_cast<int>(z);
  }
  return std::nullopt;
}

std::string_view element_symbol(int z) {
  if (z < 0 || z >= static_cast<int>(kSymbols.size())) return "?";
  return kSymbols[static_cast<std::size_t>(z)];
}

bool in_organic_subset(int z) {
  switch (z) {
    case 5: case 6: case 7: case 8: case 9: case 15: case 16: case 17: case 35: case 53:
      return true;
    default:
      return false;
  }
}

bool can_be_aromatic(int z, bool bracket) {
  switch (z) {
    case 5: case 6: case 7: case 8: case 15: case 16:
      return true;
    case 33: case 34:
      return bracket;
    default:
      return false;
  }
}

Valences allowed_valences(int z, int charge) {
  Valences out;
  if (z == 35 || z == 53) z = 17;  // Br, I behave like Cl
  const auto it = std::find_if(kValenceTable.begin(), kValenceTable.end(),
                               [z](const Entry& e) { return e.z == z; });
  if (it == kValenceTable.end()) return out;
  for (int i = 0; i < it->count; ++i) {
    const int base = it->base[static_cast<std::size_t>(i)];
    const int v = it->charge_adds ? base + charge : base - (charge < 0 ? -charge : charge);
    if (v >= 0 && (out.count == 0 || v > out.values[static_cast<std::size_t>(out.count - 1)])) {
      out.values[static_cast<std::size_t>(out.count++)] = v;
    }
  }
  return out;
}

}  // namespace himol::chem
