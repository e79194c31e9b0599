#pragma once
// Molecule list files: one SMILES per line, optional tab-separated 0/1
// label, '#' comment lines and blank lines ignored. Written files start with
// a "#himol-molecules <version>" line; readers reject other versions.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace himol::chem {

inline constexpr std::string_view kMoleculesHeader = "#himol-molecules ";
inline constexpr int kMoleculesVersion = 1;

struct MolRecord {
  std::string smiles;
  std::optional<int> label;

  bool operator==(const MolRecord&) const = default;
};

std::vector<MolRecord> read_molecules(const std::filesystem::path& path);
std::vector<MolRecord> parse_molecules(std::string_view text, std::string_view source = "<memory>");
void write_molecules(const std::filesystem::path& path, const std::vector<MolRecord>& records);
std::vector<std::string> smiles_of(const std::vector<MolRecord>& records);

}  // namespace himol::chem
