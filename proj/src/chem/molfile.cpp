#include "himol/chem/molfile.hpp"

#include <fstream>
#include <sstream>

#include "himol/error.hpp"

namespace himol::chem {

std::vector<MolRecord> parse_molecules(std::string_view text, std::string_view source) {
  std::vector<MolRecord> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line_no == 1 && line.starts_with(kMoleculesHeader)) {
      const std::string_view version = line.substr(kMoleculesHeader.size());
      if (version != std::to_string(kMoleculesVersion)) {
        throw FormatError(std::string(source) + ": unsupported molecule file version '" + std::string(version) +
                          "' (expected " + std::to_string(kMoleculesVersion) + ")");
      }
    }
    if (line.empty() || line.front() == '#') {
      if (end == text.size()) break;
      continue;
    }
    MolRecord rec;
    const std::size_t tab = line.find('\t');
    rec.smiles = std::string(line.substr(0, tab));
    if (tab != std::string_view::npos) {
      const std::string_view label = line.substr(tab + 1);
      if (label == "0" || label == "1") {
        rec.label = label[0] - '0';
      } else {
        throw FormatError(std::string(source) + ":" + std::to_string(line_no) + ": label must be 0 or 1");
      }
    }
    if (rec.smiles.empty()) {
      throw FormatError(std::string(source) + ":" + std::to_string(line_no) + ": empty SMILES field");
    }
    out.push_back(std::move(rec));
    if (end == text.size()) break;
  }
  return out;
}

std::vector<MolRecord> read_molecules(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open molecule file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_molecules(ss.str(), path.string());
}

void write_molecules(const std::filesystem::path& path, const std::vector<MolRecord>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << kMoleculesHeader << kMoleculesVersion << '\n';
  for (const auto& r : records) {
    out << r.smiles;
    if (r.label) out << '\t' << *r.label;
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<std::string> smiles_of(const std::vector<MolRecord>& records) {
  std::vector<std::string> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.smiles);
  return out;
}

}  // namespace himol::chem
