#pragma once
#include <string>
#include <string_view>
#include <vector>

#include "himol/chem/lexer.hpp"
#include "himol/chem/molgraph.hpp"

namespace himol::chem {

// Shared defect taxonomy: the parser rejects a string iff one of these is
// present, and the repair rules target the first five.
enum class DefectKind {
  UnmatchedBranchClose,
  UnclosedBranch,
  UnclosedRing,
  ValenceViolation,
  RingTooSmall,
  DuplicateBond,
  Aromaticity,
  UnknownElement,
  Syntax,
  Empty,
};

std::string_view defect_name(DefectKind kind);

struct Defect {
  DefectKind kind;
  int token = -1;  // offending token index, -1 if not token-specific
  int atom = -1;   // graph atom index when relevant

  bool operator==(const Defect&) const = default;
};

// Tolerant reading of a token stream: every defect is recorded and skipped
// so that later passes can still see the partial molecule.
struct Structure {
  std::vector<Token> tokens;
  MolGraph graph;
  std::vector<int> atom_token;  // graph atom -> token index
  std::vector<int> token_atom;  // token index -> graph atom or -1
  std::vector<Defect> defects;

  bool ok() const { return defects.empty(); }
  // Highest-priority defect (taxonomy order, then position).
  const Defect* first_defect() const;
};

Structure analyze(std::vector<Token> tokens);
Structure analyze(std::string_view smiles);  // LexError propagates

class ParseError : public Error {
 public:
  ParseError(DefectKind kind, std::size_t offset, int atom, const std::string& what)
      : Error(what), kind_(kind), offset_(offset), atom_(atom) {}
  DefectKind kind() const { return kind_; }
  std::size_t offset() const { return offset_; }
  int atom() const { return atom_; }

 private:
  DefectKind kind_;
  std::size_t offset_;
  int atom_;
};

// Throws LexError or ParseError.
MolGraph parse(std::string_view smiles);
bool is_valid(std::string_view smiles) noexcept;

}  // namespace himol::chem
