#pragma once
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "himol/error.hpp"

namespace himol::chem {

enum class TokenKind { Atom, BracketAtom, Bond, RingClosure, BranchOpen, BranchClose, Dot };

struct Token {
  TokenKind kind;
  std::string text;
  std::size_t offset = 0;  // byte offset into the lexed string

  bool operator==(const Token&) const = default;
};

class LexError : public Error {
 public:
  LexError(std::size_t offset, const std::string& what)
      : Error("lex error at offset " + std::to_string(offset) + ": " + what), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Contents of a bracket atom such as "[13CH3+]" or "[nH]".
struct BracketSpec {
  int isotope = 0;
  int atomic_number = 0;
  bool aromatic = false;
  int hydrogens = 0;
  int charge = 0;
};

std::vector<Token> lex(std::string_view smiles);
// Throws LexError (offset relative to `text`) on malformed contents.
BracketSpec parse_bracket(std::string_view text);
// Ring number of a RingClosure token ("3" -> 3, "%12" -> 12).
int ring_number(const Token& token);
std::string join(std::span<const Token> tokens);

}  // namespace himol::chem
