#include "himol/chem/lexer.hpp"

#include <cctype>

#include "himol/chem/element.hpp"

namespace himol::chem {
namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Length of an organic-subset atom starting at s[i], 0 if none.
std::size_t organic_atom_length(std::string_view s, std::size_t i) {
  const char c = s[i];
  const char next = i + 1 < s.size() ? s[i + 1] : '\0';
  if (c == 'C' && next == 'l') return 2;
  if (c == 'B' && next == 'r') return 2;
  switch (c) {
    case 'B': case 'C': case 'N': case 'O': case 'P': case 'S': case 'F': case 'I':
    case 'b': case 'c': case 'n': case 'o': case 'p': case 's':
      return 1;
    default:
      return 0;
  }
}

}  // namespace

BracketSpec parse_bracket(std::string_view text) {
  BracketSpec spec;
  if (text.size() < 3 || text.front() != '[' || text.back() != ']') {
    throw LexError(0, "malformed bracket atom");
  }
  std::size_t i = 1;
  const std::size_t end = text.size() - 1;
  auto fail = [&](const char* what) -> void { throw LexError(i, what); };

  while (i < end && is_digit(text[i])) {
    spec.isotope = spec.isotope * 10 + (text[i] - '0');
    if (spec.isotope > 999) fail("isotope too large");
    ++i;
  }
  if (i >= end) fail("missing element symbol");
  // Element: uppercase with optional lowercase, or an aromatic lowercase symbol.
  const char c = text[i];
  if (std::isupper(static_cast<unsigned char>(c))) {
    std::optional<int> z;
    if (i + 1 < end && std::islower(static_cast<unsigned char>(text[i + 1]))) {
      z = atomic_number(text.substr(i, 2));
      if (z) i += 2;
    }
    if (!z) {
      z = atomic_number(text.substr(i, 1));
      if (!z) fail("unknown element");
      ++i;
    }
    spec.atomic_number = *z;
  } else if (c == '*') {
    spec.atomic_number = 0;
    ++i;
  } else {
    std::string sym;
    if (i + 1 < end && (text.substr(i, 2) == "se" || text.substr(i, 2) == "as")) {
      sym = std::string(1, static_cast<char>(std::toupper(text[i]))) + text[i + 1];
      i += 2;
    } else {
      sym = std::string(1, static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
      ++i;
    }
    const auto z = atomic_number(sym);
    if (!z || !can_be_aromatic(*z, true)) fail("unknown aromatic element");
    spec.atomic_number = *z;
    spec.aromatic = true;
  }
  // Chirality marks are accepted and dropped.
  if (i < end && text[i] == '@') {
    ++i;
    if (i < end && text[i] == '@') ++i;
    if (i + 1 < end && std::isupper(static_cast<unsigned char>(text[i])) &&
        std::isupper(static_cast<unsigned char>(text[i + 1]))) {
      i += 2;  // @TH1, @SP2, ...
      while (i < end && is_digit(text[i])) ++i;
    }
  }
  if (i < end && text[i] == 'H') {
    ++i;
    spec.hydrogens = 1;
    if (i < end && is_digit(text[i])) {
      spec.hydrogens = text[i] - '0';
      ++i;
    }
  }
  if (i < end && (text[i] == '+' || text[i] == '-')) {
    const char sign = text[i];
    const int unit = sign == '+' ? 1 : -1;
    ++i;
    int magnitude = 1;
    if (i < end && is_digit(text[i])) {
      magnitude = text[i] - '0';
      ++i;
      if (i < end && is_digit(text[i])) {
        magnitude = magnitude * 10 + (text[i] - '0');
        ++i;
      }
    } else {
      while (i < end && text[i] == sign) {
        ++magnitude;
        ++i;
      }
    }
    if (magnitude > 15) fail("charge out of range");
    spec.charge = unit * magnitude;
  }
  if (i < end && text[i] == ':') {
    ++i;
    if (i >= end || !is_digit(text[i])) fail("missing atom class");
    while (i < end && is_digit(text[i])) ++i;
  }
  if (i != end) fail("unexpected character in bracket atom");
  return spec;
}

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto push = [&](TokenKind kind, std::size_t len) {
    out.push_back(Token{kind, std::string(s.substr(i, len)), i});
    i += len;
  };
  while (i < s.size()) {
    const char c = s[i];
    if (const std::size_t len = organic_atom_length(s, i)) {
      push(TokenKind::Atom, len);
      continue;
    }
    switch (c) {
      case '[': {
        const std::size_t close = s.find(']', i);
        if (close == std::string_view::npos) throw LexError(i, "unterminated bracket atom");
        const std::size_t open = s.find('[', i + 1);
        if (open != std::string_view::npos && open < close) throw LexError(open, "nested bracket");
        try {
          parse_bracket(s.substr(i, close - i + 1));
        } catch (const LexError& e) {
          throw LexError(i + e.offset(), "invalid bracket atom");
        }
        push(TokenKind::BracketAtom, close - i + 1);
        break;
      }
      case '-': case '=': case '#': case ':': case '/': case '\\':
        push(TokenKind::Bond, 1);
        break;
      case '(':
        push(TokenKind::BranchOpen, 1);
        break;
      case ')':
        push(TokenKind::BranchClose, 1);
        break;
      case '.':
        push(TokenKind::Dot, 1);
        break;
      case '%':
        if (i + 2 < s.size() && is_digit(s[i + 1]) && is_digit(s[i + 2])) {
          push(TokenKind::RingClosure, 3);
        } else {
          throw LexError(i, "'%' must be followed by two digits");
        }
        break;
      default:
        if (is_digit(c)) {
          push(TokenKind::RingClosure, 1);
        } else {
          throw LexError(i, std::string("unrecognized character '") + c + "'");
        }
    }
  }
  return out;
}

int ring_number(const Token& token) {
  if (token.text.size() == 3) return (token.text[1] - '0') * 10 + (token.text[2] - '0');
  return token.text[0] - '0';
}

std::string join(std::span<const Token> tokens) {
  std::string s;
  for (const auto& t : tokens) s += t.text;
  return s;
}

}  // namespace himol::chem
