#include "doctest.h"
#include "himol/chem/lexer.hpp"

using namespace himol::chem;

namespace {
std::vector<std::pair<TokenKind, std::string>> kinds(std::string_view s) {
  std::vector<std::pair<TokenKind, std::string>> out;
  for (const auto& t : lex(s)) out.emplace_back(t.kind, t.text);
  return out;
}
}  // namespace

TEST_CASE("lex: organic atoms") {
  using P = std::pair<TokenKind, std::string>;
  CHECK(kinds("CCO") == std::vector<P>{{TokenKind::Atom, "C"}, {TokenKind::Atom, "C"}, {TokenKind::Atom, "O"}});
  CHECK(kinds("ClCBr") == std::vector<P>{{TokenKind::Atom, "Cl"}, {TokenKind::Atom, "C"}, {TokenKind::Atom, "Br"}});
}

TEST_CASE("lex: two-digit ring closures") {
  using P = std::pair<TokenKind, std::string>;
  CHECK(kinds("C%12CC%12") == std::vector<P>{{TokenKind::Atom, "C"},
                                              {TokenKind::RingClosure, "%12"},
                                              {TokenKind::Atom, "C"},
                                              {TokenKind::Atom, "C"},
                                              {TokenKind::RingClosure, "%12"}});
  CHECK(ring_number(lex("C%12")[1]) == 12);
  CHECK(ring_number(lex("C7")[1]) == 7);
}

TEST_CASE("lex: errors carry the byte offset") {
  try {
    lex("C$C");
    FAIL("expected LexError");
  } catch (const LexError& e) {
    CHECK(e.offset() == 1);
  }
  CHECK_THROWS_AS(lex("C[NH4+"), LexError);
  CHECK_THROWS_AS(lex("C%1"), LexError);
  CHECK_THROWS_AS(lex("C C"), LexError);
  CHECK_THROWS_AS(lex("[Xy]"), LexError);
}

TEST_CASE("lex: bracket atoms, bonds, branches, dots, stereo") {
  const auto t = lex("[13CH3+].N[C@@H](C)C(=O)/C=C\\C");
  CHECK(t[0].kind == TokenKind::BracketAtom);
  CHECK(t[0].text == "[13CH3+]");
  CHECK(t[1].kind == TokenKind::Dot);
  CHECK(t[3].text == "[C@@H]");
  CHECK(join(t) == "[13CH3+].N[C@@H](C)C(=O)/C=C\\C");
  const auto spec = parse_bracket("[13CH3+]");
  CHECK(spec.isotope == 13);
  CHECK(spec.atomic_number == 6);
  CHECK(spec.hydrogens == 3);
  CHECK(spec.charge == 1);
  CHECK(parse_bracket("[nH]").aromatic);
  CHECK(parse_bracket("[O--]").charge == -2);
  CHECK(parse_bracket("[Fe+3]").charge == 3);
  CHECK(parse_bracket("[se]").atomic_number == 34);
}
