#include "himol/seq/vocab.hpp"

#include <set>
#include <sstream>

#include "himol/chem/lexer.hpp"

namespace himol::seq {
namespace {

std::vector<std::string> reserved() {
  std::vector<std::string> v = {"<PAD>", "<BOS>", "<EOS>"};
  for (auto w : kPromptWords) v.emplace_back(w);
  v.emplace_back(kGen);
  for (auto p : kPlaceholders) v.emplace_back(p);
  return v;
}

std::vector<std::string> smiles_alphabet() {
  std::vector<std::string> v = {"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I", "b", "c", "n", "o", "p", "s",
                                "-", "=", "#", ":", "/", "\\", "(", ")", "."};
  for (int d = 1; d <= 9; ++d) v.push_back(std::to_string(d));
  for (int d = 10; d <= 99; ++d) v.push_back("%" + std::to_string(d));
  return v;
}

}  // namespace

Vocab::Vocab(std::vector<std::string> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!index_.emplace(entries_[i], static_cast<int>(i)).second) {
      throw FormatError("vocabulary has duplicate entry '" + entries_[i] + "'");
    }
  }
  const auto base = reserved();
  if (entries_.size() < base.size() || !std::equal(base.begin(), base.end(), entries_.begin())) {
    throw FormatError("vocabulary does not start with the reserved entries");
  }
  first_smiles_ = static_cast<int>(base.size());
  gen_ = index_.at(std::string(kGen));
}

Vocab Vocab::build(std::span<const std::string> corpus) {
  std::vector<std::string> entries = reserved();
  for (auto& t : smiles_alphabet()) entries.push_back(std::move(t));
  std::set<std::string> brackets;
  for (const auto& s : corpus) {
    for (const auto& t : chem::lex(s)) {
      if (t.kind == chem::TokenKind::BracketAtom) brackets.insert(t.text);
    }
  }
  entries.insert(entries.end(), brackets.begin(), brackets.end());
  return Vocab(std::move(entries));
}

Vocab Vocab::from_entries(std::vector<std::string> entries) { return Vocab(std::move(entries)); }

std::optional<int> Vocab::find(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int Vocab::id(std::string_view token) const {
  if (auto i = find(token)) return *i;
  throw UnknownToken("token '" + std::string(token) + "' is not in the vocabulary");
}

std::vector<int> Vocab::encode_smiles(std::string_view smiles) const {
  std::vector<chem::Token> tokens;
  try {
    tokens = chem::lex(smiles);
  } catch (const chem::LexError& e) {
    throw UnknownToken("cannot tokenize '" + std::string(smiles) + "': " + e.what());
  }
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) {
    const int i = id(t.text);
    if (i < first_smiles_) throw UnknownToken("token '" + t.text + "' is not a SMILES token");
    ids.push_back(i);
  }
  return ids;
}

std::string Vocab::decode_smiles(std::span<const int> ids) const {
  std::string s;
  for (int i : ids) {
    if (i >= first_smiles_) s += token(i);
  }
  return s;
}

std::vector<int> Vocab::encode_words(std::string_view words) const {
  std::istringstream in{std::string(words)};
  std::vector<int> ids;
  std::string w;
  while (in >> w) ids.push_back(id(w));
  return ids;
}

}  // namespace himol::seq
