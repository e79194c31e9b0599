#pragma once
// Token space of the backbone: reserved specials, prompt words, pseudo-token
// placeholders, then SMILES tokens.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "himol/error.hpp"

namespace himol::seq {

inline constexpr int kPad = 0;
inline constexpr int kBos = 1;
inline constexpr int kEos = 2;

inline constexpr std::array<std::string_view, 8> kPromptWords = {"The", "molecule", "is",       "a",
                                                                 "A",   "similar",  "chemical", "of"};
inline constexpr std::string_view kGen = "<GEN>";
inline constexpr std::array<std::string_view, 3> kPlaceholders = {"<S*>", "<I*>", "<D*>"};

class UnknownToken : public Error {
 public:
  using Error::Error;
};

class Vocab {
 public:
  // Base alphabet plus every bracket atom that occurs in `corpus`.
  static Vocab build(std::span<const std::string> corpus);
  // Rebuilds from a stored entry list; validates the reserved layout.
  static Vocab from_entries(std::vector<std::string> entries);

  std::size_t size() const { return entries_.size(); }
  const std::vector<std::string>& entries() const { return entries_; }
  const std::string& token(int id) const { return entries_.at(static_cast<std::size_t>(id)); }
  std::optional<int> find(std::string_view token) const;
  int id(std::string_view token) const;  // throws UnknownToken

  // Lexes a SMILES string into token ids; throws UnknownToken on a token
  // outside the vocabulary or an unlexable string.
  std::vector<int> encode_smiles(std::string_view smiles) const;
  std::string decode_smiles(std::span<const int> ids) const;
  // Ids of a whitespace separated prompt of words.
  std::vector<int> encode_words(std::string_view words) const;

  // Tokens the decoder may produce: SMILES tokens and EOS.
  bool emittable(int id) const { return id == kEos || id >= first_smiles_; }
  int first_smiles() const { return first_smiles_; }
  int gen() const { return gen_; }

  bool operator==(const Vocab& other) const { return entries_ == other.entries_; }

 private:
  explicit Vocab(std::vector<std::string> entries);

  std::vector<std::string> entries_;
  std::unordered_map<std::string, int> index_;
  int first_smiles_ = 0;
  int gen_ = 0;
};

}  // namespace himol::seq
