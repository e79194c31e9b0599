#include "himol/repair.hpp"

#include <algorithm>
#include <map>
#include <optional>

#include "himol/chem/lexer.hpp"
#include "himol/chem/smiles.hpp"
#include "himol/rng.hpp"
#include "json.hpp"

namespace himol::repair {

using chem::DefectKind;
using chem::Token;
using chem::TokenKind;

std::string_view rule_name(Rule rule) {
  switch (rule) {
    case Rule::R1: return "R1";
    case Rule::R2: return "R2";
    case Rule::R3: return "R3";
    case Rule::R4: return "R4";
    case Rule::R5: return "R5";
  }
  return "?";
}

namespace {

class Editor {
 public:
  Editor(std::vector<Token> tokens, RepairTrace& trace) : tokens_(std::move(tokens)), trace_(trace) {}

  const std::vector<Token>& tokens() const { return tokens_; }

  std::size_t offset(std::size_t token) const {
    std::size_t pos = 0;
    for (std::size_t i = 0; i < token && i < tokens_.size(); ++i) pos += tokens_[i].text.size();
    return pos;
  }

  // Removes the tokens whose indices are in `drop` (sorted) from within the
  // contiguous span [first, last], recording a single edit.
  void remove(Rule rule, std::size_t first, std::size_t last, const std::vector<std::size_t>& drop) {
    AppliedRule edit{rule, offset(first), {}, {}};
    std::vector<Token> kept;
    for (std::size_t i = first; i <= last; ++i) {
      edit.before += tokens_[i].text;
      if (std::binary_search(drop.begin(), drop.end(), i)) continue;
      edit.after += tokens_[i].text;
      kept.push_back(tokens_[i]);
    }
    tokens_.erase(tokens_.begin() + static_cast<std::ptrdiff_t>(first),
                  tokens_.begin() + static_cast<std::ptrdiff_t>(last) + 1);
    tokens_.insert(tokens_.begin() + static_cast<std::ptrdiff_t>(first), kept.begin(), kept.end());
    trace_.applied.push_back(std::move(edit));
  }

  void append(Rule rule, Token token) {
    trace_.applied.push_back({rule, offset(tokens_.size()), "", token.text});
    tokens_.push_back(std::move(token));
  }

 private:
  std::vector<Token> tokens_;
  RepairTrace& trace_;
};

// Index of the bond token that belongs to ring-closure token `i`, if any.
std::optional<std::size_t> ring_bond_before(const std::vector<Token>& t, std::size_t i) {
  if (i > 0 && t[i - 1].kind == TokenKind::Bond) return i - 1;
  return std::nullopt;
}

// Pairs ring-closure tokens first-open/first-close. Returns partner index per
// token (-1 for unclosed or non-ring tokens).
std::vector<long> pair_rings(const std::vector<Token>& t) {
  std::vector<long> partner(t.size(), -1);
  std::map<int, std::size_t> open;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i].kind != TokenKind::RingClosure) continue;
    const int num = chem::ring_number(t[i]);
    if (auto it = open.find(num); it != open.end()) {
      partner[i] = static_cast<long>(it->second);
      partner[it->second] = static_cast<long>(i);
      open.erase(it);
    } else {
      open.emplace(num, i);
    }
  }
  return partner;
}

bool rule1(Editor& ed) {
  int depth = 0;
  const auto& t = ed.tokens();
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i].kind == TokenKind::BranchOpen) ++depth;
    if (t[i].kind == TokenKind::BranchClose) {
      if (depth == 0) {
        ed.remove(Rule::R1, i, i, {i});
        return true;
      }
      --depth;
    }
  }
  return false;
}

bool rule2(Editor& ed) {
  int depth = 0;
  for (const auto& tok : ed.tokens()) {
    if (tok.kind == TokenKind::BranchOpen) ++depth;
    if (tok.kind == TokenKind::BranchClose && depth > 0) --depth;
  }
  if (depth == 0) return false;
  ed.append(Rule::R2, Token{TokenKind::BranchClose, ")", 0});
  return true;
}

bool rule3(Editor& ed) {
  const auto& t = ed.tokens();
  const auto partner = pair_rings(t);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i].kind == TokenKind::RingClosure && partner[i] < 0) {
      const std::size_t first = ring_bond_before(t, i).value_or(i);
      std::vector<std::size_t> drop;
      for (std::size_t k = first; k <= i; ++k) drop.push_back(k);
      ed.remove(Rule::R3, first, i, drop);
      return true;
    }
  }
  return false;
}

// Token index one past the end of the branch starting at '(' index `open`.
std::size_t branch_end(const std::vector<Token>& t, std::size_t open) {
  int depth = 0;
  for (std::size_t i = open; i < t.size(); ++i) {
    if (t[i].kind == TokenKind::BranchOpen) ++depth;
    if (t[i].kind == TokenKind::BranchClose && --depth == 0) return i + 1;
  }
  return t.size();
}

bool rule4(Editor& ed, Rng& rng) {
  const auto& t = ed.tokens();
  const chem::Structure s = chem::analyze(t);
  std::optional<std::size_t> atom_token;
  for (const auto& d : s.defects) {
    if (d.kind == DefectKind::ValenceViolation) {
      const auto tok = static_cast<std::size_t>(d.token);
      if (!atom_token || tok < *atom_token) atom_token = tok;
    }
  }
  if (!atom_token) return false;
  const std::size_t a = *atom_token;

  // Ring-closure digits (with their bond symbols) written on the atom.
  std::size_t i = a + 1;
  std::vector<std::pair<std::size_t, std::size_t>> ring_units;
  while (i < t.size()) {
    if (t[i].kind == TokenKind::RingClosure) {
      ring_units.emplace_back(i, i);
      ++i;
    } else if (t[i].kind == TokenKind::Bond && i + 1 < t.size() && t[i + 1].kind == TokenKind::RingClosure) {
      ring_units.emplace_back(i, i + 1);
      i += 2;
    } else {
      break;
    }
  }
  std::vector<std::pair<std::size_t, std::size_t>> branches;
  while (i < t.size() && t[i].kind == TokenKind::BranchOpen) {
    const std::size_t end = branch_end(t, i);
    branches.emplace_back(i, end - 1);
    i = end;
  }

  std::vector<std::pair<std::size_t, std::size_t>> units = branches;
  if (units.empty()) {
    // Trailing run: rest of the chain at this nesting level.
    std::size_t end = i;
    int depth = 0;
    while (end < t.size()) {
      if (t[end].kind == TokenKind::BranchOpen) ++depth;
      if (t[end].kind == TokenKind::BranchClose) {
        if (depth == 0) break;
        --depth;
      }
      if (t[end].kind == TokenKind::Dot && depth == 0) break;
      ++end;
    }
    if (end > i) units.emplace_back(i, end - 1);
  }
  if (units.empty()) units = ring_units;
  if (units.empty()) {
    // Nothing hangs off the atom: the atom itself is the branch of its
    // predecessor. Drop it together with its preceding bond symbol.
    std::size_t first = a;
    if (first > 0 && t[first - 1].kind == TokenKind::Bond) --first;
    std::size_t end = a + 1;
    while (end < t.size() && t[end].kind != TokenKind::BranchClose && t[end].kind != TokenKind::Dot) ++end;
    units.emplace_back(first, end - 1);
  }
  const auto [first, last] = units[rng.index(units.size())];
  std::vector<std::size_t> drop;
  for (std::size_t k = first; k <= last; ++k) drop.push_back(k);
  ed.remove(Rule::R4, first, last, drop);
  return true;
}

bool rule5(Editor& ed) {
  const auto& t = ed.tokens();
  const chem::Structure s = chem::analyze(t);
  std::optional<std::size_t> close;
  for (const auto& d : s.defects) {
    if ((d.kind == DefectKind::RingTooSmall || d.kind == DefectKind::DuplicateBond) && d.token >= 0 &&
        t[static_cast<std::size_t>(d.token)].kind == TokenKind::RingClosure) {
      const auto tok = static_cast<std::size_t>(d.token);
      if (!close || tok < *close) close = tok;
    }
  }
  if (!close) return false;
  const auto partner = pair_rings(t);
  const long open_l = partner[*close];
  if (open_l < 0) return false;
  const auto open = static_cast<std::size_t>(open_l);
  std::vector<std::size_t> drop;
  if (auto b = ring_bond_before(t, open)) drop.push_back(*b);
  drop.push_back(open);
  if (auto b = ring_bond_before(t, *close); b && *b > open) drop.push_back(*b);
  drop.push_back(*close);
  std::sort(drop.begin(), drop.end());
  ed.remove(Rule::R5, drop.front(), drop.back(), drop);
  return true;
}

}  // namespace

RepairTrace repair(std::string_view smiles, std::uint64_t seed, RepairOptions options) {
  RepairTrace trace;
  trace.input = std::string(smiles);
  trace.output = trace.input;
  trace.seed = seed;
  std::vector<Token> tokens;
  try {
    tokens = chem::lex(smiles);
  } catch (const chem::LexError& e) {
    trace.failed = true;
    throw RepairFailed(trace, e.what());
  }
  if (chem::analyze(tokens).ok()) return trace;

  Rng rng(seed);
  Editor ed(std::move(tokens), trace);
  for (int pass = 0; pass < options.max_passes; ++pass) {
    bool changed = false;
    while (rule1(ed)) changed = true;
    while (rule2(ed)) changed = true;
    while (rule3(ed)) changed = true;
    while (rule4(ed, rng)) changed = true;
    while (rule5(ed)) changed = true;
    trace.output = chem::join(ed.tokens());
    if (chem::analyze(ed.tokens()).ok()) return trace;
    if (!changed) break;
  }
  trace.failed = true;
  const chem::Structure s = chem::analyze(ed.tokens());
  const chem::Defect* d = s.first_defect();
  throw RepairFailed(trace, std::string("unrepairable defect ") +
                                std::string(d ? chem::defect_name(d->kind) : "unknown"));
}

RepairTrace try_repair(std::string_view smiles, std::uint64_t seed, RepairOptions options) noexcept {
  try {
    return repair(smiles, seed, options);
  } catch (const RepairFailed& e) {
    return e.partial();
  } catch (...) {
    RepairTrace t;
    t.input = std::string(smiles);
    t.output = t.input;
    t.seed = seed;
    t.failed = true;
    return t;
  }
}

std::string replay(std::string_view input, std::span<const AppliedRule> edits) {
  std::string s(input);
  for (const auto& e : edits) {
    if (e.position > s.size() || s.compare(e.position, e.before.size(), e.before) != 0) {
      throw FormatError("repair replay: edit does not match at position " + std::to_string(e.position));
    }
    s.replace(e.position, e.before.size(), e.after);
  }
  return s;
}

std::string to_json_line(const RepairTrace& trace) {
  nlohmann::ordered_json j;
  j["input"] = trace.input;
  j["output"] = trace.output;
  j["rules"] = nlohmann::ordered_json::array();
  for (const auto& r : trace.applied) {
    j["rules"].push_back(
        {{"rule", rule_name(r.rule)}, {"position", r.position}, {"before", r.before}, {"after", r.after}});
  }
  j["failed"] = trace.failed;
  j["seed"] = trace.seed;
  return j.dump();
}

}  // namespace himol::repair
