#include "himol/chem/smiles.hpp"

#include <algorithm>
#include <map>
#include <optional>

#include "himol/chem/element.hpp"
#include "himol/chem/valence.hpp"

namespace himol::chem {

std::string_view defect_name(DefectKind kind) {
  switch (kind) {
    case DefectKind::UnmatchedBranchClose: return "UnmatchedBranchClose";
    case DefectKind::UnclosedBranch: return "UnclosedBranch";
    case DefectKind::UnclosedRing: return "UnclosedRing";
    case DefectKind::ValenceViolation: return "ValenceViolation";
    case DefectKind::RingTooSmall: return "RingTooSmall";
    case DefectKind::DuplicateBond: return "DuplicateBond";
    case DefectKind::Aromaticity: return "Aromaticity";
    case DefectKind::UnknownElement: return "UnknownElement";
    case DefectKind::Syntax: return "Syntax";
    case DefectKind::Empty: return "Empty";
  }
  return "?";
}

const Defect* Structure::first_defect() const {
  const Defect* best = nullptr;
  for (const auto& d : defects) {
    if (!best || d.kind < best->kind || (d.kind == best->kind && d.token < best->token)) best = &d;
  }
  return best;
}

namespace {

std::optional<BondOrder> bond_from_token(const Token& t) {
  switch (t.text[0]) {
    case '-': case '/': case '\\': return BondOrder::Single;
    case '=': return BondOrder::Double;
    case '#': return BondOrder::Triple;
    case ':': return BondOrder::Aromatic;
    default: return std::nullopt;
  }
}

struct PendingBond {
  int token;
  BondOrder order;
};

struct RingOpen {
  int atom;
  int token;
  std::optional<BondOrder> order;
};

struct BranchFrame {
  int atom;
  int token;
  int atoms_at_open;
};

class Builder {
 public:
  explicit Builder(Structure& s) : s_(s) {}

  void run() {
    const auto& tokens = s_.tokens;
    s_.token_atom.assign(tokens.size(), -1);
    if (tokens.empty()) {
      defect(DefectKind::Empty, -1);
      return;
    }
    for (int i = 0; i < static_cast<int>(tokens.size()); ++i) step(i);
    if (tokens.back().kind == TokenKind::Dot) defect(DefectKind::Syntax, static_cast<int>(tokens.size()) - 1);
    if (pending_) defect(DefectKind::Syntax, pending_->token);
    for (const auto& frame : branches_) defect(DefectKind::UnclosedBranch, frame.token);
    for (const auto& [num, open] : rings_) defect(DefectKind::UnclosedRing, open.token);
    finish();
  }

 private:
  void defect(DefectKind kind, int token, int atom = -1) { s_.defects.push_back({kind, token, atom}); }

  BondOrder implicit_order(int a, int b) const {
    return s_.graph.atom(a).aromatic && s_.graph.atom(b).aromatic ? BondOrder::Aromatic : BondOrder::Single;
  }

  void step(int i) {
    const Token& t = s_.tokens[static_cast<std::size_t>(i)];
    switch (t.kind) {
      case TokenKind::Atom:
      case TokenKind::BracketAtom: add_atom(i, t); break;
      case TokenKind::Bond:
        if (pending_ || prev_ < 0) {
          defect(DefectKind::Syntax, i);
        } else {
          pending_ = PendingBond{i, *bond_from_token(t)};
        }
        break;
      case TokenKind::RingClosure: ring(i, t); break;
      case TokenKind::BranchOpen:
        if (prev_ < 0 || pending_ || (i > 0 && s_.tokens[static_cast<std::size_t>(i - 1)].kind == TokenKind::BranchOpen)) {
          defect(DefectKind::Syntax, i);
          pending_.reset();
        }
        branches_.push_back({prev_, i, static_cast<int>(s_.graph.atom_count())});
        break;
      case TokenKind::BranchClose:
        if (branches_.empty()) {
          defect(DefectKind::UnmatchedBranchClose, i);
          break;
        }
        if (pending_) {
          defect(DefectKind::Syntax, pending_->token);
          pending_.reset();
        }
        if (branches_.back().atoms_at_open == static_cast<int>(s_.graph.atom_count())) {
          defect(DefectKind::Syntax, i);  // empty branch
        }
        prev_ = branches_.back().atom;
        branches_.pop_back();
        break;
      case TokenKind::Dot:
        if (pending_ || prev_ < 0 || !branches_.empty()) defect(DefectKind::Syntax, i);
        pending_.reset();
        prev_ = -1;
        break;
    }
  }

  void add_atom(int i, const Token& t) {
    Atom atom;
    if (t.kind == TokenKind::BracketAtom) {
      const BracketSpec spec = parse_bracket(t.text);
      atom = Atom{spec.atomic_number, spec.charge, spec.hydrogens, spec.aromatic, spec.isotope};
      bracket_.push_back(true);
    } else {
      const char c = t.text[0];
      std::string sym = t.text;
      const bool aromatic = c >= 'a' && c <= 'z';
      if (aromatic) sym[0] = static_cast<char>(c - 'a' + 'A');
      atom.atomic_number = *atomic_number(sym);
      atom.aromatic = aromatic;
      bracket_.push_back(false);
    }
    const int index = s_.graph.add_atom(atom);
    s_.atom_token.push_back(i);
    s_.token_atom[static_cast<std::size_t>(i)] = index;
    if (allowed_valences(atom.atomic_number, atom.charge).empty()) {
      defect(DefectKind::UnknownElement, i, index);
    }
    if (prev_ >= 0) {
      const bool explicit_bond = pending_.has_value();
      const BondOrder order = explicit_bond ? pending_->order : implicit_order(prev_, index);
      const int bond = s_.graph.add_bond(prev_, index, order);
      chain_bond_.push_back(true);
      implicit_bond_.push_back(!explicit_bond);
      (void)bond;
    } else if (pending_) {
      defect(DefectKind::Syntax, pending_->token);
    }
    pending_.reset();
    prev_ = index;
  }

  void ring(int i, const Token& t) {
    if (prev_ < 0) {
      defect(DefectKind::Syntax, i);
      pending_.reset();
      return;
    }
    const int num = ring_number(t);
    std::optional<BondOrder> order;
    if (pending_) order = pending_->order;
    pending_.reset();
    auto it = rings_.find(num);
    if (it == rings_.end()) {
      rings_.emplace(num, RingOpen{prev_, i, order});
      return;
    }
    const RingOpen open = it->second;
    rings_.erase(it);
    if (open.order && order && *open.order != *order) {
      defect(DefectKind::Syntax, i);
      return;
    }
    if (open.atom == prev_) {
      defect(DefectKind::RingTooSmall, i, prev_);
      return;
    }
    if (const int existing = s_.graph.find_bond(open.atom, prev_); existing >= 0) {
      defect(chain_bond_[static_cast<std::size_t>(existing)] ? DefectKind::RingTooSmall : DefectKind::DuplicateBond,
             i, prev_);
      return;
    }
    const BondOrder resolved = order ? *order : open.order ? *open.order : implicit_order(open.atom, prev_);
    s_.graph.add_bond(open.atom, prev_, resolved);
    chain_bond_.push_back(false);
    implicit_bond_.push_back(!order && !open.order);
  }

  void finish() {
    auto& g = s_.graph;
    // An unwritten bond between two aromatic atoms outside any ring is single.
    const auto in_ring = ring_bonds(g);
    for (int b = 0; b < static_cast<int>(g.bond_count()); ++b) {
      if (g.bond(b).order == BondOrder::Aromatic && implicit_bond_[static_cast<std::size_t>(b)] &&
          !in_ring[static_cast<std::size_t>(b)]) {
        g.bond(b).order = BondOrder::Single;
      }
    }
    for (int a = 0; a < static_cast<int>(g.atom_count()); ++a) {
      if (!bracket_[static_cast<std::size_t>(a)]) g.atom(a).hydrogens = implicit_hydrogens(g, a);
    }
    for (int a : overvalent_atoms(g)) {
      defect(DefectKind::ValenceViolation, s_.atom_token[static_cast<std::size_t>(a)], a);
    }
    if (const int a = aromatic_defect(g); a >= 0) {
      defect(DefectKind::Aromaticity, s_.atom_token[static_cast<std::size_t>(a)], a);
    }
  }

  Structure& s_;
  int prev_ = -1;
  std::optional<PendingBond> pending_;
  std::vector<BranchFrame> branches_;
  std::map<int, RingOpen> rings_;
  std::vector<bool> bracket_;
  std::vector<bool> chain_bond_;
  std::vector<bool> implicit_bond_;
};

}  // namespace

Structure analyze(std::vector<Token> tokens) {
  Structure s;
  s.tokens = std::move(tokens);
  Builder(s).run();
  return s;
}

Structure analyze(std::string_view smiles) { return analyze(lex(smiles)); }

MolGraph parse(std::string_view smiles) {
  Structure s = analyze(smiles);
  if (const Defect* d = s.first_defect()) {
    const std::size_t offset =
        d->token >= 0 ? s.tokens[static_cast<std::size_t>(d->token)].offset : smiles.size();
    std::string what = "parse error (" + std::string(defect_name(d->kind)) + ") at offset " + std::to_string(offset);
    if (d->atom >= 0) what += ", atom " + std::to_string(d->atom);
    throw ParseError(d->kind, offset, d->atom, what);
  }
  return std::move(s.graph);
}

bool is_valid(std::string_view smiles) noexcept {
  try {
    return analyze(smiles).ok();
  } catch (...) {
    return false;
  }
}

}  // namespace himol::chem
