#include "toydata.hpp"

#include <set>

#include "himol/chem/canon.hpp"
#include "himol/chem/smiles.hpp"
#include "oracles.hpp"

namespace himol::testing {
namespace {

std::string pick(Rng& rng, std::initializer_list<const char*> options) {
  const auto i = rng.index(options.size());
  return *(options.begin() + static_cast<std::ptrdiff_t>(i));
}

std::string carbon_chain(Rng& rng, int min_len, int max_len) {
  const int len = min_len + static_cast<int>(rng.index(static_cast<std::uint64_t>(max_len - min_len + 1)));
  std::string s;
  for (int i = 0; i < len; ++i) {
    s += 'C';
    if (i > 0 && i + 1 < len && rng.index(5) == 0) s += pick(rng, {"(C)", "(O)", "(C)", "(N)"});
  }
  return s;
}

std::string acyclic(Rng& rng) {
  std::string head = pick(rng, {"", "", "O", "N", "OC", "CO"});
  std::string s = head + carbon_chain(rng, 2, 7);
  switch (rng.index(6)) {
    case 0: s += "O"; break;
    case 1: s += "N"; break;
    case 2: s += "C(=O)O"; break;
    case 3: s += "C=O"; break;
    default: break;
  }
  return s;
}

std::string side_chain(Rng& rng) {
  return pick(rng, {"C", "CC", "CCC", "O", "N", "CO", "CCO", "C(=O)O", "C(C)C", "Cl", "F", "OC"});
}

std::string carbocycle(Rng& rng) {
  const bool six = rng.index(2) == 0;
  std::string ring = six ? "C1CCCCC1" : "C1CCCC1";
  std::string s = side_chain(rng) + ring;
  if (rng.index(2) == 0) {
    // Second substituent on a ring atom.
    s = side_chain(rng) + (six ? "C1CCC(" : "C1CC(") + side_chain(rng) + (six ? ")CC1" : ")C1");
  }
  return s;
}

std::string aromatic(Rng& rng) {
  const bool pyridine = rng.index(4) == 0;
  std::string s = side_chain(rng) + (pyridine ? "c1ccncc1" : "c1ccccc1");
  if (rng.index(2) == 0) {
    s = side_chain(rng) + (pyridine ? "c1ccc(" : "c1ccc(") + side_chain(rng) + (pyridine ? ")nc1" : ")cc1");
  }
  return s;
}

}  // namespace

std::string random_molecule(Rng& rng, Family family) {
  switch (family) {
    case Family::Acyclic: return acyclic(rng);
    case Family::Carbocycle: return carbocycle(rng);
    case Family::Aromatic: return aromatic(rng);
    case Family::Mixed: {
      const auto k = rng.index(3);
      return k == 0 ? acyclic(rng) : k == 1 ? carbocycle(rng) : aromatic(rng);
    }
  }
  return "C";
}

std::vector<std::string> corpus(Family family, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::set<std::string> seen;
  std::vector<std::string> out;
  std::size_t attempts = 0;
  while (out.size() < n && attempts++ < n * 1000) {
    const std::string s = random_molecule(rng, family);
    if (!chem::is_valid(s)) continue;
    std::string c = chem::canonical_smiles(s);
    if (seen.insert(c).second) out.push_back(std::move(c));
  }
  return out;
}

std::vector<std::string> roundtrip_corpus() {
  std::vector<std::string> out = {
      "C", "CC", "CCO", "OCC", "C=C", "C#C", "C#N", "CC(=O)O", "CC(C)C", "CC(C)(C)C",
      "C1CC1", "C1CCC1", "C1CCCC1", "C1CCCCC1", "c1ccccc1", "c1ccncc1", "c1ccoc1", "c1ccsc1",
      "c1cc[nH]c1", "c1ccc2ccccc2c1", "c1ccc2[nH]ccc2c1", "c1ccc(cc1)-c1ccccc1", "O=C1CCCCC1",
      "CC(=O)Oc1ccccc1C(=O)O", "CN1C=NC2=C1C(=O)N(C(=O)N2C)C", "CC(C)Cc1ccc(cc1)C(C)C(=O)O",
      "C[N+](C)(C)C", "[O-]C(=O)C", "[NH4+]", "[Na+].[Cl-]", "OCC(O)CO", "NCC(=O)O",
      "C1=CC=CC=C1", "ClC(Cl)(Cl)Cl", "FC(F)(F)C(=O)O", "BrCCBr", "ICCI", "CS(=O)(=O)C",
      "OP(=O)(O)O", "CCN(CC)CC", "C1CCC2CCCCC2C1", "C1CC2CCC1C2", "C12C3C4C1C5C2C3C45",
      "c1ccc2c(c1)ccc1ccccc12", "n1ccccc1-c1ccccn1", "O=c1cc[nH]cc1", "Cc1ccccc1", "[13CH4]",
      "C%10CCCCC%10", "CC=CC", "CC#CC", "C=CC=C", "O=C=O", "N#CC#N", "CC(C)(O)C#C",
      "c1ncc2nc[nH]c2n1", "c1cscn1", "c1ccc2ocnc2c1", "OC1CCCCC1O", "CC1=CC(=O)C=CC1=O",
  };
  for (auto& s : out) s = chem::canonical_smiles(s);
  for (Family f : {Family::Acyclic, Family::Carbocycle, Family::Aromatic}) {
    const auto extra = corpus(f, 50, 1234 + static_cast<std::uint64_t>(f));
    out.insert(out.end(), extra.begin(), extra.end());
  }
  return out;
}

std::string random_spelling(const std::string& smiles, Rng& rng) {
  const chem::MolGraph g = chem::parse(smiles);
  const auto order = random_permutation(rng, g.atom_count());
  return chem::write_smiles(g, order);
}

}  // namespace himol::testing

namespace himol::testing {
namespace {

// Byte offsets just past each atom token, optionally aliphatic atoms only.
std::vector<std::size_t> atom_ends(const std::string& s, bool aliphatic_only) {
  std::vector<std::size_t> ends;
  std::size_t pos = 0;
  for (const auto& t : chem::lex(s)) {
    pos += t.text.size();
    const bool atom = t.kind == chem::TokenKind::Atom || t.kind == chem::TokenKind::BracketAtom;
    const bool aromatic = t.kind == chem::TokenKind::Atom && t.text[0] >= 'a' && t.text[0] <= 'z';
    if (atom && !(aliphatic_only && aromatic)) ends.push_back(pos);
  }
  return ends;
}

// One mutation per repair rule.
void mutate(std::string& s, Rng& rng) {
  const auto kind = rng.index(6);
  const auto ends = atom_ends(s, kind >= 4);
  if (ends.empty()) return;
  const std::size_t at = ends[rng.index(ends.size())];
  switch (kind) {
    case 0: s.insert(at, ")"); break;
    case 1: {
      const auto close = s.rfind(')');
      if (close != std::string::npos) s.erase(close, 1);
      break;
    }
    case 2: s.insert(at, pick(rng, {"8", "9", "=9", "%42"})); break;
    case 3: s.insert(at, pick(rng, {"7C7", "77", "7=C7"})); break;
    case 4: s.insert(at, pick(rng, {"(=O)", "(C)(C)(C)", "(#N)", "(=C)(C)", "(=CC)"})); break;
    default: s.insert(at, pick(rng, {"=C", "#C", "=O"})); break;
  }
}

// Every detected defect is one the repair rules target.
bool in_taxonomy(const std::string& s) {
  try {
    for (const auto& d : chem::analyze(s).defects) {
      switch (d.kind) {
        case chem::DefectKind::UnmatchedBranchClose:
        case chem::DefectKind::UnclosedBranch:
        case chem::DefectKind::UnclosedRing:
        case chem::DefectKind::ValenceViolation:
        case chem::DefectKind::RingTooSmall:
        case chem::DefectKind::DuplicateBond: break;
        default: return false;
      }
    }
    return true;
  } catch (const chem::LexError&) {
    return false;
  }
}

}  // namespace

std::string fuzz_invalid(const std::string& valid, Rng& rng) {
  for (;;) {
    std::string s = valid;
    const auto n = 1 + rng.index(3);
    for (std::uint64_t k = 0; k < n; ++k) {
      try {
        mutate(s, rng);
      } catch (const chem::LexError&) {
      }
    }
    if (!chem::is_valid(s) && in_taxonomy(s)) return s;
  }
}

}  // namespace himol::testing
