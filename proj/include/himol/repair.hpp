#pragma once
// Rule-based repair of invalid generated SMILES. Rules run in a fixed order,
// each to its own fixpoint, and the whole sequence repeats until the string
// parses or the pass budget runs out:
//   R1 drop branch-close tokens with no open branch
//   R2 append ')' for every unclosed branch
//   R3 drop ring-open tokens that never close
//   R4 drop a random branch of an over-valent atom
//   R5 drop ring-closure pairs that close rings of fewer than 3 atoms

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "himol/error.hpp"

namespace himol::repair {

enum class Rule { R1 = 1, R2, R3, R4, R5 };

std::string_view rule_name(Rule rule);

// One textual edit: at byte `position` of the current string, `before` is
// replaced by `after`.
struct AppliedRule {
  Rule rule;
  std::size_t position;
  std::string before;
  std::string after;

  bool operator==(const AppliedRule&) const = default;
};

struct RepairTrace {
  std::string input;
  std::string output;
  std::vector<AppliedRule> applied;
  std::uint64_t seed = 0;
  bool failed = false;

  bool operator==(const RepairTrace&) const = default;
};

struct RepairOptions {
  int max_passes = 64;
};

class RepairFailed : public Error {
 public:
  RepairFailed(RepairTrace partial, const std::string& why)
      : Error("repair failed: " + why), partial_(std::move(partial)) {}
  const RepairTrace& partial() const { return partial_; }

 private:
  RepairTrace partial_;
};

// Throws RepairFailed (with the partial trace) if the result is not valid.
RepairTrace repair(std::string_view smiles, std::uint64_t seed, RepairOptions options = {});

// Non-throwing form: failures come back with failed = true.
RepairTrace try_repair(std::string_view smiles, std::uint64_t seed, RepairOptions options = {}) noexcept;

// Applies the edits in order. Throws FormatError if an edit does not match.
std::string replay(std::string_view input, std::span<const AppliedRule> edits);

// {"input":..,"output":..,"rules":[{"rule":"R1","position":..,"before":..,"after":..}],"failed":..}
std::string to_json_line(const RepairTrace& trace);

}  // namespace himol::repair
