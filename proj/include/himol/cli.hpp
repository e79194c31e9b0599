#pragma once
// Command-line front end. Exit codes: 0 success, 1 user error (bad flags,
// files or settings), 2 internal error.

#include <ostream>
#include <span>
#include <string>

namespace himol::cli {

inline constexpr const char* kVersion = "1.0.0";

// `args` excludes the program name.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace himol::cli
