#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace titledup::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsageError = 1;
inline constexpr int kDataError = 2;

/// Runs the tool with `args` (args[0] is the program name).
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace titledup::cli
