#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gower::cli {

enum ExitCode : int { kOk = 0, kWarnings = 1, kFatal = 2 };

/// Runs the command line `args` (without the program name). Primary output
/// goes to `out` unless a command writes to --out; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gower::cli
