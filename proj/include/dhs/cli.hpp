#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dhs::cli {

enum ExitCode : int { kOk = 0, kFailed = 1, kConfigError = 2, kNoOrbit = 3 };

/// Runs one command line (args[0] is the program name). Reports go to `out`
/// as JSON (CSV for `bands` without --out); diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dhs::cli
