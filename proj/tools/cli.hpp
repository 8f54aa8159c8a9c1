#pragma once

#include <string>
#include <vector>

namespace bergbep::cli {

enum ExitCode : int { kOk = 0, kIoOrSchema = 1, kInfeasible = 2, kNonConvergence = 3 };

/// Runs the command line `args` (without the program name) and returns the exit code.
int run(const std::vector<std::string>& args);

}  // namespace bergbep::cli
