#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace wits::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

/// Runs `wits <subcommand> ...` with args excluding the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wits::cli
