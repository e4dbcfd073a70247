#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace dpse::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kValidation = 2,
  kIo = 3,
};

/// Runs the `dpse` command line. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dpse::cli
