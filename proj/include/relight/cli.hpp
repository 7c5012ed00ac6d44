#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace relight::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kOk = 0,
  kInvalidFlags = 2,
  kIoError = 3,
  kDimensionMismatch = 4,
};

/// Runs the `relight` command line. args excludes the program name. Data and
/// tables go to out, diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace relight::cli
