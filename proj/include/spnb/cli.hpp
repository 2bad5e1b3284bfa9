#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spnb::cli {

/// Process exit codes.
enum ExitCode : int {
  kSuccess = 0,
  kValidationError = 2,
  kNumericalError = 3,
  kIoError = 4,
};

/// Parses `args` (without the program name), runs the selected command and
/// returns its exit code. Errors are reported on `err`, progress on `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace spnb::cli
