#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace emscore::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitInput = 2,
  kExitCompute = 3,
  kExitFindings = 4,
};

/// Runs one invocation of the tool. args excludes the program name. Results go
/// to `out` unless --out names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace emscore::cli
