#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sievectl {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,   // bad flags, unreadable or invalid configuration
  kFaulted = 3, // the run ended Faulted or Aborted
};

// Runs one sievectl invocation; args excludes the program name. stdout gets
// machine-readable output, stderr human-readable progress and errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sievectl
