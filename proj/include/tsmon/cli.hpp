#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tsmon::cli {

/// Exit codes of the `tsmon` command.
enum ExitStatus : int {
  kSuccess = 0,
  kFindings = 1,  // validation diagnostics, deviations or illegal events
  kUsage = 2,     // bad arguments or I/O failure
  kParse = 3,     // malformed spec or trace
};

/// Runs `tsmon` with `args` (excluding the program name). Machine-readable
/// results go to `out`, human diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tsmon::cli
