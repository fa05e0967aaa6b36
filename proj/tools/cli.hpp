#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace flare::cli {

enum ExitCode : int {
  kOk = 0,
  kFindings = 1,     // analysis finished and reported faults
  kUsage = 2,
  kResourceCap = 3,  // state-space cap hit
  kInvalidInput = 4,
};

/// `lo..hi[:step]` or a single value; bounds inclusive, step defaults to 1.
/// Throws InvalidArgument on malformed text, an empty range or step <= 0.
std::vector<int> parse_int_range(const std::string& text);
std::vector<double> parse_real_range(const std::string& text);

/// Runs the `flare` command line. `args` excludes the program name. Results
/// go to the `--out` paths or to `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Installs the stderr logger; the level comes from FLARE_LOG, else `fallback`.
void init_logging(const std::string& fallback = "warn");

}  // namespace flare::cli
