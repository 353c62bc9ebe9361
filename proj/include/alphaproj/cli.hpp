#ifndef ALPHAPROJ_CLI_HPP
#define ALPHAPROJ_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace alphaproj::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kMalformed = 2,
  kInfeasible = 3,
  kNotConverged = 4,
};

/// Runs one command; `args` excludes the program name. The result or error
/// document goes to `out`, usage text to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace alphaproj::cli

#endif  // ALPHAPROJ_CLI_HPP
