#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kerrspring::cli {

enum ExitCode : int {
  exit_ok = 0,
  exit_config = 2,
  exit_numerical = 3,
  exit_check_failed = 4,
};

// args excludes the program name. Results go to `out` unless --output is
// given; diagnostics always go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace kerrspring::cli
