#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace metricforge::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kIo = 3,
  kNumerical = 4,
  kNotConverged = 5,
};

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace metricforge::cli
