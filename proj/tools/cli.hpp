#pragma once

#include <string>
#include <vector>

namespace tofa::cli {

// Entry point shared by the binary and the tests. `args` excludes the
// program name: {"map", "--topo", "8x8x8", ...}. Returns the process exit
// code; errors are reported on stderr.
int run(const std::vector<std::string>& args);

}  // namespace tofa::cli
