// Command-line front end: estimate, locus, simulate and benchmark.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace siv::cli {

// Runs the CLI on `args` (args[0] is the program name). Results go to
// files or to `out`; structured error messages go to `err`. Returns the
// process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace siv::cli
