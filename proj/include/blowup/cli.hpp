#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace blowup {

enum ExitCode { exit_ok = 0, exit_no_convergence = 2, exit_invalid = 3 };

// Runs one subcommand; `args` starts with the subcommand name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace blowup
