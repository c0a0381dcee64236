#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace zsh::cli {

/// Exit codes of the command suite.
enum ExitCode : int {
    exit_ok = 0,
    exit_internal = 1,
    exit_validation = 2,
    exit_solver = 3,
    exit_protocol = 4,
};

/// Runs one command line. `args` excludes the program name; output that a
/// subcommand prints goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace zsh::cli
